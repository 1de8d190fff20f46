#pragma once

// Optimization problems over second-order interpretations, and the
// line-oriented spec and structure file formats.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hornopt/error.hpp"
#include "hornopt/logic.hpp"
#include "hornopt/parser.hpp"

namespace hornopt {

enum class Direction { maximize, minimize };

/// An optimization problem: optimize, over interpretations of so_signature
/// that satisfy every feasibility formula, the number (or total weight) of
/// objective tuples satisfying local_formula.
struct OptSpec {
  std::string name = "unnamed";
  Direction direction = Direction::maximize;
  Vocabulary vocabulary;
  std::vector<RelationDecl> so_signature;
  std::vector<std::string> objective_vars;
  FormulaPtr local_formula;
  /// Closed formulas, conjoined.
  std::vector<FormulaPtr> feasibility;
  /// First-order relation of arity k+1 whose first position is a weight.
  std::optional<std::string> weight_relation;

  std::size_t objective_arity() const noexcept { return objective_vars.size(); }
  bool weighted() const noexcept { return weight_relation.has_value(); }

  /// Conjunction of the feasibility formulas; nullptr when there are none.
  FormulaPtr global_formula() const {
    return Formula::conjunction_of(feasibility);
  }

  void validate() const {
    std::set<std::string> names;
    for (const auto& r : so_signature) {
      if (r.arity == 0)
        throw InputError("second-order predicate '" + r.name +
                         "' must have positive arity");
      if (!names.insert(r.name).second)
        throw InputError("duplicate second-order predicate '" + r.name + "'");
      if (vocabulary.arity_of(r.name) || vocabulary.is_constant(r.name) ||
          Vocabulary::is_reserved(r.name))
        throw InputError("second-order predicate '" + r.name +
                         "' clashes with a first-order symbol");
    }
    std::set<std::string> vars(objective_vars.begin(), objective_vars.end());
    if (vars.size() != objective_vars.size())
      throw InputError("objective variables must be distinct");
    if (!local_formula) throw InputError("spec has no objective formula");
    for (const auto& v : free_variables(local_formula))
      if (!vars.count(v))
        throw InputError("objective formula has free variable '" + v +
                         "' outside the objective tuple");
    for (const auto& f : feasibility)
      if (auto fv = free_variables(f); !fv.empty())
        throw InputError("feasibility formula has free variable '" + fv[0] + "'");
    if (weight_relation) {
      auto arity = vocabulary.arity_of(*weight_relation);
      if (!arity)
        throw InputError("weight relation '" + *weight_relation +
                         "' is not a declared relation");
      if (*arity != objective_arity() + 1)
        throw InputError("weight relation '" + *weight_relation +
                         "' must have arity " +
                         std::to_string(objective_arity() + 1));
    }
  }
};

namespace detail {

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  std::string w;
  while (is >> w) out.push_back(w);
  return out;
}

inline std::string_view strip_comment(std::string_view line) {
  auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
    line.remove_suffix(1);
  return line;
}

inline std::size_t parse_count(const std::string& word, std::size_t line,
                               const char* what) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(word, &used);
    if (used != word.size() || word[0] == '-') throw std::invalid_argument(word);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ParseError(std::string("expected ") + what + ", found '" + word + "'",
                     line, 1);
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Parses a spec file.
///
///   problem NAME
///   direction max|min
///   rel NAME ARITY          first-order vocabulary, repeatable
///   const NAME...           constants, repeatable
///   successor               enables the built-in succ relation
///   so NAME ARITY           second-order predicate, repeatable
///   objective v1 ... vk : FORMULA
///   feasible FORMULA        repeatable, conjoined
///   weightrel NAME
///
/// Declarations may appear in any order; formulas are resolved after all
/// declarations are read. A weight relation enables the built-in basic-sort
/// relation C.
inline OptSpec parse_spec(std::string_view text) {
  struct Pending {
    std::size_t line;
    std::size_t column;
    std::string text;
  };
  OptSpec spec;
  std::optional<Pending> objective;
  std::vector<Pending> feasible;
  bool saw_direction = false;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                       : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    std::string_view line = detail::strip_comment(raw);
    auto words = detail::split_words(line);
    if (words.empty()) continue;
    const std::string& kw = words[0];
    auto rest_after = [&](std::string_view key) {
      auto at = line.find(key) + key.size();
      while (at < line.size() && std::isspace(static_cast<unsigned char>(line[at])))
        ++at;
      return std::pair<std::string, std::size_t>(std::string(line.substr(at)),
                                                 at + 1);
    };
    auto want = [&](std::size_t n) {
      if (words.size() != n)
        throw ParseError("'" + kw + "' expects " + std::to_string(n - 1) +
                             " argument(s)",
                         lineno, 1);
    };
    try {
      if (kw == "problem") {
        want(2);
        spec.name = words[1];
      } else if (kw == "direction") {
        want(2);
        if (words[1] == "max") spec.direction = Direction::maximize;
        else if (words[1] == "min") spec.direction = Direction::minimize;
        else throw ParseError("direction must be max or min", lineno, 1);
        saw_direction = true;
      } else if (kw == "rel") {
        want(3);
        spec.vocabulary.add_relation(words[1],
                                     detail::parse_count(words[2], lineno, "arity"));
      } else if (kw == "const") {
        if (words.size() < 2) want(2);
        for (std::size_t i = 1; i < words.size(); ++i)
          spec.vocabulary.add_constant(words[i]);
      } else if (kw == "successor") {
        want(1);
        spec.vocabulary.enable_successor();
      } else if (kw == "so") {
        want(3);
        spec.so_signature.push_back(
            {words[1], detail::parse_count(words[2], lineno, "arity")});
      } else if (kw == "objective") {
        if (objective) throw ParseError("duplicate objective", lineno, 1);
        auto [rest, col] = rest_after("objective");
        auto colon = rest.find(':');
        if (colon == std::string::npos)
          throw ParseError("objective needs 'vars : formula'", lineno, col);
        spec.objective_vars = detail::split_words(rest.substr(0, colon));
        std::size_t fstart = colon + 1;
        objective = Pending{lineno, col + fstart, rest.substr(fstart)};
      } else if (kw == "feasible") {
        auto [rest, col] = rest_after("feasible");
        feasible.push_back({lineno, col, rest});
      } else if (kw == "weightrel") {
        want(2);
        spec.weight_relation = words[1];
      } else {
        throw ParseError("unknown directive '" + kw + "'", lineno, 1);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(e.what(), lineno, 1);
    }
  }
  if (!saw_direction) throw ParseError("missing 'direction'", lineno, 1);
  if (!objective) throw ParseError("missing 'objective'", lineno, 1);
  if (spec.weight_relation) spec.vocabulary.enable_basic_sort();

  spec.local_formula =
      parse_formula(objective->text, spec.vocabulary, spec.so_signature,
                    spec.objective_vars, {objective->line, objective->column});
  for (const auto& f : feasible)
    spec.feasibility.push_back(parse_formula(
        f.text, spec.vocabulary, spec.so_signature, {}, {f.line, f.column}));
  try {
    spec.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ParseError(e.what(), objective->line, 1);
  }
  return spec;
}

inline OptSpec read_spec(const std::string& path) {
  return parse_spec(detail::read_file(path));
}

inline std::string to_text(const OptSpec& spec) {
  std::ostringstream os;
  os << "problem " << spec.name << "\n";
  os << "direction " << (spec.direction == Direction::maximize ? "max" : "min")
     << "\n";
  for (const auto& r : spec.vocabulary.relations())
    os << "rel " << r.name << " " << r.arity << "\n";
  if (!spec.vocabulary.constants().empty()) {
    os << "const";
    for (const auto& c : spec.vocabulary.constants()) os << " " << c;
    os << "\n";
  }
  if (spec.vocabulary.has_successor()) os << "successor\n";
  for (const auto& r : spec.so_signature)
    os << "so " << r.name << " " << r.arity << "\n";
  os << "objective";
  for (const auto& v : spec.objective_vars) os << " " << v;
  os << " : " << to_string(spec.local_formula) << "\n";
  for (const auto& f : spec.feasibility) os << "feasible " << to_string(f) << "\n";
  if (spec.weight_relation) os << "weightrel " << *spec.weight_relation << "\n";
  return os.str();
}

/// Parses a structure file.
///
///   universe N
///   const NAME ELEM
///   weights ELEM[:VALUE]...   an element without a value weighs its index
///   rel NAME ARITY
///   e1 e2 ...                 one tuple per line
///   end
inline Structure parse_structure(std::string_view text) {
  std::optional<Structure> m;
  std::optional<std::string> open_rel;
  std::size_t open_arity = 0;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  auto need = [&](std::size_t line) -> Structure& {
    if (!m) throw ParseError("'universe' must come first", line, 1);
    return *m;
  };
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                       : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;
    std::string_view line = detail::strip_comment(raw);
    std::string commafree(line);
    std::replace(commafree.begin(), commafree.end(), ',', ' ');
    auto words = detail::split_words(commafree);
    if (words.empty()) continue;
    try {
      if (open_rel) {
        if (words.size() == 1 && words[0] == "end") {
          open_rel.reset();
          continue;
        }
        if (words.size() != open_arity)
          throw ParseError("tuple for '" + *open_rel + "' needs " +
                               std::to_string(open_arity) + " elements",
                           lineno, 1);
        Tuple t;
        for (const auto& w : words)
          t.push_back(static_cast<Element>(detail::parse_count(w, lineno, "element")));
        need(lineno).add_tuple(*open_rel, t);
        continue;
      }
      const std::string& kw = words[0];
      if (kw == "universe") {
        if (m) throw ParseError("duplicate 'universe'", lineno, 1);
        if (words.size() != 2) throw ParseError("'universe' expects N", lineno, 1);
        m.emplace(detail::parse_count(words[1], lineno, "universe size"));
      } else if (kw == "const") {
        if (words.size() != 3)
          throw ParseError("'const' expects NAME ELEM", lineno, 1);
        need(lineno).bind_constant(
            words[1],
            static_cast<Element>(detail::parse_count(words[2], lineno, "element")));
      } else if (kw == "weights") {
        for (std::size_t i = 1; i < words.size(); ++i) {
          auto colon = words[i].find(':');
          std::string elem = words[i].substr(0, colon);
          auto e = detail::parse_count(elem, lineno, "element");
          std::size_t value =
              colon == std::string::npos
                  ? e
                  : detail::parse_count(words[i].substr(colon + 1), lineno,
                                        "weight value");
          if (value > static_cast<std::size_t>(INT64_MAX))
            throw ParseError("weight value too large", lineno, 1);
          need(lineno).set_weight(static_cast<Element>(e),
                                  static_cast<std::int64_t>(value));
        }
      } else if (kw == "rel") {
        if (words.size() != 3)
          throw ParseError("'rel' expects NAME ARITY", lineno, 1);
        open_arity = detail::parse_count(words[2], lineno, "arity");
        need(lineno).declare_relation(words[1], open_arity);
        open_rel = words[1];
      } else {
        throw ParseError("unknown directive '" + kw + "'", lineno, 1);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(e.what(), lineno, 1);
    }
  }
  if (open_rel) throw ParseError("relation '" + *open_rel + "' lacks 'end'", lineno, 1);
  if (!m) throw ParseError("missing 'universe'", lineno, 1);
  return std::move(*m);
}

inline Structure read_structure(const std::string& path) {
  return parse_structure(detail::read_file(path));
}

/// Serializes a structure; built-in relations are omitted.
inline std::string to_text(const Structure& m) {
  std::ostringstream os;
  os << "universe " << m.size() << "\n";
  for (const auto& [name, e] : m.constants()) os << "const " << name << " " << e << "\n";
  if (!m.weights().empty()) {
    os << "weights";
    for (const auto& [e, v] : m.weights()) os << " " << e << ":" << v;
    os << "\n";
  }
  for (const auto& [name, rel] : m.relations()) {
    if (Vocabulary::is_reserved(name)) continue;
    os << "rel " << name << " " << rel.arity() << "\n";
    for (const auto& t : rel.tuples()) {
      for (std::size_t i = 0; i < t.size(); ++i) os << (i ? " " : "") << t[i];
      os << "\n";
    }
    os << "end\n";
  }
  return os.str();
}

}  // namespace hornopt
