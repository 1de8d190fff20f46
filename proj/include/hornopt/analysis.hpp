#pragma once

// Prenex normal form, clausal form of quantifier-free matrices, the Horn
// condition relative to a second-order signature, and prefix classification.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hornopt/error.hpp"
#include "hornopt/logic.hpp"

namespace hornopt {

enum class Quantifier { forall, exists };

inline Quantifier flip(Quantifier q) {
  return q == Quantifier::forall ? Quantifier::exists : Quantifier::forall;
}

struct QuantifierBinding {
  Quantifier quantifier;
  std::string variable;

  friend bool operator==(const QuantifierBinding&,
                         const QuantifierBinding&) = default;
};

struct PrenexForm {
  std::vector<QuantifierBinding> prefix;
  FormulaPtr matrix;

  /// Reassembles the prenex formula as a tree.
  FormulaPtr to_formula() const {
    FormulaPtr f = matrix;
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
      f = it->quantifier == Quantifier::forall ? Formula::forall(it->variable, f)
                                               : Formula::exists(it->variable, f);
    return f;
  }

  std::vector<std::string> variables() const {
    std::vector<std::string> out;
    for (const auto& b : prefix) out.push_back(b.variable);
    return out;
  }
};

/// Replaces every A <-> B with (A -> B) & (B -> A).
inline FormulaPtr expand_biconditionals(const FormulaPtr& f) {
  if (!f || f->is_atomic()) return f;
  using K = Formula::Kind;
  switch (f->kind()) {
    case K::negation:
      return Formula::negation(expand_biconditionals(f->body()));
    case K::forall:
    case K::exists:
      return Formula::quantifier(f->kind(), f->name(),
                                 expand_biconditionals(f->body()));
    case K::biconditional: {
      FormulaPtr a = expand_biconditionals(f->left());
      FormulaPtr b = expand_biconditionals(f->right());
      return Formula::conjunction(Formula::implication(a, b),
                                  Formula::implication(b, a));
    }
    default:
      return Formula::binary(f->kind(), expand_biconditionals(f->left()),
                             expand_biconditionals(f->right()));
  }
}

namespace detail {

inline void collect_identifiers(const Formula& f, std::set<std::string>& out) {
  if (f.is_atomic()) {
    for (const auto& t : f.terms())
      if (t.kind != Term::Kind::element) out.insert(t.name);
    return;
  }
  if (f.is_quantifier()) out.insert(f.name());
  if (f.left()) collect_identifiers(*f.left(), out);
  if (f.right()) collect_identifiers(*f.right(), out);
}

class Rectifier {
 public:
  explicit Rectifier(const FormulaPtr& f) {
    collect_identifiers(*f, taken_);
    for (auto& v : free_variables(f)) reserved_.insert(v);
    // Constant names must not be captured by renamed binders either.
    collect_constants(*f);
  }

  FormulaPtr run(const FormulaPtr& f) {
    if (f->is_atomic()) {
      std::vector<Term> terms = f->terms();
      bool changed = false;
      for (auto& t : terms)
        if (t.is_variable())
          for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == t.name) {
              if (t.name != it->second) changed = true;
              t.name = it->second;
              break;
            }
      if (!changed) return f;
      return f->kind() == Formula::Kind::atom
                 ? Formula::atom(f->name(), std::move(terms))
                 : Formula::equal(terms[0], terms[1]);
    }
    if (f->is_quantifier()) {
      std::string fresh = f->name();
      if (used_binders_.count(fresh) || reserved_.count(fresh)) {
        fresh = f->name() + "'";
        while (taken_.count(fresh)) fresh += "'";
      }
      taken_.insert(fresh);
      used_binders_.insert(fresh);
      scope_.emplace_back(f->name(), fresh);
      FormulaPtr body = run(f->body());
      scope_.pop_back();
      return Formula::quantifier(f->kind(), fresh, body);
    }
    if (f->kind() == Formula::Kind::negation)
      return Formula::negation(run(f->body()));
    FormulaPtr a = run(f->left());
    FormulaPtr b = run(f->right());
    return Formula::binary(f->kind(), a, b);
  }

 private:
  void collect_constants(const Formula& f) {
    if (f.is_atomic()) {
      for (const auto& t : f.terms())
        if (t.kind == Term::Kind::constant) reserved_.insert(t.name);
      return;
    }
    if (f.left()) collect_constants(*f.left());
    if (f.right()) collect_constants(*f.right());
  }

  std::set<std::string> taken_;
  std::set<std::string> reserved_;
  std::set<std::string> used_binders_;
  std::vector<std::pair<std::string, std::string>> scope_;
};

inline std::size_t block_count(const std::vector<QuantifierBinding>& p) {
  std::size_t blocks = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (i == 0 || p[i].quantifier != p[i - 1].quantifier) ++blocks;
  return blocks;
}

inline std::vector<QuantifierBinding> merge_prefixes(
    const std::vector<QuantifierBinding>& a,
    const std::vector<QuantifierBinding>& b, Quantifier start) {
  std::vector<QuantifierBinding> out;
  std::size_t i = 0, j = 0;
  Quantifier q = start;
  while (i < a.size() || j < b.size()) {
    while (i < a.size() && a[i].quantifier == q) out.push_back(a[i++]);
    while (j < b.size() && b[j].quantifier == q) out.push_back(b[j++]);
    q = flip(q);
  }
  return out;
}

/// Interleaves two independent prefixes with as few quantifier alternations
/// as possible; ties prefer a leading universal block.
inline std::vector<QuantifierBinding> merge_prefixes(
    const std::vector<QuantifierBinding>& a,
    const std::vector<QuantifierBinding>& b) {
  auto u = merge_prefixes(a, b, Quantifier::forall);
  auto e = merge_prefixes(a, b, Quantifier::exists);
  return block_count(e) < block_count(u) ? e : u;
}

inline std::vector<QuantifierBinding> flipped(std::vector<QuantifierBinding> p) {
  for (auto& b : p) b.quantifier = flip(b.quantifier);
  return p;
}

/// Pulls quantifiers of a rectified, biconditional-free formula to the front.
inline PrenexForm prenex(const FormulaPtr& f) {
  using K = Formula::Kind;
  if (f->is_atomic()) return {{}, f};
  switch (f->kind()) {
    case K::forall:
    case K::exists: {
      PrenexForm inner = prenex(f->body());
      inner.prefix.insert(inner.prefix.begin(),
                          {f->kind() == K::forall ? Quantifier::forall
                                                  : Quantifier::exists,
                           f->name()});
      return inner;
    }
    case K::negation: {
      PrenexForm inner = prenex(f->body());
      return {flipped(std::move(inner.prefix)), Formula::negation(inner.matrix)};
    }
    case K::implication: {
      PrenexForm a = prenex(f->left());
      PrenexForm b = prenex(f->right());
      return {merge_prefixes(flipped(std::move(a.prefix)), b.prefix),
              Formula::implication(a.matrix, b.matrix)};
    }
    case K::conjunction:
    case K::disjunction: {
      PrenexForm a = prenex(f->left());
      PrenexForm b = prenex(f->right());
      return {merge_prefixes(a.prefix, b.prefix),
              Formula::binary(f->kind(), a.matrix, b.matrix)};
    }
    default:
      throw InvariantError("biconditional left in prenex conversion");
  }
}

}  // namespace detail

/// Converts to prenex normal form. Biconditionals are expanded first and bound
/// variables are renamed apart, so the prefix variables are pairwise distinct
/// and distinct from every free variable and constant.
inline PrenexForm to_pnf(const FormulaPtr& f) {
  if (!f) return {};
  FormulaPtr expanded = expand_biconditionals(f);
  detail::Rectifier rect(expanded);
  return detail::prenex(rect.run(expanded));
}

struct Literal {
  bool positive = true;
  /// A relational atom or an equality atom.
  FormulaPtr atom;

  std::string to_string() const {
    if (atom->kind() == Formula::Kind::equal) {
      return hornopt::to_string(positive ? atom : Formula::negation(atom));
    }
    return (positive ? "" : "!") + hornopt::to_string(atom);
  }
};

struct Clause {
  std::vector<Literal> literals;

  std::string to_string() const {
    if (literals.empty()) return "<empty>";
    std::string out;
    for (std::size_t i = 0; i < literals.size(); ++i) {
      if (i) out += " | ";
      out += literals[i].to_string();
    }
    return out;
  }
};

struct ClauseSet {
  std::vector<Clause> clauses;

  bool is_falsum() const {
    return std::any_of(clauses.begin(), clauses.end(),
                       [](const Clause& c) { return c.literals.empty(); });
  }
};

struct CnfOptions {
  std::size_t max_clauses = 1'000'000;
};

namespace detail {

inline bool same_literal(const Literal& a, const Literal& b) {
  return a.positive == b.positive && equivalent_trees(a.atom, b.atom);
}

class CnfBuilder {
 public:
  explicit CnfBuilder(CnfOptions opt) : opt_(opt) {}

  std::vector<Clause> build(const FormulaPtr& f, bool positive) {
    using K = Formula::Kind;
    if (f->is_atomic()) return {Clause{{Literal{positive, f}}}};
    switch (f->kind()) {
      case K::negation: return build(f->body(), !positive);
      case K::conjunction:
        return positive ? both(build(f->left(), true), build(f->right(), true))
                        : either(build(f->left(), false),
                                 build(f->right(), false));
      case K::disjunction:
        return positive ? either(build(f->left(), true), build(f->right(), true))
                        : both(build(f->left(), false),
                               build(f->right(), false));
      case K::implication:
        return positive
                   ? either(build(f->left(), false), build(f->right(), true))
                   : both(build(f->left(), true), build(f->right(), false));
      case K::biconditional:
        if (positive)
          return both(either(build(f->left(), false), build(f->right(), true)),
                      either(build(f->left(), true), build(f->right(), false)));
        return both(either(build(f->left(), true), build(f->right(), true)),
                    either(build(f->left(), false), build(f->right(), false)));
      default:
        throw InputError("matrix_to_cnf requires a quantifier-free formula");
    }
  }

 private:
  std::vector<Clause> both(std::vector<Clause> a, std::vector<Clause> b) {
    if (a.size() + b.size() > opt_.max_clauses) overflow();
    a.insert(a.end(), std::make_move_iterator(b.begin()),
             std::make_move_iterator(b.end()));
    return a;
  }

  std::vector<Clause> either(const std::vector<Clause>& a,
                             const std::vector<Clause>& b) {
    if (!a.empty() && b.size() > opt_.max_clauses / a.size()) overflow();
    std::vector<Clause> out;
    out.reserve(a.size() * b.size());
    for (const auto& ca : a)
      for (const auto& cb : b) {
        Clause c = ca;
        for (const auto& l : cb.literals)
          if (std::none_of(c.literals.begin(), c.literals.end(),
                           [&](const Literal& x) { return same_literal(x, l); }))
            c.literals.push_back(l);
        out.push_back(std::move(c));
      }
    return out;
  }

  [[noreturn]] void overflow() const {
    throw LimitError("clausal form exceeds " + std::to_string(opt_.max_clauses) +
                     " clauses");
  }

  CnfOptions opt_;
};

}  // namespace detail

/// Exact conjunctive normal form of a quantifier-free formula, by
/// distribution; no auxiliary variables are introduced.
inline ClauseSet matrix_to_cnf(const FormulaPtr& matrix, CnfOptions opt = {}) {
  if (!matrix) return {};
  detail::CnfBuilder b(opt);
  return {b.build(matrix, true)};
}

struct HornReport {
  bool horn = true;
  /// Index of the first clause with two or more positive second-order
  /// literals.
  std::optional<std::size_t> offending_index;
  Clause offending_clause;
  std::vector<Literal> positive_so_literals;

  std::string describe() const {
    if (horn) return "every clause has at most one positive second-order literal";
    std::string out = "clause " + std::to_string(*offending_index) + " [" +
                      offending_clause.to_string() + "] has " +
                      std::to_string(positive_so_literals.size()) +
                      " positive second-order literals:";
    for (const auto& l : positive_so_literals) out += " " + l.to_string();
    return out;
  }
};

inline bool in_signature(std::string_view name,
                         std::span<const RelationDecl> so_sig) {
  return std::any_of(so_sig.begin(), so_sig.end(),
                     [&](const RelationDecl& r) { return r.name == name; });
}

/// Passes iff every clause has at most one positive literal over a predicate
/// of so_sig. First-order and equality literals do not count.
inline HornReport horn_check(const ClauseSet& cs,
                             std::span<const RelationDecl> so_sig) {
  HornReport report;
  for (std::size_t i = 0; i < cs.clauses.size(); ++i) {
    std::vector<Literal> positives;
    for (const auto& l : cs.clauses[i].literals)
      if (l.positive && l.atom->kind() == Formula::Kind::atom &&
          in_signature(l.atom->name(), so_sig))
        positives.push_back(l);
    if (positives.size() > 1) {
      report.horn = false;
      report.offending_index = i;
      report.offending_clause = cs.clauses[i];
      report.positive_so_literals = std::move(positives);
      return report;
    }
  }
  return report;
}

enum class QuantClass { sigma0, sigma1, pi1, sigma2, pi2, other };

inline std::string_view to_string(QuantClass c) {
  switch (c) {
    case QuantClass::sigma0: return "SIGMA0";
    case QuantClass::sigma1: return "SIGMA1";
    case QuantClass::pi1: return "PI1";
    case QuantClass::sigma2: return "SIGMA2";
    case QuantClass::pi2: return "PI2";
    case QuantClass::other: return "OTHER";
  }
  return "OTHER";
}

inline QuantClass classify_prefix(const PrenexForm& p) {
  if (p.prefix.empty()) return QuantClass::sigma0;
  std::vector<Quantifier> blocks;
  for (const auto& b : p.prefix)
    if (blocks.empty() || blocks.back() != b.quantifier)
      blocks.push_back(b.quantifier);
  if (blocks.size() == 1)
    return blocks[0] == Quantifier::forall ? QuantClass::pi1 : QuantClass::sigma1;
  if (blocks.size() == 2)
    return blocks[0] == Quantifier::forall ? QuantClass::pi2 : QuantClass::sigma2;
  return QuantClass::other;
}

}  // namespace hornopt
