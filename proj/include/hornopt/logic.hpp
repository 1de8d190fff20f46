#pragma once

// Vocabularies, finite structures, formula trees and Tarskian evaluation.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hornopt/error.hpp"

namespace hornopt {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;

/// Built-in successor relation, available when the vocabulary enables it.
inline constexpr std::string_view kSuccessorRelation = "succ";
/// Built-in unary relation true on basic (non-weight) elements.
inline constexpr std::string_view kBasicSortRelation = "C";

struct RelationDecl {
  std::string name;
  std::size_t arity = 0;

  friend bool operator==(const RelationDecl&, const RelationDecl&) = default;
};

inline std::string to_string(std::span<const Element> tuple) {
  std::string out = "(";
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(tuple[i]);
  }
  return out + ")";
}

/// Number of tuples of the given arity over an n-element universe, or nullopt
/// on overflow of 64 bits.
inline std::optional<std::uint64_t> tuple_count(std::size_t n,
                                                std::size_t arity) {
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < arity; ++i) {
    if (n != 0 && count > UINT64_MAX / n) return std::nullopt;
    count *= n;
  }
  return count;
}

/// Rank of a tuple in lexicographic order over 0..n-1.
inline std::uint64_t tuple_rank(std::span<const Element> tuple, std::size_t n) {
  std::uint64_t rank = 0;
  for (Element e : tuple) rank = rank * n + e;
  return rank;
}

inline Tuple tuple_unrank(std::uint64_t rank, std::size_t arity,
                          std::size_t n) {
  Tuple t(arity);
  for (std::size_t i = arity; i-- > 0;) {
    t[i] = static_cast<Element>(rank % n);
    rank /= n;
  }
  return t;
}

/// Calls fn(tuple) for every tuple of the given arity in lexicographic order.
template <typename Fn>
void for_each_tuple(std::size_t n, std::size_t arity, Fn&& fn) {
  Tuple t(arity, 0);
  if (n == 0 && arity > 0) return;
  while (true) {
    fn(static_cast<const Tuple&>(t));
    std::size_t i = arity;
    while (i > 0) {
      --i;
      if (++t[i] < n) break;
      t[i] = 0;
      if (i == 0) return;
    }
    if (arity == 0) return;
  }
}

class Vocabulary {
 public:
  void add_relation(const std::string& name, std::size_t arity) {
    if (arity == 0)
      throw InputError("relation '" + name + "' must have positive arity");
    if (is_reserved(name))
      throw InputError("relation name '" + name + "' is reserved");
    if (arity_of(name) || is_constant(name))
      throw InputError("duplicate symbol '" + name + "'");
    relations_.push_back({name, arity});
  }

  void add_constant(const std::string& name) {
    if (arity_of(name) || is_constant(name) || is_reserved(name))
      throw InputError("duplicate symbol '" + name + "'");
    constants_.push_back(name);
  }

  void enable_successor() { successor_ = true; }
  void enable_basic_sort() { basic_sort_ = true; }
  bool has_successor() const noexcept { return successor_; }
  bool has_basic_sort() const noexcept { return basic_sort_; }

  /// Arity of a first-order relation, built-ins included.
  std::optional<std::size_t> arity_of(std::string_view name) const {
    for (const auto& r : relations_)
      if (r.name == name) return r.arity;
    if (successor_ && name == kSuccessorRelation) return 2;
    if (basic_sort_ && name == kBasicSortRelation) return 1;
    return std::nullopt;
  }

  bool is_constant(std::string_view name) const {
    return std::find(constants_.begin(), constants_.end(), name) !=
           constants_.end();
  }

  const std::vector<RelationDecl>& relations() const noexcept {
    return relations_;
  }
  const std::vector<std::string>& constants() const noexcept {
    return constants_;
  }

  static bool is_reserved(std::string_view name) {
    return name == kSuccessorRelation || name == kBasicSortRelation;
  }

 private:
  std::vector<RelationDecl> relations_;
  std::vector<std::string> constants_;
  bool successor_ = false;
  bool basic_sort_ = false;
};

/// Extension of one relation. Dense bitmap when the tuple space is small,
/// ordered set otherwise.
class Relation {
 public:
  static constexpr std::uint64_t kDenseLimit = 1u << 22;

  Relation() = default;
  Relation(std::size_t arity, std::size_t universe) : arity_(arity), n_(universe) {
    if (auto count = tuple_count(universe, arity); count && *count <= kDenseLimit)
      dense_.assign(*count, false);
  }

  std::size_t arity() const noexcept { return arity_; }

  void insert(std::span<const Element> tuple) {
    if (!dense_.empty()) dense_[tuple_rank(tuple, n_)] = true;
    tuples_.insert(Tuple(tuple.begin(), tuple.end()));
  }

  bool contains(std::span<const Element> tuple) const {
    if (!dense_.empty()) return dense_[tuple_rank(tuple, n_)];
    return tuples_.count(Tuple(tuple.begin(), tuple.end())) != 0;
  }

  const std::set<Tuple>& tuples() const noexcept { return tuples_; }

 private:
  std::size_t arity_ = 0;
  std::size_t n_ = 0;
  std::vector<bool> dense_;
  std::set<Tuple> tuples_;
};

/// A finite model over the universe 0..n-1.
class Structure {
 public:
  explicit Structure(std::size_t universe_size) : n_(universe_size) {
    if (n_ == 0) throw InputError("universe must be nonempty");
  }

  std::size_t size() const noexcept { return n_; }

  void declare_relation(const std::string& name, std::size_t arity) {
    if (arity == 0)
      throw InputError("relation '" + name + "' must have positive arity");
    auto it = relations_.find(name);
    if (it != relations_.end()) {
      if (it->second.arity() != arity)
        throw InputError("relation '" + name + "' redeclared with arity " +
                         std::to_string(arity));
      return;
    }
    relations_.emplace(name, Relation(arity, n_));
  }

  void add_tuple(const std::string& name, std::span<const Element> tuple) {
    auto it = relations_.find(name);
    if (it == relations_.end())
      throw InputError("relation '" + name + "' is not declared");
    if (tuple.size() != it->second.arity())
      throw InputError("tuple " + to_string(tuple) + " has wrong arity for '" +
                       name + "'");
    check_elements(tuple);
    it->second.insert(tuple);
  }

  void add_tuple(const std::string& name, std::initializer_list<Element> tuple) {
    add_tuple(name, std::span<const Element>(tuple.begin(), tuple.size()));
  }

  void bind_constant(const std::string& name, Element value) {
    check_elements(std::span<const Element>(&value, 1));
    constants_[name] = value;
  }

  /// Designates an element as a weight carrying the given value.
  void set_weight(Element element, std::int64_t value) {
    check_elements(std::span<const Element>(&element, 1));
    if (value < 0) throw InputError("weights must be nonnegative");
    weights_[element] = value;
  }

  bool is_weight(Element e) const { return weights_.count(e) != 0; }
  const std::map<Element, std::int64_t>& weights() const noexcept {
    return weights_;
  }

  std::optional<Element> constant(std::string_view name) const {
    auto it = constants_.find(std::string(name));
    if (it == constants_.end()) return std::nullopt;
    return it->second;
  }
  const std::map<std::string, Element>& constants() const noexcept {
    return constants_;
  }

  const Relation* relation(std::string_view name) const {
    auto it = relations_.find(std::string(name));
    return it == relations_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, Relation>& relations() const noexcept {
    return relations_;
  }

  bool holds(std::string_view name, std::span<const Element> tuple) const {
    const Relation* r = relation(name);
    if (!r) throw EvaluationError("no relation '" + std::string(name) + "'");
    return r->contains(tuple);
  }

  /// Validates against a vocabulary, declares missing vocabulary relations as
  /// empty, and populates the built-in relations the vocabulary enables.
  void conform_to(const Vocabulary& vocab) {
    for (const auto& [name, rel] : relations_) {
      if (Vocabulary::is_reserved(name) && !builtin_populated_)
        throw InputError("relation '" + name +
                         "' is built in and may not be supplied");
      auto arity = vocab.arity_of(name);
      if (!arity)
        throw InputError("structure relation '" + name +
                         "' is not declared in the vocabulary");
      if (*arity != rel.arity())
        throw InputError("structure relation '" + name + "' has arity " +
                         std::to_string(rel.arity()) + ", vocabulary says " +
                         std::to_string(*arity));
    }
    for (const auto& c : vocab.constants())
      if (!constant(c))
        throw InputError("constant '" + c + "' is not bound by the structure");
    for (const auto& r : vocab.relations()) declare_relation(r.name, r.arity);
    if (builtin_populated_) return;
    if (vocab.has_successor()) {
      declare_relation(std::string(kSuccessorRelation), 2);
      for (Element i = 0; i + 1 < n_; ++i)
        add_tuple(std::string(kSuccessorRelation), {i, i + 1});
    }
    if (vocab.has_basic_sort()) {
      declare_relation(std::string(kBasicSortRelation), 1);
      for (Element i = 0; i < n_; ++i)
        if (!is_weight(i)) add_tuple(std::string(kBasicSortRelation), {i});
    }
    builtin_populated_ = true;
  }

 private:
  void check_elements(std::span<const Element> tuple) const {
    for (Element e : tuple)
      if (e >= n_)
        throw InputError("element " + std::to_string(e) +
                         " outside universe of size " + std::to_string(n_));
  }

  std::size_t n_;
  std::map<std::string, Relation> relations_;
  std::map<std::string, Element> constants_;
  std::map<Element, std::int64_t> weights_;
  bool builtin_populated_ = false;
};

/// Interpretation of the second-order predicates: name -> extension.
class SecondOrderInterp {
 public:
  void declare(const std::string& name) { extensions_[name]; }
  void insert(const std::string& name, Tuple tuple) {
    extensions_[name].insert(std::move(tuple));
  }
  bool has(std::string_view name) const {
    return extensions_.count(std::string(name)) != 0;
  }
  bool holds(std::string_view name, std::span<const Element> tuple) const {
    auto it = extensions_.find(std::string(name));
    if (it == extensions_.end())
      throw EvaluationError("missing second-order interpretation for '" +
                            std::string(name) + "'");
    return it->second.count(Tuple(tuple.begin(), tuple.end())) != 0;
  }
  const std::map<std::string, std::set<Tuple>>& extensions() const noexcept {
    return extensions_;
  }

  friend bool operator==(const SecondOrderInterp&,
                         const SecondOrderInterp&) = default;

 private:
  std::map<std::string, std::set<Tuple>> extensions_;
};

struct Term {
  enum class Kind { variable, constant, element };

  Kind kind = Kind::variable;
  std::string name;
  Element element = 0;

  static Term variable(std::string n) { return {Kind::variable, std::move(n), 0}; }
  static Term constant(std::string n) { return {Kind::constant, std::move(n), 0}; }
  static Term literal(Element e) { return {Kind::element, {}, e}; }

  bool is_variable() const noexcept { return kind == Kind::variable; }

  friend bool operator==(const Term&, const Term&) = default;
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable first-order formula node. Second-order atoms are ordinary atoms
/// whose relation name is in a second-order signature.
class Formula {
 public:
  enum class Kind {
    atom,
    equal,
    negation,
    conjunction,
    disjunction,
    implication,
    biconditional,
    forall,
    exists
  };

  Kind kind() const noexcept { return kind_; }
  /// Relation name for atoms, bound variable for quantifiers.
  const std::string& name() const noexcept { return name_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  const FormulaPtr& left() const noexcept { return left_; }
  const FormulaPtr& right() const noexcept { return right_; }
  /// Body of a quantifier or operand of a negation.
  const FormulaPtr& body() const noexcept { return left_; }

  bool is_quantifier() const noexcept {
    return kind_ == Kind::forall || kind_ == Kind::exists;
  }
  bool is_binary() const noexcept {
    return kind_ == Kind::conjunction || kind_ == Kind::disjunction ||
           kind_ == Kind::implication || kind_ == Kind::biconditional;
  }
  bool is_atomic() const noexcept {
    return kind_ == Kind::atom || kind_ == Kind::equal;
  }

  static FormulaPtr atom(std::string relation, std::vector<Term> terms) {
    return make(Kind::atom, std::move(relation), std::move(terms), nullptr,
                nullptr);
  }
  static FormulaPtr equal(Term a, Term b) {
    return make(Kind::equal, {}, {std::move(a), std::move(b)}, nullptr, nullptr);
  }
  static FormulaPtr negation(FormulaPtr f) {
    return make(Kind::negation, {}, {}, std::move(f), nullptr);
  }
  static FormulaPtr conjunction(FormulaPtr a, FormulaPtr b) {
    return make(Kind::conjunction, {}, {}, std::move(a), std::move(b));
  }
  static FormulaPtr disjunction(FormulaPtr a, FormulaPtr b) {
    return make(Kind::disjunction, {}, {}, std::move(a), std::move(b));
  }
  static FormulaPtr implication(FormulaPtr a, FormulaPtr b) {
    return make(Kind::implication, {}, {}, std::move(a), std::move(b));
  }
  static FormulaPtr biconditional(FormulaPtr a, FormulaPtr b) {
    return make(Kind::biconditional, {}, {}, std::move(a), std::move(b));
  }
  static FormulaPtr forall(std::string var, FormulaPtr body) {
    return make(Kind::forall, std::move(var), {}, std::move(body), nullptr);
  }
  static FormulaPtr exists(std::string var, FormulaPtr body) {
    return make(Kind::exists, std::move(var), {}, std::move(body), nullptr);
  }
  static FormulaPtr binary(Kind kind, FormulaPtr a, FormulaPtr b) {
    return make(kind, {}, {}, std::move(a), std::move(b));
  }
  static FormulaPtr quantifier(Kind kind, std::string var, FormulaPtr body) {
    return make(kind, std::move(var), {}, std::move(body), nullptr);
  }

  /// Left-nested conjunction of a list; nullptr for an empty list.
  static FormulaPtr conjunction_of(std::span<const FormulaPtr> parts) {
    FormulaPtr out;
    for (const auto& p : parts) out = out ? conjunction(out, p) : p;
    return out;
  }

 private:
  static FormulaPtr make(Kind kind, std::string name, std::vector<Term> terms,
                         FormulaPtr left, FormulaPtr right) {
    auto f = std::shared_ptr<Formula>(new Formula());
    f->kind_ = kind;
    f->name_ = std::move(name);
    f->terms_ = std::move(terms);
    f->left_ = std::move(left);
    f->right_ = std::move(right);
    return f;
  }

  Formula() = default;

  Kind kind_ = Kind::atom;
  std::string name_;
  std::vector<Term> terms_;
  FormulaPtr left_;
  FormulaPtr right_;
};

/// Structural equality.
inline bool equivalent_trees(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind() || a->name() != b->name() ||
      a->terms() != b->terms())
    return false;
  return equivalent_trees(a->left(), b->left()) &&
         equivalent_trees(a->right(), b->right());
}

namespace detail {

inline int precedence(Formula::Kind k) {
  switch (k) {
    case Formula::Kind::biconditional: return 1;
    case Formula::Kind::implication: return 2;
    case Formula::Kind::disjunction: return 3;
    case Formula::Kind::conjunction: return 4;
    case Formula::Kind::negation: return 5;
    case Formula::Kind::forall:
    case Formula::Kind::exists: return 0;
    default: return 6;
  }
}

inline void print_term(std::ostream& os, const Term& t) {
  if (t.kind == Term::Kind::element) os << t.element;
  else os << t.name;
}

inline void print(std::ostream& os, const Formula& f);

inline void print_operand(std::ostream& os, const Formula& child, int min_prec) {
  int p = precedence(child.kind());
  bool paren = child.is_quantifier() || p < min_prec;
  if (paren) os << '(';
  print(os, child);
  if (paren) os << ')';
}

inline void print(std::ostream& os, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::atom:
      os << f.name() << '(';
      for (std::size_t i = 0; i < f.terms().size(); ++i) {
        if (i) os << ',';
        print_term(os, f.terms()[i]);
      }
      os << ')';
      return;
    case K::equal:
      print_term(os, f.terms()[0]);
      os << " = ";
      print_term(os, f.terms()[1]);
      return;
    case K::negation: {
      const Formula& body = *f.body();
      if (body.kind() == K::equal) {
        print_term(os, body.terms()[0]);
        os << " != ";
        print_term(os, body.terms()[1]);
        return;
      }
      os << '!';
      print_operand(os, body, precedence(K::negation));
      return;
    }
    case K::forall:
    case K::exists:
      os << (f.kind() == K::forall ? "forall " : "exists ") << f.name() << ". ";
      print(os, *f.body());
      return;
    case K::conjunction:
    case K::disjunction:
    case K::implication:
    case K::biconditional: {
      int p = precedence(f.kind());
      const char* op = f.kind() == K::conjunction   ? " & "
                       : f.kind() == K::disjunction ? " | "
                       : f.kind() == K::implication ? " -> "
                                                    : " <-> ";
      // & and | are associative; -> is right-associative; <-> left.
      bool right_assoc = f.kind() == K::implication;
      bool assoc = f.kind() == K::conjunction || f.kind() == K::disjunction;
      print_operand(os, *f.left(), right_assoc ? p + 1 : p);
      os << op;
      print_operand(os, *f.right(), right_assoc || assoc ? p : p + 1);
      return;
    }
  }
}

}  // namespace detail

/// Renders a formula in the concrete syntax accepted by parse_formula.
inline std::string to_string(const Formula& f) {
  std::ostringstream os;
  detail::print(os, f);
  return os.str();
}
inline std::string to_string(const FormulaPtr& f) {
  return f ? to_string(*f) : std::string("<true>");
}

/// Free variables in first-occurrence order.
inline std::vector<std::string> free_variables(const FormulaPtr& f) {
  std::vector<std::string> out;
  std::vector<std::string> bound;
  auto visit = [&](auto& self, const Formula& g) -> void {
    if (g.is_atomic()) {
      for (const auto& t : g.terms())
        if (t.is_variable() &&
            std::find(bound.begin(), bound.end(), t.name) == bound.end() &&
            std::find(out.begin(), out.end(), t.name) == out.end())
          out.push_back(t.name);
      return;
    }
    if (g.is_quantifier()) {
      bound.push_back(g.name());
      self(self, *g.body());
      bound.pop_back();
      return;
    }
    if (g.left()) self(self, *g.left());
    if (g.right()) self(self, *g.right());
  };
  if (f) visit(visit, *f);
  return out;
}

/// Relation names of all atoms, first-occurrence order.
inline std::vector<std::string> relation_names(const FormulaPtr& f) {
  std::vector<std::string> out;
  auto visit = [&](auto& self, const Formula& g) -> void {
    if (g.kind() == Formula::Kind::atom) {
      if (std::find(out.begin(), out.end(), g.name()) == out.end())
        out.push_back(g.name());
      return;
    }
    if (g.left()) self(self, *g.left());
    if (g.right()) self(self, *g.right());
  };
  if (f) visit(visit, *f);
  return out;
}

using Assignment = std::map<std::string, Element>;

namespace detail {

class Evaluator {
 public:
  Evaluator(const Structure& m, const SecondOrderInterp& so, const Assignment& a)
      : m_(m), so_(so) {
    for (const auto& [k, v] : a) scope_.emplace_back(k, v);
  }

  bool eval(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::atom: {
        buffer_.clear();
        for (const auto& t : f.terms()) buffer_.push_back(value(t));
        Tuple args = buffer_;
        if (const Relation* r = m_.relation(f.name())) {
          return r->contains(args);
        }
        return so_.holds(f.name(), args);
      }
      case K::equal:
        return value(f.terms()[0]) == value(f.terms()[1]);
      case K::negation: return !eval(*f.body());
      case K::conjunction: return eval(*f.left()) && eval(*f.right());
      case K::disjunction: return eval(*f.left()) || eval(*f.right());
      case K::implication: return !eval(*f.left()) || eval(*f.right());
      case K::biconditional: return eval(*f.left()) == eval(*f.right());
      case K::forall:
      case K::exists: {
        bool universal = f.kind() == K::forall;
        scope_.emplace_back(f.name(), 0);
        std::size_t slot = scope_.size() - 1;
        bool result = universal;
        for (Element e = 0; e < m_.size(); ++e) {
          scope_[slot].second = e;
          if (eval(*f.body()) != universal) {
            result = !universal;
            break;
          }
        }
        scope_.pop_back();
        return result;
      }
    }
    return false;
  }

 private:
  Element value(const Term& t) const {
    switch (t.kind) {
      case Term::Kind::element:
        if (t.element >= m_.size())
          throw EvaluationError("element " + std::to_string(t.element) +
                                " outside universe");
        return t.element;
      case Term::Kind::constant: {
        auto c = m_.constant(t.name);
        if (!c) throw EvaluationError("unbound constant '" + t.name + "'");
        return *c;
      }
      case Term::Kind::variable:
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
          if (it->first == t.name) return it->second;
        throw EvaluationError("unbound variable '" + t.name + "'");
    }
    return 0;
  }

  const Structure& m_;
  const SecondOrderInterp& so_;
  std::vector<std::pair<std::string, Element>> scope_;
  Tuple buffer_;
};

}  // namespace detail

/// True iff (m, so) satisfies f under a. Quantifiers range over the whole
/// universe. A null formula is the empty conjunction.
inline bool evaluate(const FormulaPtr& f, const Structure& m,
                     const SecondOrderInterp& so, const Assignment& a = {}) {
  if (!f) return true;
  detail::Evaluator ev(m, so, a);
  return ev.eval(*f);
}

inline bool evaluate(const FormulaPtr& f, const Structure& m,
                     const Assignment& a = {}) {
  return evaluate(f, m, SecondOrderInterp{}, a);
}

}  // namespace hornopt
