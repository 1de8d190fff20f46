#pragma once

// Grounding over a finite universe: propositional variables for ground
// second-order atoms, clause-level grounding for universal Horn matrices,
// unit-propagation Horn satisfiability, and a general propositional
// expansion of arbitrary formulas used by the search engines.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hornopt/analysis.hpp"
#include "hornopt/error.hpp"
#include "hornopt/logic.hpp"

namespace hornopt {

using Var = std::uint32_t;

/// One propositional variable per ground second-order atom S(e), numbered by
/// predicate declaration order then lexicographic tuple order.
class AtomIndex {
 public:
  AtomIndex() = default;
  AtomIndex(std::span<const RelationDecl> so_sig, std::size_t universe)
      : sig_(so_sig.begin(), so_sig.end()), n_(universe) {
    std::uint64_t offset = 0;
    for (const auto& r : sig_) {
      auto count = tuple_count(n_, r.arity);
      if (!count || offset + *count > kMaxVars)
        throw LimitError("second-order atom space too large for '" + r.name +
                         "' over a universe of " + std::to_string(n_));
      offsets_.push_back(offset);
      counts_.push_back(*count);
      offset += *count;
    }
    size_ = offset;
  }

  static constexpr std::uint64_t kMaxVars = 1ull << 31;

  std::size_t size() const noexcept { return static_cast<std::size_t>(size_); }
  std::size_t universe() const noexcept { return n_; }
  std::span<const RelationDecl> signature() const noexcept { return sig_; }

  std::optional<std::size_t> predicate(std::string_view name) const {
    for (std::size_t i = 0; i < sig_.size(); ++i)
      if (sig_[i].name == name) return i;
    return std::nullopt;
  }

  Var id(std::size_t predicate, std::span<const Element> tuple) const {
    return static_cast<Var>(offsets_[predicate] + tuple_rank(tuple, n_));
  }

  std::pair<std::size_t, Tuple> decode(Var v) const {
    std::size_t p = 0;
    while (p + 1 < offsets_.size() && offsets_[p + 1] <= v) ++p;
    return {p, tuple_unrank(v - offsets_[p], sig_[p].arity, n_)};
  }

  std::string name(Var v) const {
    auto [p, t] = decode(v);
    return sig_[p].name + to_string(t);
  }

  /// The interpretation whose true atoms are those set in bits.
  template <typename Bits>
  SecondOrderInterp interpretation(const Bits& bits) const {
    SecondOrderInterp so;
    for (const auto& r : sig_) so.declare(r.name);
    for (std::size_t v = 0; v < size_; ++v)
      if (bits[v]) {
        auto [p, t] = decode(static_cast<Var>(v));
        so.insert(sig_[p].name, std::move(t));
      }
    return so;
  }

 private:
  std::vector<RelationDecl> sig_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint64_t> counts_;
  std::size_t n_ = 0;
  std::uint64_t size_ = 0;
};

struct GroundLiteral {
  Var var;
  bool positive;

  friend bool operator==(const GroundLiteral&, const GroundLiteral&) = default;
  friend auto operator<=>(const GroundLiteral&, const GroundLiteral&) = default;
};

using GroundClause = std::vector<GroundLiteral>;

struct GroundClauseSet {
  std::size_t num_vars = 0;
  std::vector<GroundClause> clauses;

  /// At most one positive literal per clause.
  bool is_horn() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const GroundClause& c) {
      return std::count_if(c.begin(), c.end(),
                           [](const GroundLiteral& l) { return l.positive; }) <= 1;
    });
  }

  template <typename Bits>
  bool satisfied_by(const Bits& model) const {
    for (const auto& c : clauses) {
      bool sat = false;
      for (const auto& l : c)
        if (static_cast<bool>(model[l.var]) == l.positive) {
          sat = true;
          break;
        }
      if (!sat) return false;
    }
    return true;
  }
};

namespace detail {

inline Element term_value(const Term& t, const Structure& m,
                          const std::vector<std::pair<std::string, Element>>& env) {
  switch (t.kind) {
    case Term::Kind::element:
      if (t.element >= m.size())
        throw EvaluationError("element " + std::to_string(t.element) +
                              " outside universe");
      return t.element;
    case Term::Kind::constant: {
      auto c = m.constant(t.name);
      if (!c) throw EvaluationError("unbound constant '" + t.name + "'");
      return *c;
    }
    case Term::Kind::variable:
      for (auto it = env.rbegin(); it != env.rend(); ++it)
        if (it->first == t.name) return it->second;
      throw EvaluationError("unbound variable '" + t.name + "'");
  }
  return 0;
}

}  // namespace detail

struct GroundingOptions {
  std::size_t max_clauses = 10'000'000;
};

/// Grounds a clausal matrix under every assignment of prefix_vars (plus the
/// fixed assignment). First-order and equality literals are evaluated: a true
/// one deletes its clause, a false one drops out. Tautologies are deleted and
/// duplicate literals merged.
inline GroundClauseSet ground_to_propositional(
    const ClauseSet& matrix, std::span<const std::string> prefix_vars,
    const Structure& m, const AtomIndex& index, const Assignment& fixed = {},
    GroundingOptions opt = {}) {
  GroundClauseSet out;
  out.num_vars = index.size();
  std::vector<std::pair<std::string, Element>> env(fixed.begin(), fixed.end());
  std::size_t base = env.size();
  for (const auto& v : prefix_vars) env.emplace_back(v, 0);
  Tuple args;
  for_each_tuple(m.size(), prefix_vars.size(), [&](const Tuple& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      env[base + i].second = values[i];
    for (const auto& clause : matrix.clauses) {
      GroundClause g;
      bool satisfied = false;
      for (const auto& lit : clause.literals) {
        const Formula& atom = *lit.atom;
        args.clear();
        for (const auto& t : atom.terms())
          args.push_back(detail::term_value(t, m, env));
        if (atom.kind() == Formula::Kind::equal) {
          if ((args[0] == args[1]) == lit.positive) satisfied = true;
        } else if (auto p = index.predicate(atom.name())) {
          g.push_back({index.id(*p, args), lit.positive});
        } else {
          if (m.holds(atom.name(), args) == lit.positive) satisfied = true;
        }
        if (satisfied) break;
      }
      if (satisfied) continue;
      std::sort(g.begin(), g.end());
      g.erase(std::unique(g.begin(), g.end()), g.end());
      bool tautology = false;
      for (std::size_t i = 0; i + 1 < g.size(); ++i)
        if (g[i].var == g[i + 1].var) tautology = true;
      if (tautology) continue;
      if (out.clauses.size() >= opt.max_clauses)
        throw LimitError("ground clause set exceeds " +
                         std::to_string(opt.max_clauses) + " clauses");
      out.clauses.push_back(std::move(g));
    }
  });
  return out;
}

struct SatResult {
  bool satisfiable = false;
  /// Minimal model when satisfiable.
  std::vector<bool> model;
};

/// Horn satisfiability by unit propagation (counter-based, linear in the
/// size of the clause set). Returns the unique minimal model when satisfiable.
inline SatResult horn_sat(const GroundClauseSet& g) {
  if (!g.is_horn()) throw InputError("horn_sat requires a Horn clause set");
  const std::size_t nc = g.clauses.size();
  std::vector<std::size_t> pending(nc, 0);  // unsatisfied negative literals
  std::vector<std::vector<std::size_t>> watchers(g.num_vars);
  std::vector<bool> model(g.num_vars, false);
  std::deque<std::size_t> ready;

  auto head = [&](std::size_t c) -> std::optional<Var> {
    for (const auto& l : g.clauses[c])
      if (l.positive) return l.var;
    return std::nullopt;
  };

  for (std::size_t c = 0; c < nc; ++c) {
    for (const auto& l : g.clauses[c])
      if (!l.positive) {
        ++pending[c];
        watchers[l.var].push_back(c);
      }
    if (pending[c] == 0) ready.push_back(c);
  }
  while (!ready.empty()) {
    std::size_t c = ready.front();
    ready.pop_front();
    auto h = head(c);
    if (!h) return {false, {}};
    if (model[*h]) continue;
    model[*h] = true;
    for (std::size_t w : watchers[*h])
      if (--pending[w] == 0) ready.push_back(w);
  }
  return {true, std::move(model)};
}

/// Propositional formulas over ground second-order atoms, stored in an arena.
/// Node 0 is false and node 1 is true.
class PropArena {
 public:
  using NodeId = std::uint32_t;
  enum class Op : std::uint8_t { constant, var, negation, conjunction, disjunction };

  static constexpr NodeId kFalse = 0;
  static constexpr NodeId kTrue = 1;

  explicit PropArena(std::size_t max_nodes = 20'000'000) : max_nodes_(max_nodes) {
    nodes_.push_back({Op::constant, 0, 0, 0});
    nodes_.push_back({Op::constant, 1, 0, 0});
  }

  bool is_constant(NodeId n) const { return n <= kTrue; }

  NodeId var(Var v) { return add({Op::var, v, 0, 0}); }

  NodeId negation(NodeId a) {
    if (a == kFalse) return kTrue;
    if (a == kTrue) return kFalse;
    if (nodes_[a].op == Op::negation) return children_[nodes_[a].first];
    std::uint32_t first = static_cast<std::uint32_t>(children_.size());
    children_.push_back(a);
    return add({Op::negation, 0, first, 1});
  }

  /// Conjunction (conjunctive = true) or disjunction of the given nodes, with
  /// constants folded and nested nodes of the same kind flattened.
  NodeId junction(bool conjunctive, std::span<const NodeId> parts) {
    NodeId identity = conjunctive ? kTrue : kFalse;
    NodeId absorbing = conjunctive ? kFalse : kTrue;
    Op op = conjunctive ? Op::conjunction : Op::disjunction;
    scratch_.clear();
    for (NodeId p : parts) {
      if (p == absorbing) return absorbing;
      if (p == identity) continue;
      if (nodes_[p].op == op) {
        for (std::uint32_t i = 0; i < nodes_[p].count; ++i)
          scratch_.push_back(children_[nodes_[p].first + i]);
      } else {
        scratch_.push_back(p);
      }
    }
    if (scratch_.empty()) return identity;
    if (scratch_.size() == 1) return scratch_[0];
    std::uint32_t first = static_cast<std::uint32_t>(children_.size());
    children_.insert(children_.end(), scratch_.begin(), scratch_.end());
    return add({op, 0, first, static_cast<std::uint32_t>(scratch_.size())});
  }

  NodeId conjunction(std::span<const NodeId> parts) { return junction(true, parts); }
  NodeId disjunction(std::span<const NodeId> parts) { return junction(false, parts); }
  NodeId conjunction(NodeId a, NodeId b) {
    NodeId p[2] = {a, b};
    return junction(true, p);
  }
  NodeId disjunction(NodeId a, NodeId b) {
    NodeId p[2] = {a, b};
    return junction(false, p);
  }

  Op op(NodeId n) const { return nodes_[n].op; }
  Var var_of(NodeId n) const { return nodes_[n].value; }
  std::span<const NodeId> children(NodeId n) const {
    return {children_.data() + nodes_[n].first, nodes_[n].count};
  }

  /// Two-valued evaluation; values[v] != 0 means true.
  template <typename Values>
  bool eval(NodeId n, const Values& values) const {
    const Node& node = nodes_[n];
    switch (node.op) {
      case Op::constant: return node.value != 0;
      case Op::var: return values[node.value] != 0;
      case Op::negation: return !eval(children_[node.first], values);
      case Op::conjunction:
        for (std::uint32_t i = 0; i < node.count; ++i)
          if (!eval(children_[node.first + i], values)) return false;
        return true;
      case Op::disjunction:
        for (std::uint32_t i = 0; i < node.count; ++i)
          if (eval(children_[node.first + i], values)) return true;
        return false;
    }
    return false;
  }

  /// Kleene evaluation over values in {-1 unknown, 0 false, 1 true}.
  int eval3(NodeId n, std::span<const std::int8_t> values) const {
    const Node& node = nodes_[n];
    switch (node.op) {
      case Op::constant: return node.value ? 1 : 0;
      case Op::var: return values[node.value];
      case Op::negation: {
        int v = eval3(children_[node.first], values);
        return v < 0 ? -1 : 1 - v;
      }
      case Op::conjunction:
      case Op::disjunction: {
        bool conj = node.op == Op::conjunction;
        int absorbing = conj ? 0 : 1;
        bool unknown = false;
        for (std::uint32_t i = 0; i < node.count; ++i) {
          int v = eval3(children_[node.first + i], values);
          if (v == absorbing) return absorbing;
          if (v < 0) unknown = true;
        }
        return unknown ? -1 : 1 - absorbing;
      }
    }
    return -1;
  }

  /// Variables occurring under n, appended to out (may contain duplicates).
  void collect_vars(NodeId n, std::vector<Var>& out) const {
    const Node& node = nodes_[n];
    if (node.op == Op::var) {
      out.push_back(node.value);
      return;
    }
    for (std::uint32_t i = 0; i < node.count; ++i)
      collect_vars(children_[node.first + i], out);
  }

  /// Copy of n with the given variables replaced by constants
  /// (fixed[v] in {-1 keep, 0, 1}).
  NodeId substitute(NodeId n, std::span<const std::int8_t> fixed) {
    const Node node = nodes_[n];
    switch (node.op) {
      case Op::constant: return n;
      case Op::var:
        return fixed[node.value] < 0 ? n : (fixed[node.value] ? kTrue : kFalse);
      case Op::negation: return negation(substitute(children_[node.first], fixed));
      case Op::conjunction:
      case Op::disjunction: {
        std::vector<NodeId> kids;
        kids.reserve(node.count);
        bool changed = false;
        for (std::uint32_t i = 0; i < node.count; ++i) {
          NodeId c = children_[node.first + i];
          NodeId s = substitute(c, fixed);
          if (s != c) changed = true;
          kids.push_back(s);
        }
        if (!changed) return n;
        return junction(node.op == Op::conjunction, kids);
      }
    }
    return n;
  }

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    std::uint32_t value;
    std::uint32_t first;
    std::uint32_t count;
  };

  NodeId add(Node n) {
    if (nodes_.size() >= max_nodes_)
      throw LimitError("propositional grounding exceeds " +
                       std::to_string(max_nodes_) + " nodes");
    nodes_.push_back(n);
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  std::size_t max_nodes_;
  std::vector<Node> nodes_;
  std::vector<NodeId> children_;
  std::vector<NodeId> scratch_;
};

/// Expands a formula over the finite universe into a propositional formula:
/// quantifiers become finite conjunctions/disjunctions, first-order and
/// equality atoms are evaluated against the structure, second-order atoms
/// become variables of the atom index.
class Grounder {
 public:
  Grounder(const Structure& m, const AtomIndex& index, PropArena& arena)
      : m_(m), index_(index), arena_(arena) {}

  PropArena::NodeId ground(const FormulaPtr& f, const Assignment& a = {}) {
    env_.assign(a.begin(), a.end());
    if (!f) return PropArena::kTrue;
    return run(*f);
  }

 private:
  using NodeId = PropArena::NodeId;

  NodeId run(const Formula& f) {
    using K = Formula::Kind;
    switch (f.kind()) {
      case K::atom: {
        Tuple args;
        args.reserve(f.terms().size());
        for (const auto& t : f.terms()) args.push_back(detail::term_value(t, m_, env_));
        if (auto p = index_.predicate(f.name())) return arena_.var(index_.id(*p, args));
        return m_.holds(f.name(), args) ? PropArena::kTrue : PropArena::kFalse;
      }
      case K::equal:
        return detail::term_value(f.terms()[0], m_, env_) ==
                       detail::term_value(f.terms()[1], m_, env_)
                   ? PropArena::kTrue
                   : PropArena::kFalse;
      case K::negation: return arena_.negation(run(*f.body()));
      case K::conjunction: {
        NodeId a = run(*f.left());
        if (a == PropArena::kFalse) return a;
        return arena_.conjunction(a, run(*f.right()));
      }
      case K::disjunction: {
        NodeId a = run(*f.left());
        if (a == PropArena::kTrue) return a;
        return arena_.disjunction(a, run(*f.right()));
      }
      case K::implication: {
        NodeId a = run(*f.left());
        if (a == PropArena::kFalse) return PropArena::kTrue;
        return arena_.disjunction(arena_.negation(a), run(*f.right()));
      }
      case K::biconditional: {
        NodeId a = run(*f.left());
        NodeId b = run(*f.right());
        NodeId na = arena_.negation(a);
        NodeId nb = arena_.negation(b);
        return arena_.conjunction(arena_.disjunction(na, b),
                                  arena_.disjunction(a, nb));
      }
      case K::forall:
      case K::exists: {
        bool universal = f.kind() == K::forall;
        NodeId absorbing = universal ? PropArena::kFalse : PropArena::kTrue;
        std::vector<NodeId> parts;
        env_.emplace_back(f.name(), 0);
        std::size_t slot = env_.size() - 1;
        for (Element e = 0; e < m_.size(); ++e) {
          env_[slot].second = e;
          NodeId g = run(*f.body());
          if (g == absorbing) {
            env_.pop_back();
            return absorbing;
          }
          parts.push_back(g);
        }
        env_.pop_back();
        return arena_.junction(universal, parts);
      }
    }
    return PropArena::kFalse;
  }

  const Structure& m_;
  const AtomIndex& index_;
  PropArena& arena_;
  std::vector<std::pair<std::string, Element>> env_;
};

}  // namespace hornopt
