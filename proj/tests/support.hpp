#pragma once

// Random formulas, structures and interpretations for property tests.

#include <random>
#include <string>
#include <vector>

#include "hornopt/hornopt.hpp"

namespace hornopt::proptest {

using Rng = std::mt19937_64;

/// A(1), B(2), constant c; second-order S(1), T(2); variables x, y, z.
struct RandomWorld {
  Vocabulary vocab;
  std::vector<RelationDecl> so_sig{{"S", 1}, {"T", 2}};
  std::vector<std::string> vars{"x", "y", "z"};

  RandomWorld() {
    vocab.add_relation("A", 1);
    vocab.add_relation("B", 2);
    vocab.add_constant("c");
  }

  static std::size_t pick(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  }

  Term term(Rng& rng, bool allow_constant = true) const {
    if (allow_constant && pick(rng, 5) == 0) return Term::constant("c");
    return Term::variable(vars[pick(rng, vars.size())]);
  }

  FormulaPtr atom(Rng& rng, bool allow_constant = true) const {
    switch (pick(rng, 6)) {
      case 0: return Formula::atom("A", {term(rng, allow_constant)});
      case 1: return Formula::atom("B", {term(rng, allow_constant), term(rng, allow_constant)});
      case 2:
      case 3: return Formula::atom("S", {term(rng, allow_constant)});
      case 4: return Formula::atom("T", {term(rng, allow_constant), term(rng, allow_constant)});
      default: return Formula::equal(term(rng, allow_constant), term(rng, allow_constant));
    }
  }

  /// Random formula; quantifiers rebind x, y or z freely.
  FormulaPtr formula(Rng& rng, int depth, bool quantifiers = true) const {
    if (depth <= 0 || pick(rng, 4) == 0) return atom(rng);
    const std::size_t choices = quantifiers ? 7 : 5;
    switch (pick(rng, choices)) {
      case 0: return Formula::negation(formula(rng, depth - 1, quantifiers));
      case 1: return Formula::conjunction(formula(rng, depth - 1, quantifiers),
                                          formula(rng, depth - 1, quantifiers));
      case 2: return Formula::disjunction(formula(rng, depth - 1, quantifiers),
                                          formula(rng, depth - 1, quantifiers));
      case 3: return Formula::implication(formula(rng, depth - 1, quantifiers),
                                          formula(rng, depth - 1, quantifiers));
      case 4: return Formula::biconditional(formula(rng, depth - 1, quantifiers),
                                            formula(rng, depth - 1, quantifiers));
      case 5: return Formula::forall(vars[pick(rng, 3)], formula(rng, depth - 1, quantifiers));
      default: return Formula::exists(vars[pick(rng, 3)], formula(rng, depth - 1, quantifiers));
    }
  }

  Structure structure(Rng& rng, std::size_t n) const {
    Structure m(n);
    m.declare_relation("A", 1);
    m.declare_relation("B", 2);
    std::bernoulli_distribution coin(0.5);
    for (Element a = 0; a < n; ++a) {
      if (coin(rng)) m.add_tuple("A", {a});
      for (Element b = 0; b < n; ++b)
        if (coin(rng)) m.add_tuple("B", {a, b});
    }
    m.bind_constant("c", static_cast<Element>(pick(rng, n)));
    return m;
  }

  std::vector<bool> bits(Rng& rng, const AtomIndex& index) const {
    std::bernoulli_distribution coin(0.5);
    std::vector<bool> b(index.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = coin(rng);
    return b;
  }

  Assignment assignment(Rng& rng, std::size_t n) const {
    Assignment a;
    for (const auto& v : vars) a[v] = static_cast<Element>(pick(rng, n));
    return a;
  }
};

inline FormulaPtr clause_formula(const Clause& c) {
  FormulaPtr f;
  for (const auto& l : c.literals) {
    FormulaPtr lit = l.positive ? l.atom : Formula::negation(l.atom);
    f = f ? Formula::disjunction(f, lit) : lit;
  }
  // The empty clause is false.
  return f ? f : Formula::negation(Formula::equal(Term::literal(0), Term::literal(0)));
}

inline bool evaluate_clauses(const ClauseSet& cs, const Structure& m,
                             const SecondOrderInterp& so, const Assignment& a) {
  for (const auto& c : cs.clauses)
    if (!evaluate(clause_formula(c), m, so, a)) return false;
  return true;
}

/// Random Horn clause set over `vars` propositional variables.
inline GroundClauseSet random_horn_set(Rng& rng, std::size_t vars) {
  GroundClauseSet g;
  g.num_vars = vars;
  std::size_t clauses = RandomWorld::pick(rng, 3 * vars + 1);
  for (std::size_t i = 0; i < clauses; ++i) {
    GroundClause c;
    std::size_t negatives = RandomWorld::pick(rng, 4);
    for (std::size_t j = 0; j < negatives; ++j)
      c.push_back({static_cast<Var>(RandomWorld::pick(rng, vars)), false});
    if (RandomWorld::pick(rng, 3) != 0)
      c.push_back({static_cast<Var>(RandomWorld::pick(rng, vars)), true});
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    bool tautology = false;
    for (std::size_t j = 0; j + 1 < c.size(); ++j)
      if (c[j].var == c[j + 1].var) tautology = true;
    if (!tautology) g.clauses.push_back(c);
  }
  return g;
}

/// Digraph on n vertices from the bits of mask over the n(n-1) ordered pairs.
inline GraphInstance digraph_from_mask(std::size_t n, std::uint64_t mask,
                                       std::size_t source, std::size_t sink) {
  GraphInstance g;
  g.vertex_count = n;
  g.source = source;
  g.sink = sink;
  std::size_t bit = 0;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      if (mask >> bit & 1) g.edges.push_back({u, v});
      ++bit;
    }
  return g;
}

inline GraphInstance random_digraph(Rng& rng, std::size_t n, double density) {
  GraphInstance g;
  g.vertex_count = n;
  g.source = 0;
  g.sink = n - 1;
  std::bernoulli_distribution coin(density);
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (u != v && coin(rng)) g.edges.push_back({u, v});
  return g;
}

inline GraphInstance random_weighted_graph(Rng& rng, std::size_t max_vertices,
                                           std::int64_t max_weight) {
  GraphInstance g;
  g.vertex_count = 1 + RandomWorld::pick(rng, max_vertices);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::int64_t> weight(1, max_weight);
  std::vector<std::int64_t> ws;
  for (std::size_t u = 0; u < g.vertex_count; ++u)
    for (std::size_t v = u + 1; v < g.vertex_count; ++v)
      if (coin(rng)) {
        g.edges.push_back({u, v});
        ws.push_back(weight(rng));
      }
  g.weights = ws;
  return g;
}

/// Flow network from a digraph, unit capacities.
inline FlowNetwork network_of(const GraphInstance& g) {
  FlowNetwork net;
  net.vertex_count = g.vertex_count;
  net.source = g.source;
  net.sink = g.sink;
  for (const auto& [u, v] : g.edges) net.edges.push_back({u, v, 1});
  return net;
}

}  // namespace hornopt::proptest
