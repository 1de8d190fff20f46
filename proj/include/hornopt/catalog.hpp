#pragma once

// Encodings of three graph problems as optimization specs, the B_k weight-set
// machinery for matchings, and classical algorithms used as oracles.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hornopt/error.hpp"
#include "hornopt/logic.hpp"
#include "hornopt/parser.hpp"
#include "hornopt/spec.hpp"

namespace hornopt {

using Edge = std::pair<std::size_t, std::size_t>;

struct GraphInstance {
  std::size_t vertex_count = 0;
  std::vector<Edge> edges;
  std::size_t source = 0;
  std::size_t sink = 0;
  /// Edge weights, parallel to edges, when present.
  std::optional<std::vector<std::int64_t>> weights;

  void validate() const {
    if (vertex_count == 0) throw InputError("graph needs at least one vertex");
    if (source >= vertex_count || sink >= vertex_count)
      throw InputError("source or sink outside the vertex range");
    for (const auto& [u, v] : edges)
      if (u >= vertex_count || v >= vertex_count)
        throw InputError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                         ") references a missing vertex");
    if (weights) {
      if (weights->size() != edges.size())
        throw InputError("every edge needs a weight");
      for (auto w : *weights)
        if (w < 1) throw InputError("edge weights must be positive");
    }
  }
};

struct Encoding {
  OptSpec spec;
  Structure structure;
};

namespace detail {

inline void add_feasible(OptSpec& spec, const std::string& text) {
  spec.feasibility.push_back(parse_formula(text, spec.vocabulary, spec.so_signature));
}

inline void set_objective(OptSpec& spec, std::vector<std::string> vars,
                          const std::string& text) {
  spec.objective_vars = std::move(vars);
  spec.local_formula =
      parse_formula(text, spec.vocabulary, spec.so_signature, spec.objective_vars);
}

inline Structure graph_structure(const GraphInstance& g) {
  Structure m(g.vertex_count);
  m.declare_relation("G", 2);
  for (const auto& [u, v] : g.edges)
    m.add_tuple("G", {static_cast<Element>(u), static_cast<Element>(v)});
  m.bind_constant("s", static_cast<Element>(g.source));
  m.bind_constant("t", static_cast<Element>(g.sink));
  return m;
}

inline Vocabulary graph_vocabulary() {
  Vocabulary v;
  v.add_relation("G", 2);
  v.add_constant("s");
  v.add_constant("t");
  return v;
}

}  // namespace detail

struct MaxflowOptions {
  /// Count the direct s-t edge through `w = t & G(s,w)`.
  bool count_direct_edge = true;
  /// Use the adjacency condition in its implication form (nested universal
  /// in the antecedent) instead of the normalized clause pair.
  bool adjacency_implication_form = false;
};

/// Unit-capacity max flow with a ternary P(x,y,w): x precedes y on the path
/// that leaves the source along (s,w).
inline Encoding encode_maxflow_pb(const GraphInstance& g, MaxflowOptions opt = {}) {
  g.validate();
  OptSpec spec;
  spec.name = "maxflow-pb";
  spec.direction = Direction::maximize;
  spec.vocabulary = detail::graph_vocabulary();
  spec.so_signature = {{"P", 3}};
  detail::set_objective(spec, {"w"},
                        opt.count_direct_edge ? "P(w,t,w) | (w = t & G(s,w))"
                                              : "P(w,t,w)");
  detail::add_feasible(spec, "forall x1. forall x2. forall w. P(x1,x2,w) -> G(s,w)");
  detail::add_feasible(spec,
                       "forall i. forall j. forall w1. forall w2. "
                       "(P(i,j,w1) & P(i,j,w2) & G(i,j)) -> w1 = w2");
  detail::add_feasible(spec, "forall y1. forall y2. !P(y1,y1,y2)");
  detail::add_feasible(spec,
                       "forall u1. forall u2. forall u3. forall w3. "
                       "(P(u1,u2,w3) & P(u2,u3,w3)) -> P(u1,u3,w3)");
  if (opt.adjacency_implication_form)
    detail::add_feasible(spec,
                         "forall z1. forall z2. forall w4. "
                         "(P(z1,z2,w4) & (forall z3. !(P(z1,z3,w4) & P(z3,z2,w4)))) "
                         "-> G(z1,z2)");
  else
    detail::add_feasible(spec,
                         "forall z1. forall z2. forall z3. forall w4. "
                         "(!P(z1,z2,w4) | P(z1,z3,w4) | G(z1,z2)) & "
                         "(!P(z1,z2,w4) | P(z3,z2,w4) | G(z1,z2))");
  spec.validate();
  return {spec, detail::graph_structure(g)};
}

inline constexpr const char* kShortestPathEta[6] = {
    "P(s,t)",
    "forall x. forall y. forall z. (P(x,y) & P(y,z)) -> P(x,z)",
    "forall x. forall y. !P(x,x) & (P(x,y) -> !P(y,x))",
    "forall x. forall y. S(x,y) -> (G(x,y) & P(x,y))",
    "forall x. forall y. P(x,y) -> (S(x,y) | (exists z. P(x,z) & S(z,y)))",
    "forall x. forall y. forall z. (S(x,y) & S(z,y)) -> x = z",
};

/// Unit-weight shortest path: P orders the path, S picks its arcs, and the
/// objective counts S.
inline Encoding encode_shortest_path(const GraphInstance& g) {
  g.validate();
  OptSpec spec;
  spec.name = "shortest-path";
  spec.direction = Direction::minimize;
  spec.vocabulary = detail::graph_vocabulary();
  spec.so_signature = {{"P", 2}, {"S", 2}};
  detail::set_objective(spec, {"p", "q"}, "S(p,q)");
  for (const char* eta : kShortestPathEta) detail::add_feasible(spec, eta);
  spec.validate();
  return {spec, detail::graph_structure(g)};
}

/// The fifth shortest-path condition with its inner existential.
inline FormulaPtr shortest_path_eta5() {
  std::vector<RelationDecl> sig{{"P", 2}, {"S", 2}};
  return parse_formula(kShortestPathEta[4], detail::graph_vocabulary(), sig);
}

/// First-order decision formula: a path s, x1, ..., xk, t in G.
inline std::string shortest_path_decision_text(std::size_t k) {
  if (k == 0) return "G(s,t)";
  std::ostringstream os;
  for (std::size_t i = 1; i <= k; ++i) os << "exists x" << i << ". ";
  os << "G(s,x1)";
  for (std::size_t i = 1; i < k; ++i) os << " & G(x" << i << ",x" << i + 1 << ")";
  os << " & G(x" << k << ",t)";
  return os.str();
}

inline FormulaPtr shortest_path_decision_formula(std::size_t k) {
  return parse_formula(shortest_path_decision_text(k), detail::graph_vocabulary());
}

/// Undirected weighted matching over a mixed universe: vertices first, then
/// one weight element per distinct weight value. Edges are canonicalized to
/// (min, max).
inline Encoding encode_weighted_matching(const GraphInstance& g) {
  g.validate();
  if (!g.weights) throw InputError("weighted matching needs edge weights");
  std::map<Edge, std::int64_t> edges;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    auto [u, v] = g.edges[i];
    if (u == v) throw InputError("matching graphs cannot have self-loops");
    Edge e{std::min(u, v), std::max(u, v)};
    auto [it, fresh] = edges.emplace(e, (*g.weights)[i]);
    if (!fresh)
      throw InputError("duplicate edge (" + std::to_string(e.first) + "," +
                       std::to_string(e.second) + ")");
  }
  std::map<std::int64_t, Element> weight_element;
  for (const auto& [e, w] : edges) weight_element.emplace(w, 0);
  Element next = static_cast<Element>(g.vertex_count);
  for (auto& [w, elem] : weight_element) elem = next++;

  OptSpec spec;
  spec.name = "matching";
  spec.direction = Direction::maximize;
  spec.vocabulary.add_relation("G", 2);
  spec.vocabulary.add_relation("R", 3);
  spec.vocabulary.enable_basic_sort();
  spec.so_signature = {{"U", 2}};
  spec.weight_relation = "R";
  detail::set_objective(spec, {"vi", "vj"}, "U(vi,vj) & C(vi) & C(vj)");
  const std::string tau = "x != vi & x != vj & U(vi,vj)";
  detail::add_feasible(
      spec, "forall vi. forall vj. forall x. (C(vi) & C(vj) & C(x)) -> ("
            "(U(vi,vj) -> G(vi,vj)) & "
            "((" + tau + " & G(x,vi)) -> !U(x,vi)) & "
            "((" + tau + " & G(vi,x)) -> !U(vi,x)) & "
            "((" + tau + " & G(x,vj)) -> !U(x,vj)) & "
            "((" + tau + " & G(vj,x)) -> !U(vj,x)))");
  spec.validate();

  Structure m(next);
  m.declare_relation("G", 2);
  m.declare_relation("R", 3);
  for (const auto& [w, elem] : weight_element) m.set_weight(elem, w);
  for (const auto& [e, w] : edges) {
    auto u = static_cast<Element>(e.first), v = static_cast<Element>(e.second);
    m.add_tuple("G", {u, v});
    m.add_tuple("R", {weight_element.at(w), u, v});
  }
  return {spec, m};
}

/// B_k holds the weight values carried by exactly k edges of U.
struct WeightSets {
  std::map<std::size_t, std::set<std::int64_t>> sets;

  const std::set<std::int64_t>& operator[](std::size_t k) const {
    static const std::set<std::int64_t> empty;
    auto it = sets.find(k);
    return it == sets.end() ? empty : it->second;
  }
};

using WeightedEdge = std::pair<Edge, std::int64_t>;

inline WeightSets weight_sets(const std::vector<WeightedEdge>& matched) {
  std::set<Edge> seen;
  std::map<std::int64_t, std::size_t> multiplicity;
  for (const auto& [e, w] : matched) {
    if (!seen.insert(e).second)
      throw InputError("edge (" + std::to_string(e.first) + "," +
                       std::to_string(e.second) + ") listed twice");
    ++multiplicity[w];
  }
  WeightSets ws;
  for (const auto& [w, k] : multiplicity) ws.sets[k].insert(w);
  return ws;
}

inline std::int64_t weight_of_U(const WeightSets& ws) {
  std::int64_t total = 0;
  for (const auto& [k, values] : ws.sets)
    for (auto z : values) {
      std::int64_t term;
      if (__builtin_mul_overflow(static_cast<std::int64_t>(k), z, &term) ||
          __builtin_add_overflow(total, term, &total))
        throw InputError("weight sum overflows 64-bit integer");
    }
  return total;
}

/// Membership formula for B_k with free variable z, over U (binary) and R
/// (ternary) as first-order relations.
inline std::string weight_set_formula_text(std::size_t k) {
  if (k == 0) throw InputError("B_k is defined for k >= 1");
  std::ostringstream os;
  for (std::size_t i = 1; i <= k; ++i) os << "exists x" << i << ". ";
  for (std::size_t i = 1; i <= k; ++i) os << "exists y" << i << ". ";
  os << "forall u. forall v. ";
  for (std::size_t i = 1; i <= k; ++i)
    os << "U(x" << i << ",y" << i << ") & R(z,x" << i << ",y" << i << ") & ";
  os << "((";
  for (std::size_t i = 1; i <= k; ++i)
    os << "(u != x" << i << " | v != y" << i << ") & ";
  os << "U(u,v)) -> !R(z,u,v))";
  for (std::size_t i = 1; i <= k; ++i)
    for (std::size_t j = i + 1; j <= k; ++j)
      os << " & (x" << i << " != x" << j << " | y" << i << " != y" << j << ")";
  return os.str();
}

/// B_k computed by evaluating the membership formulas on a structure whose
/// universe holds the endpoints followed by one element per weight value.
inline WeightSets weight_sets_by_definition(const std::vector<WeightedEdge>& matched) {
  std::size_t vertices = 0;
  std::set<std::int64_t> values;
  for (const auto& [e, w] : matched) {
    vertices = std::max({vertices, e.first + 1, e.second + 1});
    values.insert(w);
  }
  Structure m(std::max<std::size_t>(1, vertices + values.size()));
  m.declare_relation("U", 2);
  m.declare_relation("R", 3);
  std::map<std::int64_t, Element> elem;
  Element next = static_cast<Element>(vertices);
  for (auto w : values) {
    elem[w] = next;
    m.set_weight(next++, w);
  }
  for (const auto& [e, w] : matched) {
    auto u = static_cast<Element>(e.first), v = static_cast<Element>(e.second);
    m.add_tuple("U", {u, v});
    m.add_tuple("R", {elem[w], u, v});
  }
  Vocabulary vocab;
  vocab.add_relation("U", 2);
  vocab.add_relation("R", 3);
  const std::vector<std::string> free{"z"};
  WeightSets ws;
  for (std::size_t k = 1; k <= matched.size(); ++k) {
    FormulaPtr f = parse_formula(weight_set_formula_text(k), vocab, {}, free);
    for (const auto& [w, z] : elem)
      if (evaluate(f, m, Assignment{{"z", z}})) ws.sets[k].insert(w);
  }
  return ws;
}

/// Maximum number of edge-disjoint s-t paths: depth-first augmentation on a
/// capacity matrix.
inline std::int64_t oracle_max_flow(const GraphInstance& g) {
  g.validate();
  const std::size_t n = g.vertex_count;
  if (g.source == g.sink) throw InputError("source and sink coincide");
  std::vector<std::vector<std::int64_t>> cap(n, std::vector<std::int64_t>(n, 0));
  for (const auto& [u, v] : g.edges)
    if (u != v) ++cap[u][v];
  std::vector<bool> seen;
  std::function<bool(std::size_t)> dfs = [&](std::size_t u) {
    if (u == g.sink) return true;
    seen[u] = true;
    for (std::size_t v = 0; v < n; ++v)
      if (cap[u][v] > 0 && !seen[v] && dfs(v)) {
        --cap[u][v];
        ++cap[v][u];
        return true;
      }
    return false;
  };
  std::int64_t flow = 0;
  for (;;) {
    seen.assign(n, false);
    if (!dfs(g.source)) return flow;
    ++flow;
  }
}

/// Fewest arcs on an s-t path, by breadth-first search.
inline std::optional<std::int64_t> oracle_shortest_path(const GraphInstance& g) {
  g.validate();
  std::vector<std::vector<std::size_t>> adj(g.vertex_count);
  for (const auto& [u, v] : g.edges) adj[u].push_back(v);
  std::vector<std::int64_t> dist(g.vertex_count, -1);
  std::queue<std::size_t> q;
  dist[g.source] = 0;
  q.push(g.source);
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
  }
  if (dist[g.sink] < 0) return std::nullopt;
  return dist[g.sink];
}

/// Maximum-weight matching by exhaustive enumeration of matchings.
inline std::int64_t oracle_max_matching(const GraphInstance& g) {
  g.validate();
  if (!g.weights) throw InputError("matching oracle needs edge weights");
  if (g.vertex_count > 16)
    throw InputError("matching oracle is limited to 16 vertices");
  const auto& w = *g.weights;
  std::int64_t best = 0;
  std::function<void(std::size_t, std::uint32_t, std::int64_t)> go =
      [&](std::size_t i, std::uint32_t used, std::int64_t total) {
        if (i == g.edges.size()) {
          best = std::max(best, total);
          return;
        }
        go(i + 1, used, total);
        auto [u, v] = g.edges[i];
        std::uint32_t mask = (1u << u) | (1u << v);
        if (u != v && !(used & mask)) go(i + 1, used | mask, total + w[i]);
      };
  go(0, 0, 0);
  return best;
}

}  // namespace hornopt
