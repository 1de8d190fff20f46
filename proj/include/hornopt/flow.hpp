#pragma once

// Flow networks, the star reduction from counting specs, an Edmonds-Karp
// solver and DIMACS output.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "hornopt/analysis.hpp"
#include "hornopt/error.hpp"
#include "hornopt/grounding.hpp"
#include "hornopt/logic.hpp"
#include "hornopt/search.hpp"
#include "hornopt/spec.hpp"

namespace hornopt {

struct FlowEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::int64_t capacity = 1;

  friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
};

struct FlowNetwork {
  std::size_t vertex_count = 2;
  std::vector<FlowEdge> edges;
  std::size_t source = 0;
  std::size_t sink = 1;
  /// Intermediate vertex -> objective tuple it stands for.
  std::map<std::size_t, Tuple> tuple_labels;

  void validate() const {
    if (source >= vertex_count || sink >= vertex_count)
      throw InputError("source or sink outside the vertex range");
    if (source == sink) throw InputError("source and sink coincide");
    for (const auto& e : edges) {
      if (e.from >= vertex_count || e.to >= vertex_count)
        throw InputError("edge endpoint outside the vertex range");
      if (e.from == e.to)
        throw InputError("self-loop at vertex " + std::to_string(e.from));
      if (e.capacity < 1) throw InputError("edge capacity must be at least 1");
    }
  }

  bool unit_capacity() const {
    return std::all_of(edges.begin(), edges.end(),
                       [](const FlowEdge& e) { return e.capacity == 1; });
  }
};

struct FlowResult {
  std::int64_t value = 0;
  /// Flow on each edge, parallel to FlowNetwork::edges.
  std::vector<std::int64_t> edge_flow;
  /// Edge-disjoint source-sink paths as vertex sequences (unit mode only).
  std::vector<std::vector<std::size_t>> paths;
};

namespace detail {

class Residual {
 public:
  explicit Residual(const FlowNetwork& net) : adj_(net.vertex_count) {
    for (const auto& e : net.edges) {
      adj_[e.from].push_back(arcs_.size());
      arcs_.push_back({e.to, e.capacity});
      adj_[e.to].push_back(arcs_.size());
      arcs_.push_back({e.from, 0});
    }
  }

  /// One shortest augmenting path; returns the amount pushed.
  std::int64_t augment(std::size_t s, std::size_t t) {
    std::vector<std::size_t> via(adj_.size(), SIZE_MAX);
    std::vector<bool> seen(adj_.size(), false);
    std::queue<std::size_t> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty() && !seen[t]) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t a : adj_[u]) {
        const Arc& arc = arcs_[a];
        if (arc.residual > 0 && !seen[arc.to]) {
          seen[arc.to] = true;
          via[arc.to] = a;
          q.push(arc.to);
        }
      }
    }
    if (!seen[t]) return 0;
    std::int64_t push = std::numeric_limits<std::int64_t>::max();
    for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to)
      push = std::min(push, arcs_[via[v]].residual);
    for (std::size_t v = t; v != s; v = arcs_[via[v] ^ 1].to) {
      arcs_[via[v]].residual -= push;
      arcs_[via[v] ^ 1].residual += push;
    }
    return push;
  }

  /// Flow on original edge i (the reverse arc's residual).
  std::int64_t flow(std::size_t i) const { return arcs_[2 * i + 1].residual; }

 private:
  struct Arc {
    std::size_t to;
    std::int64_t residual;
  };
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Arc> arcs_;
};

inline std::vector<std::vector<std::size_t>> decompose_paths(
    const FlowNetwork& net, const std::vector<std::int64_t>& flow) {
  std::vector<std::vector<std::size_t>> out_edges(net.vertex_count);
  for (std::size_t i = 0; i < net.edges.size(); ++i)
    if (flow[i] > 0) out_edges[net.edges[i].from].push_back(i);
  std::vector<std::size_t> cursor(net.vertex_count, 0);
  std::vector<std::vector<std::size_t>> paths;
  auto take = [&](std::size_t v) -> std::optional<std::size_t> {
    if (cursor[v] >= out_edges[v].size()) return std::nullopt;
    return out_edges[v][cursor[v]++];
  };
  while (auto first = take(net.source)) {
    std::vector<std::size_t> path{net.source};
    std::size_t v = net.edges[*first].to;
    path.push_back(v);
    while (v != net.sink) {
      auto e = take(v);
      if (!e) throw InvariantError("flow decomposition stalled at vertex " +
                                   std::to_string(v));
      v = net.edges[*e].to;
      path.push_back(v);
    }
    // Cycles in the flow are cut out of the walk.
    std::vector<std::size_t> simple;
    std::vector<std::size_t> where(net.vertex_count, SIZE_MAX);
    for (std::size_t u : path) {
      if (where[u] != SIZE_MAX) {
        for (std::size_t i = where[u] + 1; i < simple.size(); ++i)
          where[simple[i]] = SIZE_MAX;
        simple.resize(where[u] + 1);
      } else {
        where[u] = simple.size();
        simple.push_back(u);
      }
    }
    paths.push_back(std::move(simple));
  }
  return paths;
}

}  // namespace detail

/// Maximum source-sink flow by shortest augmenting paths.
inline FlowResult max_flow(const FlowNetwork& net) {
  net.validate();
  detail::Residual r(net);
  FlowResult out;
  while (std::int64_t pushed = r.augment(net.source, net.sink)) {
    if (__builtin_add_overflow(out.value, pushed, &out.value))
      throw LimitError("flow value overflows 64-bit integer");
  }
  out.edge_flow.resize(net.edges.size());
  for (std::size_t i = 0; i < net.edges.size(); ++i) out.edge_flow[i] = r.flow(i);
  if (net.unit_capacity()) out.paths = detail::decompose_paths(net, out.edge_flow);
  return out;
}

/// Capacity, conservation and value checks; throws InvariantError.
inline void check_flow(const FlowNetwork& net, const FlowResult& r) {
  if (r.edge_flow.size() != net.edges.size())
    throw InvariantError("edge flow count differs from edge count");
  std::vector<std::int64_t> balance(net.vertex_count, 0);
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    const auto& e = net.edges[i];
    if (r.edge_flow[i] < 0 || r.edge_flow[i] > e.capacity)
      throw InvariantError("flow on edge " + std::to_string(i) +
                           " violates its capacity");
    balance[e.from] -= r.edge_flow[i];
    balance[e.to] += r.edge_flow[i];
  }
  for (std::size_t v = 0; v < net.vertex_count; ++v)
    if (v != net.source && v != net.sink && balance[v] != 0)
      throw InvariantError("flow not conserved at vertex " + std::to_string(v));
  if (-balance[net.source] != r.value)
    throw InvariantError("flow value differs from net source outflow");
  if (!net.unit_capacity()) return;
  if (static_cast<std::int64_t>(r.paths.size()) != r.value)
    throw InvariantError("path count differs from flow value");
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> available;
  for (const auto& e : net.edges) available[{e.from, e.to}] += e.capacity;
  for (const auto& p : r.paths) {
    if (p.size() < 2 || p.front() != net.source || p.back() != net.sink)
      throw InvariantError("path does not run from source to sink");
    for (std::size_t i = 0; i + 1 < p.size(); ++i)
      if (--available[{p[i], p[i + 1]}] < 0)
        throw InvariantError("paths are not edge-disjoint");
  }
}

/// DIMACS max-flow text; vertices 1-based, arcs sorted by endpoints.
inline std::string emit_dimacs(const FlowNetwork& net) {
  net.validate();
  std::vector<FlowEdge> edges = net.edges;
  std::stable_sort(edges.begin(), edges.end(), [](const FlowEdge& a, const FlowEdge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  std::ostringstream os;
  os << "p max " << net.vertex_count << ' ' << edges.size() << '\n';
  os << "n " << net.source + 1 << " s\n";
  os << "n " << net.sink + 1 << " t\n";
  for (const auto& e : edges)
    os << "a " << e.from + 1 << ' ' << e.to + 1 << ' ' << e.capacity << '\n';
  return os.str();
}

/// Decides, for one objective tuple, whether some interpretation satisfies
/// the global formula together with the local formula at that tuple.
using TupleFeasibilityOracle = std::function<bool(const Tuple&)>;

namespace detail {

struct HornPart {
  std::vector<std::string> prefix;
  ClauseSet matrix;
};

/// A Horn route exists when every formula is universal in prenex form and its
/// matrix passes the Horn check. Each formula is grounded over its own prefix.
using HornRoute = std::vector<HornPart>;

inline std::optional<HornRoute> horn_route(std::span<const FormulaPtr> formulas,
                                           std::span<const RelationDecl> sig) {
  HornRoute route;
  for (const auto& f : formulas) {
    if (!f) continue;
    PrenexForm p = to_pnf(f);
    HornPart part;
    for (const auto& b : p.prefix) {
      if (b.quantifier != Quantifier::forall) return std::nullopt;
      part.prefix.push_back(b.variable);
    }
    part.matrix = matrix_to_cnf(p.matrix);
    if (!horn_check(part.matrix, sig).horn) return std::nullopt;
    route.push_back(std::move(part));
  }
  return route;
}

inline void ground_route(const HornRoute& route, const Structure& m,
                         const AtomIndex& index, const Assignment& fixed,
                         GroundClauseSet& out) {
  out.num_vars = index.size();
  for (const auto& part : route) {
    GroundClauseSet g =
        ground_to_propositional(part.matrix, part.prefix, m, index, fixed);
    out.clauses.insert(out.clauses.end(), std::make_move_iterator(g.clauses.begin()),
                       std::make_move_iterator(g.clauses.end()));
  }
}

}  // namespace detail

/// The default oracle. Universal Horn specs are decided by grounding and
/// unit propagation; anything else by a first-feasible search with the local
/// formula added as a constraint.
inline TupleFeasibilityOracle default_oracle(const OptSpec& spec,
                                             const Structure& structure,
                                             const SearchLimits& limits = {}) {
  auto m = std::make_shared<Structure>(structure);
  m->conform_to(spec.vocabulary);
  auto global = detail::horn_route(spec.feasibility, spec.so_signature);
  auto local = detail::horn_route(std::span(&spec.local_formula, 1), spec.so_signature);
  if (global && local) {
    auto index = std::make_shared<AtomIndex>(spec.so_signature, m->size());
    auto base = std::make_shared<GroundClauseSet>();
    detail::ground_route(*global, *m, *index, {}, *base);
    auto route = std::make_shared<detail::HornRoute>(std::move(*local));
    auto vars = spec.objective_vars;
    return [m, index, base, route, vars](const Tuple& t) {
      Assignment a;
      for (std::size_t i = 0; i < vars.size(); ++i) a[vars[i]] = t[i];
      GroundClauseSet g = *base;
      detail::ground_route(*route, *m, *index, a, g);
      return horn_sat(g).satisfiable;
    };
  }
  auto spec_copy = std::make_shared<OptSpec>(spec);
  return [spec_copy, m, limits](const Tuple& t) {
    Assignment a;
    for (std::size_t i = 0; i < spec_copy->objective_vars.size(); ++i)
      a[spec_copy->objective_vars[i]] = t[i];
    FormulaPtr extra[] = {spec_copy->local_formula};
    return find_feasible(*spec_copy, *m, limits, extra, a).has_value();
  };
}

/// Does some interpretation satisfy the global formula? Unit propagation for
/// universal Horn formulas, search otherwise.
inline bool globally_feasible(const OptSpec& spec, const Structure& structure,
                              const SearchLimits& limits = {}) {
  if (auto route = detail::horn_route(spec.feasibility, spec.so_signature)) {
    Structure m = structure;
    m.conform_to(spec.vocabulary);
    AtomIndex index(spec.so_signature, m.size());
    GroundClauseSet g;
    detail::ground_route(*route, m, index, {}, g);
    return horn_sat(g).satisfiable;
  }
  return find_feasible(spec, structure, limits).has_value();
}

struct ReductionOptions {
  std::uint64_t max_vertices = 1u << 22;
  unsigned workers = 1;
};

/// The star network: source 0, tuple i at vertex i+1, sink n^k+1. Every tuple
/// gets an edge from the source; it gets an edge to the sink when the oracle
/// accepts it.
inline FlowNetwork compile_reduction(const OptSpec& spec, const Structure& m,
                                     const TupleFeasibilityOracle& feasible,
                                     const ReductionOptions& opt = {}) {
  if (spec.direction != Direction::maximize)
    throw InputError("the flow reduction applies to maximization specs only");
  const std::size_t k = spec.objective_arity();
  auto count = tuple_count(m.size(), k);
  if (!count || *count > opt.max_vertices || *count + 2 > opt.max_vertices)
    throw LimitError("reduction needs n^k + 2 = " +
                     (count ? std::to_string(*count + 2) : std::string(">2^64")) +
                     " vertices, limit " + std::to_string(opt.max_vertices));
  const std::size_t tuples = static_cast<std::size_t>(*count);

  std::vector<std::uint8_t> accepted(tuples, 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&] {
    try {
      for (std::size_t i; (i = next.fetch_add(1)) < tuples;)
        accepted[i] = feasible(tuple_unrank(i, k, m.size())) ? 1 : 0;
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!error) error = std::current_exception();
      next = tuples;
    }
  };
  unsigned workers = std::max(1u, opt.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  FlowNetwork net;
  net.vertex_count = tuples + 2;
  net.source = 0;
  net.sink = tuples + 1;
  for (std::size_t i = 0; i < tuples; ++i) {
    net.tuple_labels[i + 1] = tuple_unrank(i, k, m.size());
    net.edges.push_back({0, i + 1, 1});
  }
  for (std::size_t i = 0; i < tuples; ++i)
    if (accepted[i]) net.edges.push_back({i + 1, net.sink, 1});
  return net;
}

struct ReductionResult {
  OptResult::Status status = OptResult::Status::infeasible;
  std::int64_t value = 0;
  FlowNetwork network;
  FlowResult flow;

  bool optimal() const noexcept { return status == OptResult::Status::optimal; }
};

/// The reduction engine: infeasible when no interpretation satisfies the
/// global formula, otherwise the max flow of the compiled star network.
inline ReductionResult reduce_opt(const OptSpec& spec, const Structure& m,
                                  const SearchLimits& limits = {},
                                  const ReductionOptions& opt = {}) {
  if (spec.direction != Direction::maximize)
    throw InputError("the reduction engine applies to maximization specs only");
  ReductionResult out;
  if (!globally_feasible(spec, m, limits)) return out;
  out.network = compile_reduction(spec, m, default_oracle(spec, m, limits), opt);
  out.flow = max_flow(out.network);
  out.value = out.flow.value;
  out.status = OptResult::Status::optimal;
  return out;
}

}  // namespace hornopt
