#include <gtest/gtest.h>

#include <queue>

#include "hornopt/hornopt.hpp"
#include "support.hpp"

using namespace hornopt;

namespace {

FlowNetwork diamond() {
  FlowNetwork net;
  net.vertex_count = 4;
  net.source = 0;
  net.sink = 3;
  net.edges = {{0, 1, 1}, {0, 2, 1}, {1, 3, 1}, {2, 3, 1}};
  return net;
}

/// Capacity of the cut left by the residual reachability of the source.
std::int64_t residual_cut(const FlowNetwork& net, const FlowResult& r) {
  std::vector<std::vector<std::size_t>> out(net.vertex_count), in(net.vertex_count);
  for (std::size_t i = 0; i < net.edges.size(); ++i) {
    out[net.edges[i].from].push_back(i);
    in[net.edges[i].to].push_back(i);
  }
  std::vector<bool> seen(net.vertex_count);
  std::queue<std::size_t> q;
  q.push(net.source);
  seen[net.source] = true;
  while (!q.empty()) {
    std::size_t u = q.front();
    q.pop();
    for (std::size_t i : out[u])
      if (r.edge_flow[i] < net.edges[i].capacity && !seen[net.edges[i].to]) {
        seen[net.edges[i].to] = true;
        q.push(net.edges[i].to);
      }
    for (std::size_t i : in[u])
      if (r.edge_flow[i] > 0 && !seen[net.edges[i].from]) {
        seen[net.edges[i].from] = true;
        q.push(net.edges[i].from);
      }
  }
  EXPECT_FALSE(seen[net.sink]);
  std::int64_t cut = 0;
  for (const auto& e : net.edges)
    if (seen[e.from] && !seen[e.to]) cut += e.capacity;
  return cut;
}

OptSpec unary_spec(const std::string& feasible) {
  return parse_spec("problem u\ndirection max\nso S 1\nobjective w : S(w)\n" + feasible);
}

}  // namespace

TEST(MaxFlow, Examples) {
  FlowNetwork d = diamond();
  FlowResult r = max_flow(d);
  EXPECT_EQ(r.value, 2);
  ASSERT_EQ(r.paths.size(), 2u);
  check_flow(d, r);

  FlowNetwork split;
  split.vertex_count = 4;
  split.source = 0;
  split.sink = 3;
  split.edges = {{0, 1, 1}, {2, 3, 1}};
  EXPECT_EQ(max_flow(split).value, 0);

  FlowNetwork chain;
  chain.vertex_count = 3;
  chain.source = 0;
  chain.sink = 2;
  chain.edges = {{0, 1, 1}, {1, 2, 1}};
  FlowResult c = max_flow(chain);
  EXPECT_EQ(c.value, 1);
  EXPECT_EQ(c.paths, (std::vector<std::vector<std::size_t>>{{0, 1, 2}}));
}

TEST(MaxFlow, ParallelEdgesAndCapacities) {
  FlowNetwork net;
  net.vertex_count = 3;
  net.source = 0;
  net.sink = 2;
  net.edges = {{0, 1, 1}, {0, 1, 1}, {1, 2, 5}};
  FlowResult r = max_flow(net);
  EXPECT_EQ(r.value, 2);
  check_flow(net, r);
}

TEST(MaxFlow, Validation) {
  FlowNetwork bad = diamond();
  bad.edges.push_back({1, 1, 1});
  EXPECT_THROW(max_flow(bad), InputError);
  bad = diamond();
  bad.edges.push_back({0, 9, 1});
  EXPECT_THROW(emit_dimacs(bad), InputError);
  bad = diamond();
  bad.sink = bad.source;
  EXPECT_THROW(max_flow(bad), InputError);
}

TEST(CheckFlow, RejectsBrokenFlows) {
  FlowNetwork d = diamond();
  FlowResult r = max_flow(d);
  FlowResult over = r;
  over.edge_flow[0] = 2;
  EXPECT_THROW(check_flow(d, over), InvariantError);
  FlowResult leak = r;
  leak.edge_flow[2] = 0;
  EXPECT_THROW(check_flow(d, leak), InvariantError);
  FlowResult wrong = r;
  wrong.value = 1;
  EXPECT_THROW(check_flow(d, wrong), InvariantError);
  FlowResult shared = r;
  shared.paths = {{0, 1, 3}, {0, 1, 3}};
  EXPECT_THROW(check_flow(d, shared), InvariantError);
}

TEST(Dimacs, Format) {
  EXPECT_EQ(emit_dimacs(diamond()),
            "p max 4 4\nn 1 s\nn 4 t\na 1 2 1\na 1 3 1\na 2 4 1\na 3 4 1\n");
  FlowNetwork empty;
  EXPECT_EQ(emit_dimacs(empty), "p max 2 0\nn 1 s\nn 2 t\n");
  FlowNetwork shuffled = diamond();
  std::reverse(shuffled.edges.begin(), shuffled.edges.end());
  EXPECT_EQ(emit_dimacs(shuffled), emit_dimacs(diamond()));
}

TEST(Reduction, StarNetworkUnary) {
  OptSpec spec = unary_spec("");
  Structure m(2);
  FlowNetwork net = compile_reduction(spec, m, default_oracle(spec, m));
  EXPECT_EQ(net.vertex_count, 4u);
  EXPECT_EQ(net.edges, (std::vector<FlowEdge>{{0, 1, 1}, {0, 2, 1}, {1, 3, 1}, {2, 3, 1}}));
  EXPECT_EQ(net.tuple_labels.at(2), (Tuple{1}));
  EXPECT_EQ(max_flow(net).value, 2);
}

TEST(Reduction, StarNetworkBinarySkipsInfeasibleTuples) {
  OptSpec spec = parse_spec(
      "problem b\ndirection max\nrel E 2\nso T 2\nobjective a b : T(a,b)\n"
      "feasible forall x. forall y. T(x,y) -> E(x,y)\n");
  Structure m(2);
  m.declare_relation("E", 2);
  m.add_tuple("E", {0, 1});
  m.add_tuple("E", {1, 0});
  m.add_tuple("E", {1, 1});
  FlowNetwork net = compile_reduction(spec, m, default_oracle(spec, m));
  EXPECT_EQ(net.vertex_count, 6u);
  EXPECT_EQ(net.edges.size(), 7u);
  for (const auto& e : net.edges) EXPECT_NE(e.from, 1u) << "tuple (0,0) edge";
  ReductionResult r = reduce_opt(spec, m);
  EXPECT_EQ(r.value, 3);
  EXPECT_EQ(r.value, brute_opt(spec, m).value);
}

TEST(Reduction, CustomOracleAndWorkers) {
  OptSpec spec = unary_spec("");
  Structure m(5);
  auto even = [](const Tuple& t) { return t[0] % 2 == 0; };
  ReductionOptions opt;
  opt.workers = 4;
  FlowNetwork a = compile_reduction(spec, m, even);
  FlowNetwork b = compile_reduction(spec, m, even, opt);
  EXPECT_EQ(a.edges, b.edges);
  EXPECT_EQ(max_flow(a).value, 3);
}

TEST(Reduction, Rejections) {
  OptSpec min_spec = parse_spec("problem m\ndirection min\nso S 1\nobjective w : S(w)\n");
  Structure m(2);
  EXPECT_THROW(compile_reduction(min_spec, m, [](const Tuple&) { return true; }),
               InputError);
  EXPECT_THROW(reduce_opt(min_spec, m), InputError);

  OptSpec spec = unary_spec("");
  ReductionOptions small;
  small.max_vertices = 3;
  EXPECT_THROW(compile_reduction(spec, m, default_oracle(spec, m), small), LimitError);
}

TEST(Reduction, InfeasibleGlobalFormula) {
  OptSpec none = unary_spec("feasible forall x. S(x)\nfeasible forall x. !S(x)\n");
  EXPECT_FALSE(reduce_opt(none, Structure(2)).optimal());
  EXPECT_FALSE(brute_opt(none, Structure(2)).optimal());
}

TEST(Reduction, NonHornSpecUsesSearchOracle) {
  OptSpec spec = unary_spec("feasible exists x. S(x)\n");
  Structure m(3);
  ReductionResult r = reduce_opt(spec, m);
  EXPECT_EQ(r.value, 3);
  EXPECT_EQ(brute_opt(spec, m).value, 3);
}

TEST(Reduction, DivergesWhenTuplesConflict) {
  // Each tuple alone is feasible, but no interpretation selects two.
  OptSpec spec = unary_spec("feasible forall x. forall y. (S(x) & S(y)) -> x = y\n");
  Structure m(3);
  EXPECT_EQ(brute_opt(spec, m).value, 1);
  EXPECT_EQ(reduce_opt(spec, m).value, 3);
}

TEST(MaxFlowProperty, AgreesWithOracleAndCut) {
  proptest::Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    std::size_t n = 2 + proptest::RandomWorld::pick(rng, 7);
    GraphInstance g = proptest::random_digraph(rng, n, 0.35);
    FlowNetwork net = proptest::network_of(g);
    FlowResult r = max_flow(net);
    check_flow(net, r);
    EXPECT_EQ(r.value, oracle_max_flow(g));
    EXPECT_EQ(r.value, residual_cut(net, r));

    for (auto& e : net.edges)
      e.capacity = 1 + static_cast<std::int64_t>(proptest::RandomWorld::pick(rng, 5));
    FlowResult w = max_flow(net);
    check_flow(net, w);
    EXPECT_EQ(w.value, residual_cut(net, w));
  }
}
