// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hornopt/hornopt.hpp"
#include "support.hpp"

using namespace hornopt;
namespace pt = hornopt::proptest;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fs", s);
  return buf;
}

std::vector<GraphInstance> all_three_vertex_digraphs() {
  std::vector<GraphInstance> out;
  for (std::uint64_t mask = 0; mask < 64; ++mask)
    out.push_back(pt::digraph_from_mask(3, mask, 0, 2));
  return out;
}

Outcome maxflow_soundness() {
  auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (const auto& g : all_three_vertex_digraphs()) {
    Encoding e = encode_maxflow_pb(g);
    OptResult r = brute_opt(e.spec, e.structure);
    verify_result(e.spec, e.structure, r);
    if (!r.optimal() || r.value != oracle_max_flow(g)) ++mismatches;
  }
  double s = seconds_since(t0);
  return {mismatches == 0 && s <= 600,
          "64 graphs, mismatches=" + std::to_string(mismatches) + ", " + fmt_seconds(s)};
}

/// A divergence counts as explained when the reduction exceeds the brute
/// optimum and the tuples it accepted, each feasible on its own, cannot all
/// hold in a single feasible interpretation.
bool divergence_explained(const OptSpec& spec, const Structure& m, const ReductionResult& red,
                          std::int64_t brute_value) {
  if (red.value <= brute_value) return false;
  std::vector<FormulaPtr> joint;
  for (const auto& [vertex, tuple] : red.network.tuple_labels) {
    bool accepted = false;
    for (const auto& e : red.network.edges)
      if (e.from == vertex && e.to == red.network.sink) accepted = true;
    if (!accepted) continue;
    FormulaPtr f = spec.local_formula;
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      // Bind each objective variable to its element by an outer equality.
      f = Formula::forall(spec.objective_vars[i],
                          Formula::implication(
                              Formula::equal(Term::variable(spec.objective_vars[i]),
                                             Term::literal(tuple[i])),
                              f));
    }
    joint.push_back(f);
  }
  return !find_feasible(spec, m, {}, joint).has_value();
}

Outcome reduction_equivalence() {
  std::size_t divergences = 0, explained = 0;
  for (const auto& g : all_three_vertex_digraphs()) {
    Encoding e = encode_maxflow_pb(g);
    OptResult brute = brute_opt(e.spec, e.structure);
    ReductionResult red = reduce_opt(e.spec, e.structure);
    check_flow(red.network, red.flow);
    if (red.optimal() != brute.optimal()) {
      ++divergences;
      continue;
    }
    if (brute.optimal() && red.value != brute.value) {
      ++divergences;
      if (divergence_explained(e.spec, e.structure, red, brute.value)) ++explained;
    }
  }
  return {divergences == explained,
          "64 graphs, divergences=" + std::to_string(divergences) +
              ", explained=" + std::to_string(explained)};
}

Outcome shortest_path_soundness() {
  auto t0 = Clock::now();
  std::size_t mismatches = 0, infeasible = 0;
  for (const auto& g : all_three_vertex_digraphs()) {
    Encoding e = encode_shortest_path(g);
    OptResult r = brute_opt(e.spec, e.structure);
    verify_result(e.spec, e.structure, r);
    auto d = oracle_shortest_path(g);
    if (!d) ++infeasible;
    bool agree = d ? r.optimal() && r.value == *d : !r.optimal();
    if (!agree) ++mismatches;
  }
  double s = seconds_since(t0);
  return {mismatches == 0 && s <= 600,
          "64 graphs (" + std::to_string(infeasible) + " unreachable), mismatches=" +
              std::to_string(mismatches) + ", " + fmt_seconds(s)};
}

Outcome matching_soundness() {
  pt::Rng rng(2024);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    GraphInstance g = pt::random_weighted_graph(rng, 4, 3);
    Encoding e = encode_weighted_matching(g);
    OptResult r = weighted_opt(e.spec, e.structure);
    verify_result(e.spec, e.structure, r);
    if (!r.optimal() || r.value != oracle_max_matching(g)) ++mismatches;
  }
  return {mismatches == 0, "200 graphs, mismatches=" + std::to_string(mismatches)};
}

Outcome weight_set_identity() {
  pt::Rng rng(77);
  std::size_t failures = 0, by_definition = 0;
  for (int i = 0; i < 1000; ++i) {
    std::size_t edges = 1 + pt::RandomWorld::pick(rng, 8);
    std::vector<WeightedEdge> matched;
    std::int64_t direct = 0;
    for (std::size_t j = 0; j < edges; ++j) {
      std::int64_t w = 1 + static_cast<std::int64_t>(pt::RandomWorld::pick(rng, 2));
      matched.push_back({{2 * j, 2 * j + 1}, w});
      direct += w;
    }
    WeightSets ws = weight_sets(matched);
    bool ok = weight_of_U(ws) == direct;
    if (edges <= 3) {
      ++by_definition;
      WeightSets defined = weight_sets_by_definition(matched);
      ok = ok && weight_of_U(defined) == direct;
      for (std::size_t k = 1; k <= edges; ++k) ok = ok && defined[k] == ws[k];
    }
    if (!ok) ++failures;
  }
  return {failures == 0, "1000 matchings (" + std::to_string(by_definition) +
                             " via membership formulas), failures=" +
                             std::to_string(failures)};
}

Outcome pnf_cnf_equivalence() {
  pt::RandomWorld w;
  pt::Rng rng(31);
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    std::size_t n = 1 + pt::RandomWorld::pick(rng, 3);
    Structure m = w.structure(rng, n);
    AtomIndex index(w.so_sig, n);
    SecondOrderInterp so = index.interpretation(w.bits(rng, index));
    Assignment a = w.assignment(rng, n);
    FormulaPtr f = w.formula(rng, 4);
    PrenexForm p = to_pnf(f);
    bool ok = evaluate(f, m, so, a) == evaluate(p.to_formula(), m, so, a);
    Assignment full = a;
    for (const auto& v : p.variables())
      full[v] = static_cast<Element>(pt::RandomWorld::pick(rng, n));
    ok = ok && evaluate(p.matrix, m, so, full) ==
                   pt::evaluate_clauses(matrix_to_cnf(p.matrix), m, so, full);
    if (!ok) ++failures;
  }
  return {failures == 0, "1000 formulas, failures=" + std::to_string(failures)};
}

Outcome horn_machinery() {
  pt::RandomWorld w;
  pt::Rng rng(41);
  const std::vector<std::string> prefix{"x", "y", "z"};
  std::size_t fidelity_fail = 0;
  for (int i = 0; i < 500; ++i) {
    std::size_t n = 1 + pt::RandomWorld::pick(rng, 3);
    Structure m = w.structure(rng, n);
    AtomIndex index(w.so_sig, n);
    auto bits = w.bits(rng, index);
    SecondOrderInterp so = index.interpretation(bits);
    FormulaPtr matrix = w.formula(rng, 3, false);
    GroundClauseSet g = ground_to_propositional(matrix_to_cnf(matrix), prefix, m, index);
    FormulaPtr closed = matrix;
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) closed = Formula::forall(*it, closed);
    if (evaluate(closed, m, so) != g.satisfied_by(bits)) ++fidelity_fail;
  }

  std::size_t minimal_fail = 0;
  for (int i = 0; i < 500; ++i) {
    std::size_t vars = 1 + pt::RandomWorld::pick(rng, 15);
    GroundClauseSet g = pt::random_horn_set(rng, vars);
    SatResult r = horn_sat(g);
    std::vector<bool> meet(vars, true);
    bool any = false;
    for (std::uint32_t b = 0; b < (1u << vars); ++b) {
      std::vector<bool> model(vars);
      for (std::size_t v = 0; v < vars; ++v) model[v] = b >> v & 1;
      if (!g.satisfied_by(model)) continue;
      any = true;
      for (std::size_t v = 0; v < vars; ++v) meet[v] = meet[v] && model[v];
    }
    if (r.satisfiable != any || (any && r.model != meet)) ++minimal_fail;
  }

  std::size_t horn_cases = 0, preserve_fail = 0, tries = 0;
  while (horn_cases < 500 && tries < 200000) {
    ++tries;
    std::size_t n = 1 + pt::RandomWorld::pick(rng, 3);
    ClauseSet cs = matrix_to_cnf(w.formula(rng, 3, false));
    if (!horn_check(cs, w.so_sig).horn) continue;
    ++horn_cases;
    Structure m = w.structure(rng, n);
    AtomIndex index(w.so_sig, n);
    if (!ground_to_propositional(cs, prefix, m, index).is_horn()) ++preserve_fail;
  }
  bool pass = fidelity_fail == 0 && minimal_fail == 0 && preserve_fail == 0 && horn_cases == 500;
  return {pass, "fidelity 500 (fail " + std::to_string(fidelity_fail) + "), minimal model 500 (fail " +
                    std::to_string(minimal_fail) + "), Horn preservation " +
                    std::to_string(horn_cases) + " (fail " + std::to_string(preserve_fail) + ")"};
}

Outcome classifier_conformance() {
  Encoding mf = encode_maxflow_pb(pt::digraph_from_mask(3, 0, 0, 2));
  bool horn = true;
  for (const auto& f : mf.spec.feasibility)
    horn = horn && horn_check(matrix_to_cnf(to_pnf(f).matrix), mf.spec.so_signature).horn;
  QuantClass mf_class = classify_prefix(to_pnf(mf.spec.global_formula()));
  QuantClass decision = classify_prefix(to_pnf(shortest_path_decision_formula(2)));
  QuantClass eta5 = classify_prefix(to_pnf(shortest_path_eta5()));
  bool pass = horn && mf_class == QuantClass::pi1 && decision == QuantClass::sigma1 &&
              eta5 != QuantClass::pi1;
  return {pass, std::string("maxflow horn=") + (horn ? "yes" : "no") + " class=" +
                    std::string(to_string(mf_class)) + ", decision class=" + std::string(to_string(decision)) +
                    ", eta5 class=" + std::string(to_string(eta5))};
}

Outcome flow_solver() {
  pt::Rng rng(53);
  std::size_t mismatches = 0, invariant_fail = 0;
  for (int i = 0; i < 500; ++i) {
    std::size_t n = 2 + pt::RandomWorld::pick(rng, 7);
    GraphInstance g = pt::random_digraph(rng, n, 0.35);
    FlowNetwork net = pt::network_of(g);
    FlowResult r = max_flow(net);
    try {
      check_flow(net, r);
    } catch (const InvariantError&) {
      ++invariant_fail;
    }
    if (r.value != oracle_max_flow(g)) ++mismatches;
  }
  return {mismatches == 0 && invariant_fail == 0,
          "500 digraphs, mismatches=" + std::to_string(mismatches) +
              ", invariant failures=" + std::to_string(invariant_fail)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"maxflow encoding matches augmenting paths", maxflow_soundness},
      {"reduction engine matches brute force", reduction_equivalence},
      {"shortest path encoding matches BFS", shortest_path_soundness},
      {"weighted matching matches exhaustive oracle", matching_soundness},
      {"weight-set identity", weight_set_identity},
      {"PNF and CNF preserve semantics", pnf_cnf_equivalence},
      {"grounding and Horn-SAT", horn_machinery},
      {"classifier conformance", classifier_conformance},
      {"flow solver matches oracle", flow_solver},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": "
              << criteria[i].first << " (" << o.detail << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
