#pragma once

// Command-line front end. Results go to `out` as key=value lines;
// diagnostics go to `err`.
//
// Exit codes: 0 success, 2 input or usage error, 3 resource limit,
// 4 internal invariant violation.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hornopt/hornopt.hpp"

namespace hornopt::cli {

enum ExitCode : int { kOk = 0, kInput = 2, kLimit = 3, kInvariant = 4 };

/// Accepts a decimal count or a power of two written as 2^K.
inline std::uint64_t parse_limit(const std::string& text) {
  auto number = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw InputError("invalid limit '" + text + "'");
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw InputError("limit '" + text + "' out of range");
    }
  };
  std::uint64_t v;
  if (auto caret = text.find('^'); caret != std::string::npos) {
    if (text.substr(0, caret) != "2") throw InputError("limit base must be 2");
    std::uint64_t e = number(text.substr(caret + 1));
    if (e > 63) throw InputError("limit exponent must be at most 63");
    v = std::uint64_t{1} << e;
  } else {
    v = number(text);
  }
  if (v == 0) throw InputError("limit must be positive");
  return v;
}

struct GraphFlags {
  std::optional<std::size_t> vertices;
  std::size_t source = 0;
  std::optional<std::size_t> sink;
  std::vector<std::string> edges;
};

inline GraphInstance build_graph(const std::string& problem, const GraphFlags& f) {
  GraphInstance g;
  if (!f.vertices) {
    if (!f.edges.empty()) throw InputError("--edge requires --vertices");
    g.vertex_count = 3;
    g.source = 0;
    g.sink = 2;
    if (problem == "matching") {
      g.edges = {{0, 1}, {1, 2}};
      g.weights = std::vector<std::int64_t>{2, 4};
    } else {
      g.edges = {{0, 2}, {0, 1}, {1, 2}};
    }
    return g;
  }
  g.vertex_count = *f.vertices;
  g.source = f.source;
  g.sink = f.sink.value_or(g.vertex_count ? g.vertex_count - 1 : 0);
  bool weighted = false;
  std::vector<std::int64_t> weights;
  for (std::size_t i = 0; i < f.edges.size(); ++i) {
    std::vector<std::string> parts;
    std::stringstream ss(f.edges[i]);
    for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3)
      throw InputError("edge '" + f.edges[i] + "' must be u,v or u,v,w");
    std::vector<std::int64_t> nums;
    for (const auto& p : parts) {
      if (p.empty() || p.find_first_not_of("0123456789") != std::string::npos)
        throw InputError("edge '" + f.edges[i] + "' has a non-numeric field");
      nums.push_back(std::stoll(p));
    }
    if (i == 0) weighted = nums.size() == 3;
    if ((nums.size() == 3) != weighted)
      throw InputError("either every edge has a weight or none does");
    g.edges.push_back({static_cast<std::size_t>(nums[0]),
                       static_cast<std::size_t>(nums[1])});
    if (weighted) weights.push_back(nums[2]);
  }
  if (weighted) g.weights = weights;
  if (problem == "matching" && !g.weights)
    throw InputError("matching edges need weights (u,v,w)");
  return g;
}

inline Encoding encode(const std::string& problem, const GraphInstance& g) {
  if (problem == "maxflow-pb") return encode_maxflow_pb(g);
  if (problem == "shortest-path") return encode_shortest_path(g);
  if (problem == "matching") return encode_weighted_matching(g);
  throw InputError("unknown catalog problem '" + problem + "'");
}

/// Global Horn check over the feasibility formulas and the local formula.
inline HornReport spec_horn_report(const OptSpec& spec, std::string& where) {
  std::vector<std::pair<std::string, FormulaPtr>> parts;
  for (std::size_t i = 0; i < spec.feasibility.size(); ++i)
    parts.emplace_back("feasible." + std::to_string(i + 1), spec.feasibility[i]);
  parts.emplace_back("objective", spec.local_formula);
  for (const auto& [name, f] : parts) {
    HornReport r = horn_check(matrix_to_cnf(to_pnf(f).matrix), spec.so_signature);
    if (!r.horn) {
      where = name;
      return r;
    }
  }
  HornReport ok;
  ok.horn = true;
  return ok;
}

inline QuantClass global_class(const OptSpec& spec) {
  FormulaPtr g = spec.global_formula();
  if (!g) return QuantClass::sigma0;
  return classify_prefix(to_pnf(g));
}

inline void print_bound(const OptSpec& spec, std::ostream& out) {
  BoundReport b = check_poly_bound(spec);
  out << "poly_bound=" << b.expression() << "\n";
  out << "polynomially_bound=" << (b.polynomially_bound ? "yes" : "no") << "\n";
}

inline void print_witness(const OptSpec& spec, const SecondOrderInterp& w,
                          std::ostream& out) {
  for (const auto& r : spec.so_signature) {
    out << "witness." << r.name << "=";
    bool first = true;
    auto it = w.extensions().find(r.name);
    if (it != w.extensions().end())
      for (const auto& t : it->second) {
        out << (first ? "" : " ") << to_string(t);
        first = false;
      }
    out << "\n";
  }
}

struct Options {
  std::string spec_path;
  std::string structure_path;
  std::string engine = "brute";
  std::string limit = "2^30";
  double timeout = 60.0;
  bool witness = false;
  std::string out_path;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string problem;
  std::string emit = "spec";
  GraphFlags graph;
  std::size_t count = 20;
};

inline SearchLimits limits_of(const Options& o) {
  SearchLimits l;
  l.max_interpretations = parse_limit(o.limit);
  if (!(o.timeout > 0)) throw InputError("timeout must be positive");
  l.timeout_seconds = o.timeout;
  if (o.workers == 0) throw InputError("workers must be positive");
  l.workers = o.workers;
  return l;
}

inline void write_output(const std::string& path, const std::string& text,
                         std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

inline int cmd_check(const Options& o, std::ostream& out) {
  OptSpec spec = read_spec(o.spec_path);
  std::string where;
  HornReport h = spec_horn_report(spec, where);
  out << "horn=" << (h.horn ? "yes" : "no") << "\n";
  if (!h.horn) {
    out << "offending_formula=" << where << "\n";
    out << "offending_clause=" << h.offending_clause.to_string() << "\n";
  }
  out << "class=" << to_string(global_class(spec)) << "\n";
  print_bound(spec, out);
  return kOk;
}

inline int cmd_classify(const Options& o, std::ostream& out) {
  OptSpec spec = read_spec(o.spec_path);
  out << "class=" << to_string(global_class(spec)) << "\n";
  for (std::size_t i = 0; i < spec.feasibility.size(); ++i)
    out << "feasible." << i + 1
        << ".class=" << to_string(classify_prefix(to_pnf(spec.feasibility[i])))
        << "\n";
  out << "objective.class="
      << to_string(classify_prefix(to_pnf(spec.local_formula))) << "\n";
  return kOk;
}

inline int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  OptSpec spec = read_spec(o.spec_path);
  Structure m = read_structure(o.structure_path);
  SearchLimits limits = limits_of(o);
  auto start = std::chrono::steady_clock::now();
  if (o.engine == "reduction") {
    if (spec.weighted())
      throw InputError("the reduction engine does not handle weighted specs");
    ReductionOptions ro;
    ro.workers = limits.workers;
    ReductionResult r = reduce_opt(spec, m, limits, ro);
    check_flow(r.network, r.flow);
    if (!r.optimal()) {
      out << "status=infeasible\n";
    } else {
      out << "status=optimal value=" << r.value << "\n";
      out << "vertices=" << r.network.vertex_count << "\n";
      out << "edges=" << r.network.edges.size() << "\n";
    }
  } else if (o.engine == "brute") {
    OptResult r = optimize(spec, m, limits);
    verify_result(spec, m, r);
    if (!r.optimal()) {
      out << "status=infeasible\n";
    } else {
      out << "status=optimal value=" << r.value << "\n";
      if (o.witness) print_witness(spec, r.witness, out);
    }
    err << "atoms " << r.stats.total_atoms << ", fixed " << r.stats.fixed_atoms
        << ", searched " << r.stats.relevant_atoms << ", nodes " << r.stats.nodes
        << "\n";
  } else {
    throw InputError("unknown engine '" + o.engine + "' (brute or reduction)");
  }
  err << "elapsed "
      << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
      << " s\n";
  return kOk;
}

inline int cmd_compile_flow(const Options& o, std::ostream& out) {
  OptSpec spec = read_spec(o.spec_path);
  Structure m = read_structure(o.structure_path);
  SearchLimits limits = limits_of(o);
  ReductionOptions ro;
  ro.workers = limits.workers;
  FlowNetwork net = compile_reduction(spec, m, default_oracle(spec, m, limits), ro);
  FlowResult flow = max_flow(net);
  check_flow(net, flow);
  std::string dimacs = emit_dimacs(net);
  if (!o.out_path.empty()) write_output(o.out_path, dimacs, out);
  out << "vertices=" << net.vertex_count << "\n";
  out << "edges=" << net.edges.size() << "\n";
  out << "flow=" << flow.value << "\n";
  if (o.out_path.empty()) out << dimacs;
  return kOk;
}

inline int cmd_catalog(const Options& o, std::ostream& out) {
  Encoding e = encode(o.problem, build_graph(o.problem, o.graph));
  if (o.emit == "spec") write_output(o.out_path, to_text(e.spec), out);
  else if (o.emit == "struct") write_output(o.out_path, to_text(e.structure), out);
  else throw InputError("--emit takes spec or struct");
  return kOk;
}

/// Random graphs through an encoding and its classical oracle.
inline int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  SearchLimits limits = limits_of(o);
  std::mt19937_64 rng(o.seed);
  const std::size_t n = o.graph.vertices.value_or(3);
  if (n < 2) throw InputError("sweep needs at least 2 vertices");
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < o.count; ++i) {
    GraphInstance g;
    g.vertex_count = n;
    g.source = 0;
    g.sink = n - 1;
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<std::int64_t> weight(1, 3);
    std::vector<std::int64_t> ws;
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t v = 0; v < n; ++v) {
        if (u == v || (o.problem == "matching" && u > v)) continue;
        if (!coin(rng)) continue;
        g.edges.push_back({u, v});
        ws.push_back(weight(rng));
      }
    if (o.problem == "matching") g.weights = ws;
    Encoding e = encode(o.problem, g);
    OptResult r = optimize(e.spec, e.structure, limits);
    bool agree;
    if (o.problem == "maxflow-pb") agree = r.optimal() && r.value == oracle_max_flow(g);
    else if (o.problem == "matching") agree = r.optimal() && r.value == oracle_max_matching(g);
    else {
      auto d = oracle_shortest_path(g);
      agree = d ? r.optimal() && r.value == *d : !r.optimal();
    }
    if (!agree) {
      ++mismatches;
      err << "mismatch on instance " << i << "\n";
    }
  }
  out << "instances=" << o.count << "\n";
  out << "mismatches=" << mismatches << "\n";
  return kOk;
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hornopt: optimization over existential second-order Horn specs"};
  app.require_subcommand(1);
  Options o;

  auto add_limits = [&](CLI::App* c) {
    c->add_option("--limit", o.limit, "interpretation bound, e.g. 2^30");
    c->add_option("--timeout", o.timeout, "seconds");
    c->add_option("--workers", o.workers, "parallel search workers");
  };
  auto add_graph = [&](CLI::App* c) {
    c->add_option("--vertices", o.graph.vertices, "vertex count");
    c->add_option("--source", o.graph.source, "source vertex");
    c->add_option("--sink", o.graph.sink, "sink vertex (default: last)");
    c->add_option("--edge", o.graph.edges, "edge u,v or u,v,w (repeatable)");
  };
  const std::vector<std::string> problems{"maxflow-pb", "shortest-path", "matching"};

  auto* check = app.add_subcommand("check", "Horn check, prefix class and bound");
  check->add_option("spec", o.spec_path)->required();
  auto* classify = app.add_subcommand("classify", "prefix class per formula");
  classify->add_option("spec", o.spec_path)->required();

  auto* solve = app.add_subcommand("solve", "optimal value of a spec on a structure");
  solve->add_option("spec", o.spec_path)->required();
  solve->add_option("structure", o.structure_path)->required();
  solve->add_option("--engine", o.engine, "brute or reduction");
  solve->add_flag("--witness", o.witness, "print the witness interpretation");
  add_limits(solve);

  auto* compile = app.add_subcommand("compile-flow", "reduction to a flow network");
  compile->add_option("spec", o.spec_path)->required();
  compile->add_option("structure", o.structure_path)->required();
  compile->add_option("--out", o.out_path, "DIMACS output file");
  add_limits(compile);

  auto* catalog = app.add_subcommand("catalog", "emit a built-in encoding");
  catalog->add_option("problem", o.problem)->required()->check(CLI::IsMember(problems));
  catalog->add_option("--emit", o.emit, "spec or struct");
  catalog->add_option("--out", o.out_path, "output file");
  add_graph(catalog);

  auto* sweep = app.add_subcommand("sweep", "random graphs against the oracles");
  sweep->add_option("problem", o.problem)->required()->check(CLI::IsMember(problems));
  sweep->add_option("--count", o.count, "number of instances");
  sweep->add_option("--seed", o.seed, "random seed");
  sweep->add_option("--vertices", o.graph.vertices, "vertices per graph");
  add_limits(sweep);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  }

  try {
    if (check->parsed()) return cmd_check(o, out);
    if (classify->parsed()) return cmd_classify(o, out);
    if (solve->parsed()) return cmd_solve(o, out, err);
    if (compile->parsed()) return cmd_compile_flow(o, out);
    if (catalog->parsed()) return cmd_catalog(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
  } catch (const LimitError& e) {
    out << "status=limit\n";
    out << "reason=" << e.what() << "\n";
    return kLimit;
  } catch (const InvariantError& e) {
    err << "invariant violated: " << e.what() << "\n";
    return kInvariant;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  }
  return kInput;
}

}  // namespace hornopt::cli
