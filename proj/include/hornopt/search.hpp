#pragma once

// Optimization over second-order interpretations by exhaustive search.
//
// Interpretations are bit-vectors over the ground second-order atoms
// (predicates in declaration order, tuples in lexicographic order) and are
// visited in lexicographic order with false before true. The first optimal
// interpretation in that order is the witness.
//
// The feasibility formulas are grounded to propositional constraints. Unit
// constraints are fixed at the root, atoms that no constraint or objective
// tuple mentions are held false, and the remaining atoms are enumerated
// depth first. A constraint is checked as soon as its last atom is assigned;
// with pruning enabled a violated constraint cuts the subtree, and a
// three-valued bound on the objective cuts subtrees that cannot strictly
// improve on the incumbent.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hornopt/error.hpp"
#include "hornopt/grounding.hpp"
#include "hornopt/logic.hpp"
#include "hornopt/spec.hpp"

namespace hornopt {

struct SearchLimits {
  /// Upper bound on the number of interpretations the search may have to
  /// visit (2^relevant atoms).
  std::uint64_t max_interpretations = 1ull << 30;
  double timeout_seconds = 60.0;
  unsigned workers = 1;
  bool prune = true;
  std::size_t max_ground_nodes = 20'000'000;
};

struct SearchStats {
  std::size_t total_atoms = 0;
  std::size_t fixed_atoms = 0;
  std::size_t relevant_atoms = 0;
  std::uint64_t nodes = 0;
  std::uint64_t leaves = 0;
};

struct OptResult {
  enum class Status { optimal, infeasible };

  Status status = Status::infeasible;
  std::int64_t value = 0;
  SecondOrderInterp witness;
  /// Objective tuples satisfying the local formula under the witness,
  /// lexicographic order.
  std::vector<Tuple> witness_tuples;
  /// Weight of each witness tuple (all 1 when counting).
  std::vector<std::int64_t> witness_weights;
  SearchStats stats;

  bool optimal() const noexcept { return status == Status::optimal; }
};

/// log2 of the nominal search space, the product of 2^(n^arity) over the
/// signature, as a decimal string.
inline std::string nominal_space_exponent(std::span<const RelationDecl> sig,
                                          std::size_t n) {
  std::uint64_t bits = 0;
  for (const auto& r : sig) {
    auto c = tuple_count(n, r.arity);
    if (!c || bits > UINT64_MAX - *c) return ">2^64";
    bits += *c;
  }
  return std::to_string(bits);
}

namespace detail {

inline bool checked_add(std::int64_t& acc, std::int64_t x) {
  return !__builtin_add_overflow(acc, x, &acc);
}

class SearchProblem {
 public:
  enum class Mode { count, weighted, first_feasible };

  SearchProblem(const OptSpec& spec, Structure m, SearchLimits limits, Mode mode,
                std::span<const FormulaPtr> extra_constraints = {},
                const Assignment& extra_env = {})
      : spec_(spec),
        m_(std::move(m)),
        limits_(limits),
        mode_(mode),
        index_(spec.so_signature, m_.size()),
        arena_(limits.max_ground_nodes) {
    if (limits_.max_interpretations == 0)
      throw InputError("interpretation limit must be positive");
    if (limits_.timeout_seconds <= 0)
      throw InputError("timeout must be positive");
    spec_.validate();
    m_.conform_to(spec_.vocabulary);
    stats_.total_atoms = index_.size();
    Grounder g(m_, index_, arena_);
    for (const auto& f : spec_.feasibility) add_constraint(g.ground(f));
    for (const auto& f : extra_constraints) add_constraint(g.ground(f, extra_env));
    if (mode_ != Mode::first_feasible) build_objective(g);
    fix_units();
    if (infeasible_) return;
    select_relevant();
    check_limits();
  }

  OptResult run() {
    OptResult out;
    out.stats = stats_;
    if (infeasible_) return out;
    start_ = std::chrono::steady_clock::now();

    unsigned workers = std::max(1u, limits_.workers);
    std::size_t depth = 0;
    if (workers > 1) {
      while ((1ull << depth) < 4ull * workers && depth < relevant_.size() &&
             depth < 16)
        ++depth;
    }
    const std::size_t jobs = std::size_t{1} << depth;
    std::vector<JobResult> results(jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;

    auto work = [&] {
      Worker w(*this);
      try {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs;) {
          if (stop_.load()) break;
          results[j] = w.run_job(j, depth);
          if (mode_ == Mode::first_feasible && results[j].found) stop_ = true;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        stop_ = true;
      }
      node_total_ += w.nodes;
      leaf_total_ += w.leaves;
    };
    if (workers == 1 || jobs == 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (unsigned i = 0; i < std::min<std::size_t>(workers, jobs); ++i)
        pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    const JobResult* best = nullptr;
    for (const auto& r : results) {
      if (!r.found) continue;
      if (!best || better(r.value, best->value)) best = &r;
      if (mode_ == Mode::first_feasible) break;
    }
    out.stats.nodes = node_total_;
    out.stats.leaves = leaf_total_;
    if (!best) return out;
    out.status = OptResult::Status::optimal;
    out.value = best->value;
    std::vector<std::int8_t> values = base_values_;
    for (std::size_t i = 0; i < relevant_.size(); ++i)
      values[relevant_[i]] = best->bits[i];
    std::vector<bool> bits(values.size());
    for (std::size_t v = 0; v < values.size(); ++v) bits[v] = values[v] > 0;
    out.witness = index_.interpretation(bits);
    if (mode_ != Mode::first_feasible) {
      for (const auto& t : objective_)
        if (arena_.eval(t.node, values)) {
          out.witness_tuples.push_back(t.tuple);
          out.witness_weights.push_back(t.weight.value_or(0));
        }
    }
    return out;
  }

  bool infeasible_at_root() const noexcept { return infeasible_; }
  const SearchStats& stats() const noexcept { return stats_; }

 private:
  using NodeId = PropArena::NodeId;

  struct ObjectiveTuple {
    Tuple tuple;
    NodeId node;
    /// nullopt when the weight relation gives zero or several weights.
    std::optional<std::int64_t> weight;
    std::size_t weight_count = 1;
  };

  struct JobResult {
    bool found = false;
    std::int64_t value = 0;
    std::vector<std::int8_t> bits;
  };

  bool maximize() const { return spec_.direction == Direction::maximize; }
  bool better(std::int64_t a, std::int64_t b) const {
    return maximize() ? a > b : a < b;
  }

  void add_constraint(NodeId n) {
    if (n == PropArena::kTrue) return;
    if (n == PropArena::kFalse) {
      infeasible_ = true;
      return;
    }
    if (arena_.op(n) == PropArena::Op::conjunction) {
      auto kids = arena_.children(n);
      std::vector<NodeId> copy(kids.begin(), kids.end());
      for (NodeId k : copy) add_constraint(k);
      return;
    }
    constraints_.push_back(n);
  }

  void build_objective(Grounder& g) {
    const std::size_t k = spec_.objective_arity();
    for_each_tuple(m_.size(), k, [&](const Tuple& t) {
      Assignment a;
      for (std::size_t i = 0; i < k; ++i) a[spec_.objective_vars[i]] = t[i];
      ObjectiveTuple ot{t, g.ground(spec_.local_formula, a), 1, 1};
      if (mode_ == Mode::weighted) assign_weight(ot);
      objective_.push_back(std::move(ot));
    });
  }

  void assign_weight(ObjectiveTuple& ot) const {
    const Relation* r = m_.relation(*spec_.weight_relation);
    std::size_t count = 0;
    std::int64_t value = 0;
    for (const auto& rt : r->tuples()) {
      if (!std::equal(ot.tuple.begin(), ot.tuple.end(), rt.begin() + 1)) continue;
      ++count;
      auto it = m_.weights().find(rt[0]);
      if (it == m_.weights().end())
        throw InputError("weight relation '" + *spec_.weight_relation +
                         "' names element " + std::to_string(rt[0]) +
                         ", which is not a weight");
      value = it->second;
    }
    ot.weight_count = count;
    ot.weight = count == 1 ? std::optional<std::int64_t>(value) : std::nullopt;
  }

  void fix_units() {
    fixed_.assign(index_.size(), -1);
    while (!infeasible_) {
      bool changed = false;
      for (NodeId c : constraints_) {
        std::optional<std::pair<Var, std::int8_t>> unit;
        if (arena_.op(c) == PropArena::Op::var) {
          unit = {{arena_.var_of(c), 1}};
        } else if (arena_.op(c) == PropArena::Op::negation) {
          NodeId inner = arena_.children(c)[0];
          if (arena_.op(inner) == PropArena::Op::var)
            unit = {{arena_.var_of(inner), 0}};
        }
        if (!unit) continue;
        auto [v, val] = *unit;
        if (fixed_[v] == val) continue;
        if (fixed_[v] >= 0) {
          infeasible_ = true;
          return;
        }
        fixed_[v] = val;
        changed = true;
      }
      if (!changed) break;
      std::vector<NodeId> old;
      old.swap(constraints_);
      for (NodeId c : old) {
        // Unit constraints on fixed atoms become true and drop out.
        add_constraint(arena_.substitute(c, fixed_));
        if (infeasible_) return;
      }
    }
    for (auto& t : objective_) t.node = arena_.substitute(t.node, fixed_);
    stats_.fixed_atoms = static_cast<std::size_t>(
        std::count_if(fixed_.begin(), fixed_.end(), [](std::int8_t x) { return x >= 0; }));
  }

  void select_relevant() {
    std::vector<Var> vars;
    for (NodeId c : constraints_) arena_.collect_vars(c, vars);
    for (const auto& t : objective_) arena_.collect_vars(t.node, vars);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    relevant_ = vars;
    stats_.relevant_atoms = relevant_.size();

    std::vector<std::size_t> position(index_.size(), SIZE_MAX);
    for (std::size_t i = 0; i < relevant_.size(); ++i) position[relevant_[i]] = i;
    auto last_position = [&](NodeId n) {
      std::vector<Var> vs;
      arena_.collect_vars(n, vs);
      std::size_t last = 0;
      for (Var v : vs) last = std::max(last, position[v]);
      return last;
    };
    buckets_.assign(relevant_.size(), {});
    for (NodeId c : constraints_) buckets_[last_position(c)].push_back(c);

    base_values_.assign(index_.size(), 0);
    for (std::size_t v = 0; v < index_.size(); ++v)
      if (fixed_[v] >= 0) base_values_[v] = fixed_[v];
    for (Var v : relevant_) base_values_[v] = -1;

    for (std::size_t i = 0; i < objective_.size(); ++i) {
      const auto& t = objective_[i];
      if (t.node == PropArena::kFalse) continue;
      if (t.node == PropArena::kTrue) constant_objective_.push_back(i);
      else variable_objective_.push_back(i);
    }
  }

  void check_limits() const {
    const std::size_t r = relevant_.size();
    bool over = r >= 64 || (std::uint64_t{1} << r) > limits_.max_interpretations;
    if (over)
      throw LimitError(
          "search space limit exceeded: bound 2^" +
          nominal_space_exponent(spec_.so_signature, m_.size()) +
          " interpretations (2^" + std::to_string(r) +
          " after fixing unit atoms and dropping unconstrained ones) exceeds " +
          "the limit " + std::to_string(limits_.max_interpretations));
  }

  class Worker {
   public:
    explicit Worker(SearchProblem& p) : p_(p), values_(p.base_values_) {}

    JobResult run_job(std::size_t job, std::size_t depth) {
      result_ = JobResult{};
      values_ = p_.base_values_;
      // The job index spells the first `depth` relevant atoms, most
      // significant first.
      for (std::size_t i = 0; i < depth; ++i) {
        std::int8_t bit = (job >> (depth - 1 - i)) & 1;
        values_[p_.relevant_[i]] = bit;
        if (!constraints_hold(i)) return result_;
      }
      dfs(depth);
      return result_;
    }

    std::uint64_t nodes = 0;
    std::uint64_t leaves = 0;

   private:
    bool constraints_hold(std::size_t pos) const {
      if (!p_.limits_.prune) return true;
      for (NodeId c : p_.buckets_[pos])
        if (!p_.arena_.eval(c, values_)) return false;
      return true;
    }

    bool all_constraints_hold() const {
      for (NodeId c : p_.constraints_)
        if (!p_.arena_.eval(c, values_)) return false;
      return true;
    }

    void tick() {
      if ((++nodes & 1023) == 0) {
        double elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - p_.start_)
                             .count();
        if (elapsed > p_.limits_.timeout_seconds)
          throw LimitError("search timed out after " +
                           std::to_string(p_.limits_.timeout_seconds) + " s");
      }
    }

    std::int64_t contribution(const ObjectiveTuple& t) const {
      if (!t.weight)
        throw InputError("objective tuple " + to_string(t.tuple) + " has " +
                         std::to_string(t.weight_count) +
                         " weights in the weight relation; exactly one required");
      return *t.weight;
    }

    /// Can this subtree still strictly beat the incumbent (and, across jobs,
    /// at least tie the shared best)?
    bool promising() const {
      if (!p_.limits_.prune || p_.mode_ == Mode::first_feasible) return true;
      const bool maxi = p_.maximize();
      std::int64_t bound = 0;
      bool saturated = false;
      auto add = [&](std::int64_t x) {
        if (!checked_add(bound, x)) saturated = true;
      };
      for (std::size_t i : p_.constant_objective_) {
        const auto& t = p_.objective_[i];
        if (t.weight) add(*t.weight);
        else if (maxi) saturated = true;
      }
      for (std::size_t i : p_.variable_objective_) {
        const auto& t = p_.objective_[i];
        int v = p_.arena_.eval3(t.node, values_);
        bool counts = maxi ? v != 0 : v == 1;
        if (!counts) continue;
        if (t.weight) add(*t.weight);
        else if (maxi) saturated = true;
      }
      if (saturated) return true;
      if (result_.found && !p_.better(bound, result_.value)) return false;
      std::int64_t shared = p_.shared_best_.load();
      if (p_.shared_found_.load() &&
          (maxi ? bound < shared : bound > shared))
        return false;
      return true;
    }

    void leaf() {
      ++leaves;
      if (!p_.limits_.prune && !all_constraints_hold()) return;
      std::int64_t value = 0;
      if (p_.mode_ != Mode::first_feasible) {
        for (std::size_t i : p_.constant_objective_)
          if (!checked_add(value, contribution(p_.objective_[i])))
            throw InputError("objective value overflows 64-bit integer");
        for (std::size_t i : p_.variable_objective_) {
          const auto& t = p_.objective_[i];
          if (p_.arena_.eval(t.node, values_) &&
              !checked_add(value, contribution(t)))
            throw InputError("objective value overflows 64-bit integer");
        }
      }
      if (result_.found && !p_.better(value, result_.value)) return;
      result_.found = true;
      result_.value = value;
      result_.bits.resize(p_.relevant_.size());
      for (std::size_t i = 0; i < p_.relevant_.size(); ++i)
        result_.bits[i] = values_[p_.relevant_[i]];
      publish(value);
      if (p_.mode_ == Mode::first_feasible) done_ = true;
    }

    void publish(std::int64_t value) {
      std::int64_t cur = p_.shared_best_.load();
      if (!p_.shared_found_.load()) {
        std::lock_guard<std::mutex> lock(p_.shared_mu_);
        if (!p_.shared_found_.load()) {
          p_.shared_best_ = value;
          p_.shared_found_ = true;
          return;
        }
        cur = p_.shared_best_.load();
      }
      while (p_.better(value, cur) &&
             !p_.shared_best_.compare_exchange_weak(cur, value)) {
      }
    }

    void dfs(std::size_t pos) {
      if (done_ || p_.stop_.load(std::memory_order_relaxed)) return;
      tick();
      if (!promising()) return;
      if (pos == p_.relevant_.size()) {
        leaf();
        return;
      }
      const Var v = p_.relevant_[pos];
      for (std::int8_t bit = 0; bit <= 1 && !done_; ++bit) {
        values_[v] = bit;
        if (constraints_hold(pos)) dfs(pos + 1);
      }
      values_[v] = -1;
    }

    SearchProblem& p_;
    std::vector<std::int8_t> values_;
    JobResult result_;
    bool done_ = false;
  };

  OptSpec spec_;
  Structure m_;
  SearchLimits limits_;
  Mode mode_;
  AtomIndex index_;
  PropArena arena_;
  SearchStats stats_;
  bool infeasible_ = false;

  std::vector<NodeId> constraints_;
  std::vector<ObjectiveTuple> objective_;
  std::vector<std::int8_t> fixed_;
  std::vector<Var> relevant_;
  std::vector<std::vector<NodeId>> buckets_;
  std::vector<std::int8_t> base_values_;
  std::vector<std::size_t> constant_objective_;
  std::vector<std::size_t> variable_objective_;

  std::chrono::steady_clock::time_point start_;
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> node_total_{0};
  std::atomic<std::uint64_t> leaf_total_{0};
  std::atomic<bool> shared_found_{false};
  std::atomic<std::int64_t> shared_best_{0};
  std::mutex shared_mu_;
};

}  // namespace detail

/// Counting optimization: max or min over feasible interpretations of the
/// number of objective tuples satisfying the local formula.
inline OptResult brute_opt(const OptSpec& spec, const Structure& m,
                           const SearchLimits& limits = {}) {
  detail::SearchProblem p(spec, m, limits, detail::SearchProblem::Mode::count);
  return p.run();
}

/// Weighted optimization: as brute_opt, but each satisfying tuple contributes
/// the value of its unique weight element under the weight relation.
inline OptResult weighted_opt(const OptSpec& spec, const Structure& m,
                              const SearchLimits& limits = {}) {
  if (!spec.weighted())
    throw InputError("weighted_opt requires a spec with a weight relation");
  detail::SearchProblem p(spec, m, limits, detail::SearchProblem::Mode::weighted);
  return p.run();
}

/// Dispatches on whether the spec is weighted.
inline OptResult optimize(const OptSpec& spec, const Structure& m,
                          const SearchLimits& limits = {}) {
  return spec.weighted() ? weighted_opt(spec, m, limits)
                         : brute_opt(spec, m, limits);
}

/// The lexicographically first interpretation satisfying the feasibility
/// formulas and the extra closed-under-env constraints, if any.
inline std::optional<SecondOrderInterp> find_feasible(
    const OptSpec& spec, const Structure& m, const SearchLimits& limits = {},
    std::span<const FormulaPtr> extra = {}, const Assignment& env = {}) {
  detail::SearchProblem p(spec, m, limits,
                          detail::SearchProblem::Mode::first_feasible, extra, env);
  OptResult r = p.run();
  if (!r.optimal()) return std::nullopt;
  return r.witness;
}

/// Is there a feasible interpretation with objective >= K (max) or <= K (min)?
inline bool decision_check(const OptSpec& spec, const Structure& m,
                           std::int64_t threshold, const SearchLimits& limits = {}) {
  if (threshold < 0) throw InputError("decision threshold must be nonnegative");
  OptResult r = optimize(spec, m, limits);
  if (!r.optimal()) return false;
  return spec.direction == Direction::maximize ? r.value >= threshold
                                               : r.value <= threshold;
}

/// Re-checks an optimal result with the direct evaluator: the witness
/// satisfies every feasibility formula, the witness tuples are exactly the
/// tuples satisfying the local formula, and the value is their count or
/// weight sum. Throws InvariantError on any mismatch.
inline void verify_result(const OptSpec& spec, const Structure& structure,
                          const OptResult& r) {
  if (!r.optimal()) return;
  Structure m = structure;
  m.conform_to(spec.vocabulary);
  if (!evaluate(spec.global_formula(), m, r.witness))
    throw InvariantError("witness violates the feasibility formula");
  std::vector<Tuple> satisfied;
  std::int64_t total = 0;
  const std::size_t k = spec.objective_arity();
  std::size_t w = 0;
  for_each_tuple(m.size(), k, [&](const Tuple& t) {
    Assignment a;
    for (std::size_t i = 0; i < k; ++i) a[spec.objective_vars[i]] = t[i];
    if (!evaluate(spec.local_formula, m, r.witness, a)) return;
    satisfied.push_back(t);
    if (w < r.witness_weights.size()) total += r.witness_weights[w];
    ++w;
  });
  if (satisfied != r.witness_tuples)
    throw InvariantError("witness tuples disagree with the local formula");
  if (!spec.weighted()) total = static_cast<std::int64_t>(satisfied.size());
  if (total != r.value)
    throw InvariantError("reported value " + std::to_string(r.value) +
                         " differs from recomputed " + std::to_string(total));
}

struct BoundReport {
  std::size_t arity = 0;
  bool weighted = false;
  bool polynomially_bound = true;

  /// "n^k" for counting specs, "W*n^k" for weighted ones.
  std::string expression() const {
    std::string base = "n^" + std::to_string(arity);
    return weighted ? "W*" + base : base;
  }

  /// The bound for a universe of n elements and maximum weight W, saturating.
  std::uint64_t evaluate(std::size_t n, std::uint64_t max_weight = 1) const {
    auto c = tuple_count(n, arity);
    if (!c) return UINT64_MAX;
    if (!weighted) return *c;
    if (max_weight != 0 && *c > UINT64_MAX / max_weight) return UINT64_MAX;
    return *c * max_weight;
  }
};

/// Every counting spec is bounded by the number of objective tuples, n^k.
/// Weighted specs are bounded only by W*n^k, with W the largest weight, and
/// are not polynomially bound in general.
inline BoundReport check_poly_bound(const OptSpec& spec) {
  BoundReport b;
  b.arity = spec.objective_arity();
  b.weighted = spec.weighted();
  b.polynomially_bound = !b.weighted;
  return b;
}

}  // namespace hornopt
