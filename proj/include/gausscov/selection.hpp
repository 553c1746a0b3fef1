#pragma once

// Selection procedures: stepwise (f1st), repeated stepwise on a shrinking
// pool (f2st), stepwise with members excluded one at a time (f3st) and the
// all-subsets procedure (fasb).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/pvalues.hpp"
#include "gausscov/regression.hpp"
#include "gausscov/subsets.hpp"

namespace gausscov {

struct SelectionConfig {
  double alpha = 0.01;
  long nu = 1;
  long kmn = 0;                 ///< leading steps accepted without a test
  std::optional<long> kmx;      ///< cap on subset size; default min(n_eff - 2, pool)
  bool final_pass = true;       ///< all-subsets refinement of the stepwise set
  int final_limit = 20;         ///< largest set the refinement runs on
  int m = 1;                    ///< f3st exclusion depth
  OuterShape outer = OuterShape::pool;
  int threads = 1;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must lie in (0,1)");
    if (nu < 1) throw input_error("nu must be at least 1");
    if (kmn < 0) throw input_error("kmn must be nonnegative");
    if (kmx && *kmx < kmn) throw input_error("kmx must be at least kmn");
    if (final_limit < 0 || final_limit > kMaxSubsetUniverse) throw input_error("final subset limit must lie in [0, 25]");
    if (m < 1) throw input_error("m must be at least 1");
  }
};

enum class Termination {
  pvalue_above_alpha,
  kmx_reached,
  pool_exhausted,
  dof_exhausted,
  no_admissible_candidate,
  exact_fit,
};

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::pvalue_above_alpha: return "pvalue_above_alpha";
    case Termination::kmx_reached: return "kmx_reached";
    case Termination::pool_exhausted: return "pool_exhausted";
    case Termination::dof_exhausted: return "dof_exhausted";
    case Termination::no_admissible_candidate: return "no_admissible_candidate";
    case Termination::exact_fit: return "exact_fit";
  }
  return "unknown";
}

struct Step {
  long index = -1;
  double pvalue = 1.0;  ///< stepwise P-value at inclusion
  double rss = 0.0;     ///< rss after inclusion
};

struct SelectionTrace {
  std::vector<Step> steps;
  std::vector<long> chosen;           ///< final subset, in order of inclusion
  std::vector<double> final_pvalues;  ///< all-subsets P-values on the final subset
  Eigen::VectorXd coeffs;             ///< least-squares coefficients over chosen
  double rss = 0.0;                   ///< rss of the final subset
  double rss_null = 0.0;              ///< rss of the empty model
  Termination reason = Termination::pvalue_above_alpha;
  bool final_pass_applied = false;
  bool asymptotic = false;            ///< P-values are large-sample approximations
  std::vector<std::string> warnings;

  bool empty() const { return chosen.empty(); }
};

/// Residual sums of squares below this fraction of the starting value count
/// as an exact fit (rounding residue only).
inline constexpr double kExactFitTol = 1e-24;

struct StepRule {
  double alpha = 0.01;
  long nu = 1;
  long kmn = 0;
  long kmx = 0;
  OuterShape outer = OuterShape::pool;
};

struct StepwiseRun {
  std::vector<Step> steps;
  Termination reason = Termination::pvalue_above_alpha;
  std::vector<std::string> warnings;
};

/// Greedy forward selection on any model exposing size(), rss(),
/// best_candidate() and advance(j). q_pool is the candidate pool size.
template <class Model>
StepwiseRun run_stepwise(Model& model, long n_eff, long q_pool, const StepRule& rule) {
  StepwiseRun out;
  const double rss_start = model.rss();
  if (!std::isfinite(rss_start)) throw numerical_error("residual sum of squares overflows; rescale the data");
  for (;;) {
    const long k = model.size();
    if (k >= rule.kmx) {
      out.reason = Termination::kmx_reached;
      break;
    }
    if (q_pool - k < 1) {
      out.reason = Termination::pool_exhausted;
      break;
    }
    if (n_eff - k - 1 <= 0) {
      out.reason = Termination::dof_exhausted;
      break;
    }
    const double rss = model.rss();
    if (!(rss > kExactFitTol * rss_start)) {
      out.reason = Termination::exact_fit;
      break;
    }
    const auto cand = model.best_candidate();
    if (!cand) {
      out.reason = Termination::no_admissible_candidate;
      if (k < rule.kmn) {
        out.warnings.push_back("no admissible candidate after " + std::to_string(k) + " of " +
                               std::to_string(rule.kmn) + " forced steps");
      }
      break;
    }
    const PvalContext ctx{n_eff, k, 0, q_pool, rule.nu, rule.alpha};
    const double p = pval_stepwise(std::min(cand->rss_next, rss), rss, ctx, rule.outer);
    if (k >= rule.kmn && p > rule.alpha) {
      out.reason = Termination::pvalue_above_alpha;
      break;
    }
    model.advance(cand->index);
    out.steps.push_back(Step{cand->index, p, model.rss()});
  }
  return out;
}

namespace detail {

inline long default_kmx(const Dataset& data, long pool) { return std::max<long>(0, std::min(data.n_eff() - 2, pool)); }

// Smallest-rss qualifying subset of `selected`.
inline std::vector<long> refine_all_subsets(const Dataset& data, const std::vector<long>& selected, long pool,
                                            const SelectionConfig& cfg) {
  const auto rss = subset_rss_table(data, selected);
  const int u = static_cast<int>(selected.size());
  const auto ok = qualifying_masks(rss, u, PvalContext{data.n_eff(), 0, 0, pool, cfg.nu, cfg.alpha});
  std::uint32_t best = 0;
  for (std::uint32_t mask = 1; mask < rss.size(); ++mask) {
    if (ok[mask] && rss[mask] < rss[best]) best = mask;
  }
  return mask_members(best, selected);
}

}  // namespace detail

/// Stepwise selection with an optional all-subsets refinement.
inline SelectionTrace f1st(const Dataset& data, const SelectionConfig& cfg, std::span<const long> excluded = {}) {
  cfg.validate();
  if (data.n_eff() < 3) throw input_error("stepwise selection needs an effective sample size of at least 3");
  FitState state(data, excluded, cfg.threads);
  const long pool = state.pool_size();
  StepRule rule{cfg.alpha, cfg.nu, cfg.kmn, cfg.kmx.value_or(detail::default_kmx(data, pool)), cfg.outer};
  rule.kmx = std::min(rule.kmx, detail::default_kmx(data, pool));
  auto run = run_stepwise(state, data.n_eff(), pool, rule);

  SelectionTrace trace;
  trace.steps = std::move(run.steps);
  trace.reason = run.reason;
  trace.warnings = std::move(run.warnings);
  trace.rss_null = data.y().squaredNorm();
  std::vector<long> chosen = state.selected();
  if (cfg.final_pass && !chosen.empty() && static_cast<long>(chosen.size()) <= cfg.final_limit) {
    chosen = detail::refine_all_subsets(data, chosen, pool, cfg);
    trace.final_pass_applied = true;
  }
  trace.chosen = chosen;
  if (chosen.size() == state.selected().size()) {
    trace.rss = state.rss();
    trace.coeffs = state.coefficients();
  } else {
    const FitState fit = fit_ls(data, chosen);
    trace.rss = fit.rss();
    trace.coeffs = fit.coefficients();
  }
  trace.final_pvalues = all_subset_pvalues(data, chosen, pool, cfg.nu);
  return trace;
}

/// Repeats f1st, each round excluding everything chosen so far.
inline std::vector<SelectionTrace> f2st(const Dataset& data, const SelectionConfig& cfg,
                                        std::span<const long> excluded = {}) {
  std::vector<SelectionTrace> rounds;
  std::vector<long> excl(excluded.begin(), excluded.end());
  for (long round = 0; round < data.q(); ++round) {
    if (static_cast<long>(excl.size()) >= data.q()) break;
    auto trace = f1st(data, cfg, excl);
    if (trace.empty()) break;
    excl.insert(excl.end(), trace.chosen.begin(), trace.chosen.end());
    rounds.push_back(std::move(trace));
  }
  return rounds;
}

namespace detail {

inline bool approx_less(const SubsetApproximation& a, const SubsetApproximation& b) {
  if (a.rss != b.rss) return a.rss < b.rss;
  return a.indices < b.indices;
}

}  // namespace detail

/// f1st, then f1st again with each selected covariate excluded in turn,
/// recursing to depth cfg.m. Exclusions accumulate along a branch.
/// Distinct nonempty subsets are returned ordered by rss.
inline std::vector<SubsetApproximation> f3st(const Dataset& data, const SelectionConfig& cfg,
                                             std::span<const long> excluded = {}) {
  cfg.validate();
  SelectionConfig inner = cfg;
  inner.threads = 1;
  std::vector<long> base(excluded.begin(), excluded.end());
  std::sort(base.begin(), base.end());
  std::set<std::vector<long>> visited{base};
  std::vector<std::vector<long>> frontier{base};
  std::map<std::vector<long>, SubsetApproximation> found;
  for (int level = 0; level <= cfg.m && !frontier.empty(); ++level) {
    std::vector<SelectionTrace> traces(frontier.size());
    parallel_for(static_cast<long>(frontier.size()), cfg.threads, [&](long i) {
      const auto& ex = frontier[static_cast<std::size_t>(i)];
      if (static_cast<long>(ex.size()) >= data.q()) return;
      traces[static_cast<std::size_t>(i)] = f1st(data, inner, ex);
    });
    std::vector<std::vector<long>> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const auto& t = traces[i];
      if (t.empty()) continue;
      std::vector<long> key = t.chosen;
      std::sort(key.begin(), key.end());
      if (!found.count(key)) found.emplace(key, SubsetApproximation{t.chosen, t.rss, t.final_pvalues});
      if (level == cfg.m) continue;
      for (long j : t.chosen) {
        std::vector<long> ex = frontier[i];
        ex.insert(std::upper_bound(ex.begin(), ex.end(), j), j);
        if (visited.insert(ex).second) next.push_back(std::move(ex));
      }
    }
    frontier = std::move(next);
  }
  std::vector<SubsetApproximation> out;
  out.reserve(found.size());
  for (auto& [key, approx] : found) out.push_back(std::move(approx));
  std::sort(out.begin(), out.end(), detail::approx_less);
  return out;
}

/// All-subsets procedure: maximal subsets of `universe` whose every member
/// has all-subsets P-value <= alpha, ordered by rss. Without a universe all
/// columns are enumerated (q <= 25). q_pool defaults to data.q().
inline std::vector<SubsetApproximation> fasb(const Dataset& data, const SelectionConfig& cfg,
                                             std::optional<std::vector<long>> universe = std::nullopt,
                                             std::optional<long> q_pool = std::nullopt) {
  cfg.validate();
  std::vector<long> uni;
  if (universe) {
    uni = *universe;
    std::vector<long> sorted = uni;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw input_error("universe indices must be distinct");
    for (long j : uni) {
      if (j < 0 || j >= data.q()) throw input_error("universe index out of range");
    }
  } else {
    if (data.q() > kMaxSubsetUniverse) {
      throw input_error("all-subsets search over " + std::to_string(data.q()) +
                        " covariates exceeds the limit of 25; pass a universe such as the covariates "
                        "chosen by stepwise selection with kmn forced steps");
    }
    for (long j = 0; j < data.q(); ++j) uni.push_back(j);
  }
  const long q = q_pool.value_or(data.q());
  if (q < static_cast<long>(uni.size())) throw input_error("pool size smaller than the universe");
  const int u = static_cast<int>(uni.size());
  const auto rss = subset_rss_table(data, uni);
  const auto ok = qualifying_masks(rss, u, PvalContext{data.n_eff(), 0, 0, q, cfg.nu, cfg.alpha});
  // sup[mask]: some superset of mask (itself included) qualifies.
  std::vector<char> sup(ok.begin(), ok.end());
  sup[0] = 0;
  for (int b = 0; b < u; ++b) {
    const std::uint32_t bit = std::uint32_t{1} << b;
    for (std::uint32_t mask = static_cast<std::uint32_t>(rss.size()); mask-- > 0;) {
      if (!(mask & bit) && sup[mask | bit]) sup[mask] = 1;
    }
  }
  std::vector<SubsetApproximation> out;
  for (std::uint32_t mask = 1; mask < rss.size(); ++mask) {
    if (!ok[mask]) continue;
    bool maximal = true;
    for (int b = 0; b < u && maximal; ++b) {
      const std::uint32_t bit = std::uint32_t{1} << b;
      if (!(mask & bit) && sup[mask | bit]) maximal = false;
    }
    if (!maximal) continue;
    SubsetApproximation a;
    a.indices = mask_members(mask, uni);
    a.rss = rss[mask];
    a.pvalues = all_subset_pvalues(data, a.indices, q, cfg.nu);
    out.push_back(std::move(a));
  }
  std::sort(out.begin(), out.end(), detail::approx_less);
  return out;
}

}  // namespace gausscov
