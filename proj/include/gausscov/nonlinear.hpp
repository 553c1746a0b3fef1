#pragma once

// Nonlinear least squares y ~ g(b0 + X_S b) with asymptotic covariate
// P-values; logistic regression is the case g = logistic.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/pvalues.hpp"
#include "gausscov/selection.hpp"
#include "gausscov/special_functions.hpp"

namespace gausscov {

struct Link {
  std::function<double(double)> g;
  std::function<double(double)> g1;  ///< derivative of g
  bool logistic = false;             ///< enables the separation check

  static Link identity() {
    return {[](double u) { return u; }, [](double) { return 1.0; }, false};
  }
  static Link logit() {
    return {[](double u) { return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); },
            [](double u) {
              const double e = std::exp(-std::fabs(u));
              return e / ((1.0 + e) * (1.0 + e));
            },
            true};
  }
};

inline constexpr double kSeparationLogit = 30.0;

struct NonlinState {
  std::vector<long> subset;
  Eigen::VectorXd beta;    ///< intercept first when fitted with one
  Eigen::VectorXd eta;     ///< linear predictor
  Eigen::VectorXd fitted;  ///< g(eta)
  Eigen::VectorXd residuals;
  double ss = 0.0;          ///< (1/n) sum r^2
  double sum_g1_sq = 0.0;   ///< sum g'(eta)^2
  double sum_r2_g1_sq = 0.0;  ///< sum r^2 g'(eta)^2
  bool separable = false;
  int iterations = 0;
  bool converged = true;
};

namespace detail {

inline void nonlin_summaries(NonlinState& st, const Eigen::VectorXd& y, const Link& link) {
  const long n = y.size();
  st.fitted.resize(n);
  st.residuals.resize(n);
  double ss = 0.0, a = 0.0, b = 0.0;
  bool sep = false;
  for (long i = 0; i < n; ++i) {
    st.fitted(i) = link.g(st.eta(i));
    const double r = y(i) - st.fitted(i);
    const double d = link.g1(st.eta(i));
    st.residuals(i) = r;
    ss += r * r;
    a += d * d;
    b += r * r * d * d;
    sep = sep || std::fabs(st.eta(i)) > kSeparationLogit;
  }
  st.ss = ss / static_cast<double>(n);
  st.sum_g1_sq = a;
  st.sum_r2_g1_sq = b;
  st.separable = link.logistic && sep;
}

inline Eigen::MatrixXd nonlin_design(const Dataset& data, std::span<const long> subset, bool intercept) {
  const long off = intercept ? 1 : 0;
  Eigen::MatrixXd A(data.n(), static_cast<long>(subset.size()) + off);
  if (intercept) A.col(0).setOnes();
  for (std::size_t c = 0; c < subset.size(); ++c) {
    const long j = subset[c];
    if (j < 0 || j >= data.q()) throw input_error("subset index out of range");
    A.col(static_cast<long>(c) + off) = data.X().col(j);
  }
  return A;
}

}  // namespace detail

/// Gauss-Newton with step halving on (1/n) sum (y - g(A b))^2. Stops when the
/// gradient norm drops below grad_tol or after max_iter iterations.
inline NonlinState nonlin_fit(const Dataset& data, std::span<const long> subset, const Link& link, bool intercept = true,
                              const std::optional<Eigen::VectorXd>& start = std::nullopt, int max_iter = 500,
                              double grad_tol = 1e-10) {
  const Eigen::MatrixXd A = detail::nonlin_design(data, subset, intercept);
  if (A.cols() >= data.n()) throw input_error("subset size must be below the sample size");
  const Eigen::VectorXd& y = data.y();
  const double n = static_cast<double>(y.size());
  NonlinState st;
  st.subset.assign(subset.begin(), subset.end());
  st.beta = start && start->size() == A.cols() ? *start : Eigen::VectorXd::Zero(A.cols());
  if (!start && intercept && link.logistic) {
    const double m = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
    st.beta(0) = std::log(m / (1.0 - m));
  }
  st.eta = A * st.beta;
  detail::nonlin_summaries(st, y, link);
  if (A.cols() == 0) return st;
  st.converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    st.iterations = it;
    Eigen::VectorXd d(y.size());
    for (long i = 0; i < y.size(); ++i) d(i) = link.g1(st.eta(i));
    const Eigen::MatrixXd J = d.asDiagonal() * A;
    const Eigen::VectorXd grad = J.transpose() * st.residuals * (2.0 / n);
    if (grad.norm() < grad_tol) {
      st.converged = true;
      break;
    }
    const Eigen::VectorXd delta = J.colPivHouseholderQr().solve(st.residuals);
    if (!delta.allFinite()) break;
    bool moved = false;
    for (double step = 1.0; step > 1e-12; step *= 0.5) {
      NonlinState trial = st;
      trial.beta = st.beta + step * delta;
      trial.eta = A * trial.beta;
      detail::nonlin_summaries(trial, y, link);
      if (trial.ss < st.ss) {
        trial.iterations = it;
        st = std::move(trial);
        moved = true;
        break;
      }
    }
    if (!moved) {  // no descent left at rounding level
      st.converged = true;
      break;
    }
  }
  return st;
}

/// Asymptotic P-value for a covariate lowering the mean squared error from
/// state.ss to ss_nu; the statistic n (ss0 - ss_nu) sum g'^2 / sum r^2 g'^2
/// is compared with chi-square(1). With all_subsets the pool count uses k - 1.
inline double nonlin_pval(const NonlinState& state, double ss_nu, long n, long q, long k, long nu = 1,
                          bool all_subsets = false, ExponentReading reading = ExponentReading::cdf) {
  if (ss_nu > state.ss * (1.0 + 1e-12) + 1e-300) throw std::domain_error("nonlin_pval: error increased");
  const long m = q - k + (all_subsets ? 1 : 0);
  if (m < 1) throw std::domain_error("nonlin_pval: empty candidate pool");
  if (!(state.sum_r2_g1_sq > 0.0)) return ss_nu < state.ss ? 0.0 : 1.0;
  const double stat = static_cast<double>(n) * std::max(0.0, state.ss - ss_nu) * state.sum_g1_sq / state.sum_r2_g1_sq;
  return pval_chisq_order(stat, m, nu, reading);
}

/// Stepwise selection for y ~ g(b0 + X_S b). Candidates whose fit separates
/// the classes (|logit| > 30) are skipped with a warning.
inline SelectionTrace nonlin_stepwise(const Dataset& data, const SelectionConfig& cfg, const Link& link,
                                      bool intercept = true, std::span<const long> excluded = {},
                                      ExponentReading reading = ExponentReading::cdf) {
  cfg.validate();
  const long n = data.n();
  if (n < 3) throw input_error("stepwise selection needs at least 3 observations");
  std::vector<char> pool(static_cast<std::size_t>(data.q()), 1);
  for (long j : excluded) {
    if (j < 0 || j >= data.q()) throw input_error("excluded index out of range");
    pool[static_cast<std::size_t>(j)] = 0;
  }
  const long q = std::count(pool.begin(), pool.end(), 1);
  const long off = intercept ? 1 : 0;
  const long cap = std::min(n - 2 - off, q);
  const long kmx = std::min(cfg.kmx.value_or(cap), cap);

  SelectionTrace trace;
  trace.asymptotic = true;
  std::vector<long> chosen;
  NonlinState cur = nonlin_fit(data, chosen, link, intercept);
  trace.rss_null = cur.residuals.squaredNorm();
  std::vector<char> flagged(static_cast<std::size_t>(data.q()), 0);
  trace.reason = Termination::pvalue_above_alpha;
  for (;;) {
    const long k = static_cast<long>(chosen.size());
    if (k >= kmx) {
      trace.reason = k >= q ? Termination::pool_exhausted : Termination::kmx_reached;
      break;
    }
    std::vector<long> cands;
    for (long j = 0; j < data.q(); ++j)
      if (pool[static_cast<std::size_t>(j)]) cands.push_back(j);
    std::vector<NonlinState> fits(cands.size());
    parallel_for(static_cast<long>(cands.size()), cfg.threads, [&](long c) {
      std::vector<long> s = chosen;
      s.push_back(cands[static_cast<std::size_t>(c)]);
      Eigen::VectorXd start(cur.beta.size() + 1);
      start << cur.beta, 0.0;
      fits[static_cast<std::size_t>(c)] = nonlin_fit(data, s, link, intercept, start);
    });
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      if (fits[c].separable) {
        const long j = cands[c];
        if (!flagged[static_cast<std::size_t>(j)]) {
          flagged[static_cast<std::size_t>(j)] = 1;
          trace.warnings.push_back("covariate " + data.name(j) + " separates the classes; skipped");
        }
        continue;
      }
      if (!best || fits[c].ss < fits[*best].ss) best = c;
    }
    if (!best) {
      trace.reason = Termination::no_admissible_candidate;
      break;
    }
    const double p = nonlin_pval(cur, std::min(fits[*best].ss, cur.ss), n, q, k, cfg.nu, false, reading);
    if (k >= cfg.kmn && p > cfg.alpha) {
      trace.reason = Termination::pvalue_above_alpha;
      break;
    }
    const long j = cands[*best];
    chosen.push_back(j);
    pool[static_cast<std::size_t>(j)] = 0;
    cur = std::move(fits[*best]);
    if (!cur.converged) trace.warnings.push_back("fit did not converge after adding " + data.name(j));
    trace.steps.push_back(Step{j, p, cur.residuals.squaredNorm()});
  }

  trace.chosen = chosen;
  trace.coeffs = cur.beta;
  trace.rss = cur.residuals.squaredNorm();
  const long k = static_cast<long>(chosen.size());
  for (long i = 0; i < k; ++i) {
    std::vector<long> rest;
    for (long t = 0; t < k; ++t)
      if (t != i) rest.push_back(chosen[static_cast<std::size_t>(t)]);
    const NonlinState smaller = nonlin_fit(data, rest, link, intercept);
    trace.final_pvalues.push_back(nonlin_pval(smaller, std::min(cur.ss, smaller.ss), n, q, k, cfg.nu, true, reading));
  }
  return trace;
}

/// Logistic regression for a 0/1 response; coefficients start with the intercept.
inline SelectionTrace logistic_stepwise(const Dataset& data, const SelectionConfig& cfg,
                                        std::span<const long> excluded = {},
                                        ExponentReading reading = ExponentReading::cdf) {
  for (long i = 0; i < data.y().size(); ++i) {
    const double v = data.y()(i);
    if (v != 0.0 && v != 1.0) throw input_error("logistic response must be 0 or 1");
  }
  return nonlin_stepwise(data, cfg, Link::logit(), true, excluded, reading);
}

}  // namespace gausscov
