#pragma once

// Huber M-regression with asymptotic covariate P-values.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/pvalues.hpp"
#include "gausscov/selection.hpp"
#include "gausscov/special_functions.hpp"

namespace gausscov {

struct HuberLoss {
  double c = 1.0;

  void validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw input_error("Huber constant must be positive and finite");
  }
  double rho(double u) const {
    const double a = std::fabs(u);
    return a <= c ? 0.5 * u * u : c * a - 0.5 * c * c;
  }
  double psi(double u) const { return std::clamp(u, -c, c); }
  /// Second derivative; 1 on the seam |u| = c.
  double psi_prime(double u) const { return std::fabs(u) <= c ? 1.0 : 0.0; }

  /// c_f = E psi(Z)^2, Z standard normal, by adaptive Gauss-Kronrod.
  double fisher_cf() const {
    using boost::math::quadrature::gauss_kronrod;
    const auto integrand = [this](double z) { return psi(z) * psi(z) * special::normal_pdf(z); };
    const double inner = gauss_kronrod<double, 61>::integrate(integrand, 0.0, std::min(c, 40.0), 15, 1e-14);
    return 2.0 * (inner + c * c * special::normal_sf(c));
  }
};

/// 1.4826 times the median absolute deviation about the median.
inline double initial_scale(const Eigen::VectorXd& y) {
  if (y.size() == 0) throw input_error("empty response");
  auto median = [](std::vector<double> v) {
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(h), v.end());
    const double hi = v[h];
    if (v.size() % 2) return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<long>(h)));
  };
  std::vector<double> v(y.data(), y.data() + y.size());
  const double med = median(v);
  for (auto& x : v) x = std::fabs(x - med);
  return 1.4826 * median(v);
}

struct MState {
  std::vector<long> subset;
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double sigma = 1.0;
  double s0 = 0.0;        ///< (1/n) sum rho(r/sigma)
  double s_psi_sq = 0.0;  ///< (1/n) sum psi(r/sigma)^2
  double s_psi_prime = 0.0;  ///< sum psi'(r/sigma)
  int iterations = 0;
  bool converged = true;
};

namespace detail {

inline void m_summaries(MState& st, const HuberLoss& loss) {
  const double n = static_cast<double>(st.residuals.size());
  double s = 0.0, p2 = 0.0, pp = 0.0;
  for (long i = 0; i < st.residuals.size(); ++i) {
    const double u = st.residuals(i) / st.sigma;
    s += loss.rho(u);
    p2 += loss.psi(u) * loss.psi(u);
    pp += loss.psi_prime(u);
  }
  st.s0 = s / n;
  st.s_psi_sq = p2 / n;
  st.s_psi_prime = pp;
}

inline Eigen::MatrixXd columns(const Dataset& data, std::span<const long> subset) {
  Eigen::MatrixXd A(data.n(), static_cast<long>(subset.size()));
  for (std::size_t c = 0; c < subset.size(); ++c) {
    const long j = subset[c];
    if (j < 0 || j >= data.q()) throw input_error("subset index out of range");
    A.col(static_cast<long>(c)) = data.X().col(j);
  }
  return A;
}

}  // namespace detail

/// Minimizes (1/n) sum rho((y - X_S b) / sigma) by iteratively reweighted
/// least squares; each iteration decreases the objective.
inline MState m_fit(const Dataset& data, std::span<const long> subset, double sigma, const HuberLoss& loss,
                    const std::optional<Eigen::VectorXd>& start = std::nullopt, int max_iter = 500,
                    double tol = 1e-10) {
  loss.validate();
  if (!(sigma > 0.0)) throw input_error("scale must be positive");
  if (static_cast<long>(subset.size()) >= data.n()) throw input_error("subset size must be below the sample size");
  MState st;
  st.subset.assign(subset.begin(), subset.end());
  st.sigma = sigma;
  const Eigen::MatrixXd A = detail::columns(data, subset);
  const Eigen::VectorXd& y = data.y();
  const long k = A.cols();
  st.beta = start && start->size() == k ? *start : Eigen::VectorXd::Zero(k);
  if (k == 0) {
    st.residuals = y;
    detail::m_summaries(st, loss);
    return st;
  }
  if (!start) st.beta = A.colPivHouseholderQr().solve(y);
  st.residuals = y - A * st.beta;
  detail::m_summaries(st, loss);
  double obj = st.s0;
  st.converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd w(y.size());
    for (long i = 0; i < y.size(); ++i) {
      const double u = st.residuals(i) / sigma;
      w(i) = u == 0.0 ? 1.0 : std::sqrt(loss.psi(u) / u);
    }
    const Eigen::MatrixXd WA = w.asDiagonal() * A;
    const Eigen::VectorXd Wy = w.cwiseProduct(y);
    const Eigen::VectorXd next = WA.colPivHouseholderQr().solve(Wy);
    MState trial = st;
    trial.beta = next;
    trial.residuals = y - A * next;
    detail::m_summaries(trial, loss);
    st.iterations = it;
    if (trial.s0 > obj) {  // rounding only; keep the better iterate
      st.converged = true;
      break;
    }
    const double change = (obj - trial.s0) / std::max(obj, std::numeric_limits<double>::min());
    st.beta = trial.beta;
    st.residuals = trial.residuals;
    st.s0 = trial.s0;
    st.s_psi_sq = trial.s_psi_sq;
    st.s_psi_prime = trial.s_psi_prime;
    obj = trial.s0;
    if (change < tol) {
      st.converged = true;
      break;
    }
  }
  return st;
}

/// Asymptotic P-value for adding a covariate that lowers the mean loss from
/// state.s0 to s_nu. With all_subsets the pool count uses k - 1.
inline double m_pval(const MState& state, double s_nu, long q, long k, long nu = 1, bool all_subsets = false,
                     ExponentReading reading = ExponentReading::cdf) {
  if (s_nu > state.s0 * (1.0 + 1e-12) + 1e-300) throw std::domain_error("m_pval: loss increased");
  const long m = q - k + (all_subsets ? 1 : 0);
  if (m < 1) throw std::domain_error("m_pval: empty candidate pool");
  if (!(state.s_psi_sq > 0.0)) return s_nu < state.s0 ? 0.0 : 1.0;
  const double stat = 2.0 * state.s_psi_prime / state.s_psi_sq * std::max(0.0, state.s0 - s_nu);
  return pval_chisq_order(stat, m, nu, reading);
}

/// sigma_1^2 = sigma_0^2 sum psi(r_1/sigma_0)^2 / ((n - k - 1) c_f), where
/// `state` holds the fit with k + 1 covariates at scale sigma_0.
inline double m_scale_update(const MState& state, long k, const HuberLoss& loss, std::vector<std::string>* warnings = nullptr) {
  const long n = state.residuals.size();
  const long dof = n - k - 1;
  if (dof < 1) throw std::domain_error("m_scale_update: no degrees of freedom left");
  double sum = 0.0;
  for (long i = 0; i < n; ++i) {
    const double p = loss.psi(state.residuals(i) / state.sigma);
    sum += p * p;
  }
  const double s2 = state.sigma * state.sigma * sum / (static_cast<double>(dof) * loss.fisher_cf());
  if (!(s2 > 1e-24)) {
    if (warnings) warnings->push_back("degenerate residuals; scale floored at 1e-12");
    return 1e-12;
  }
  return std::sqrt(s2);
}

/// Stepwise selection with the M-regression P-value in place of the exact
/// Gaussian one; the scale is refreshed after each accepted covariate.
inline SelectionTrace m_stepwise(const Dataset& data, const SelectionConfig& cfg, const HuberLoss& loss = {},
                                 std::span<const long> excluded = {}, ExponentReading reading = ExponentReading::cdf) {
  cfg.validate();
  loss.validate();
  const long n = data.n_eff();
  if (n < 3) throw input_error("stepwise selection needs an effective sample size of at least 3");
  std::vector<char> pool(static_cast<std::size_t>(data.q()), 1);
  for (long j : excluded) {
    if (j < 0 || j >= data.q()) throw input_error("excluded index out of range");
    pool[static_cast<std::size_t>(j)] = 0;
  }
  const long q = std::count(pool.begin(), pool.end(), 1);
  const long kmx = std::min(cfg.kmx.value_or(std::min(n - 2, q)), std::min(n - 2, q));

  SelectionTrace trace;
  trace.asymptotic = true;
  trace.rss_null = data.y().squaredNorm();
  double sigma = initial_scale(data.y());
  if (!(sigma > 0.0)) {
    sigma = 1e-12;
    trace.warnings.push_back("median absolute deviation of y is zero; scale floored at 1e-12");
  }
  std::vector<long> chosen;
  MState cur = m_fit(data, chosen, sigma, loss);
  trace.reason = Termination::pvalue_above_alpha;
  for (;;) {
    const long k = static_cast<long>(chosen.size());
    if (k >= kmx) {
      trace.reason = Termination::kmx_reached;
      break;
    }
    if (q - k < 1) {
      trace.reason = Termination::pool_exhausted;
      break;
    }
    std::vector<long> cands;
    for (long j = 0; j < data.q(); ++j)
      if (pool[static_cast<std::size_t>(j)]) cands.push_back(j);
    std::vector<double> loss_with(cands.size(), std::numeric_limits<double>::infinity());
    std::vector<MState> fits(cands.size());
    parallel_for(static_cast<long>(cands.size()), cfg.threads, [&](long c) {
      std::vector<long> s = chosen;
      s.push_back(cands[static_cast<std::size_t>(c)]);
      Eigen::VectorXd start(k + 1);
      start << cur.beta, 0.0;
      MState f = m_fit(data, s, sigma, loss, start);
      loss_with[static_cast<std::size_t>(c)] = f.s0;
      fits[static_cast<std::size_t>(c)] = std::move(f);
    });
    std::size_t best = 0;
    for (std::size_t c = 1; c < cands.size(); ++c)
      if (loss_with[c] < loss_with[best]) best = c;
    const double s_nu = std::min(loss_with[best], cur.s0);
    const double p = m_pval(cur, s_nu, q, k, cfg.nu, false, reading);
    if (k >= cfg.kmn && p > cfg.alpha) {
      trace.reason = Termination::pvalue_above_alpha;
      break;
    }
    const long j = cands[best];
    chosen.push_back(j);
    pool[static_cast<std::size_t>(j)] = 0;
    if (!fits[best].converged) trace.warnings.push_back("M-fit did not converge after adding " + data.name(j));
    if (n - k - 1 >= 1) sigma = m_scale_update(fits[best], k, loss, &trace.warnings);
    cur = m_fit(data, chosen, sigma, loss, fits[best].beta);
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
    const MState smaller = m_fit(data, rest, sigma, loss);
    trace.final_pvalues.push_back(m_pval(smaller, std::min(cur.s0, smaller.s0), q, k, cfg.nu, true, reading));
  }
  return trace;
}

}  // namespace gausscov
