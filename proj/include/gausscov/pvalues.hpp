#pragma once

// Gaussian P-values.
//
// A covariate is compared with i.i.d. standard Gaussian replacements. The
// fraction of rss a single Gaussian covariate removes is Beta(1/2, (n-k)/2)
// whatever y is, so the inner Beta gives the P-value against one competitor
// and the outer order-statistic CDF accounts for the size of the pool.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gausscov/special_functions.hpp"

namespace gausscov {

struct PvalContext {
  long n = 0;        ///< effective sample size
  long k = 0;        ///< subset size (before the step, for stepwise)
  long k0 = 0;       ///< nested subset size for joint tests
  long q = 0;        ///< candidate pool size
  long nu = 1;       ///< order-statistic rank
  double alpha = 0.01;
};

/// Outer Beta shape for the stepwise P-value.
enum class OuterShape {
  pool,     ///< Beta(nu, q-k+1-nu): nu-th smallest of the q-k remaining candidates
  literal,  ///< Beta(nu, q-k+2-nu)
};

namespace detail {

inline void require_ratio(double num, double den, const char* where) {
  if (!(den > 0.0) || !std::isfinite(den)) throw std::domain_error(std::string(where) + ": reference rss must be positive");
  if (!(num >= 0.0)) throw std::domain_error(std::string(where) + ": rss must be nonnegative");
  if (num > den * (1.0 + 1e-12)) throw std::domain_error(std::string(where) + ": rss exceeds the reference rss");
}

inline double ratio_of(double num, double den) { return std::min(num / den, 1.0); }

}  // namespace detail

/// CDF of the nu-th smallest of m i.i.d. uniforms, Beta(nu, m+1-nu) at u.
inline double order_stat_cdf(double u, long nu, long m) {
  if (m < 1 || nu < 1 || nu > m) throw std::domain_error("order_stat_cdf: need 1 <= nu <= m");
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  if (nu == 1) return -std::expm1(static_cast<double>(m) * std::log1p(-u));
  return special::beta_cdf(u, {static_cast<double>(nu), static_cast<double>(m + 1 - nu)});
}

/// Inverse of order_stat_cdf in u.
inline double order_stat_quantile(double p, long nu, long m) {
  if (m < 1 || nu < 1 || nu > m) throw std::domain_error("order_stat_quantile: need 1 <= nu <= m");
  if (nu == 1) return -std::expm1(std::log1p(-p) / static_cast<double>(m));
  return special::beta_inv_cdf(p, {static_cast<double>(nu), static_cast<double>(m + 1 - nu)});
}

/// Joint P-value of k - k0 covariates: Beta((n-k)/2, (k-k0)/2) at rss/rss0.
inline double pval_joint(double rss, double rss0, const PvalContext& c) {
  detail::require_ratio(rss, rss0, "pval_joint");
  if (c.k <= c.k0 || c.k >= c.n) throw std::domain_error("pval_joint: need k0 < k < n");
  return special::beta_cdf(detail::ratio_of(rss, rss0),
                           {0.5 * static_cast<double>(c.n - c.k), 0.5 * static_cast<double>(c.k - c.k0)});
}

/// The same P-value through the F statistic.
inline double pval_joint_f(double rss, double rss0, const PvalContext& c) {
  detail::require_ratio(rss, rss0, "pval_joint_f");
  if (c.k <= c.k0 || c.k >= c.n) throw std::domain_error("pval_joint_f: need k0 < k < n");
  const double d1 = static_cast<double>(c.k - c.k0);
  const double d2 = static_cast<double>(c.n - c.k);
  if (rss == 0.0) return 0.0;
  const double f = (std::max(rss0 - rss, 0.0) / d1) / (rss / d2);
  return special::f_sf(f, d1, d2);
}

/// All-subsets P-value of member i of a k-subset, with pool size q:
/// Beta(nu, q-k+2-nu) at Beta((n-k)/2, 1/2)(rss_k / rss_{k,-i}).
inline double pval_all_subset(double rss_k, double rss_k_minus_i, const PvalContext& c) {
  detail::require_ratio(rss_k, rss_k_minus_i, "pval_all_subset");
  if (c.k < 1 || c.k >= c.n || c.k > c.q) throw std::domain_error("pval_all_subset: need 1 <= k <= q and k < n");
  const long m = c.q - c.k + 1;
  const long nu = std::clamp<long>(c.nu, 1, m);
  const double u =
      special::beta_cdf(detail::ratio_of(rss_k, rss_k_minus_i), {0.5 * static_cast<double>(c.n - c.k), 0.5});
  return order_stat_cdf(u, nu, m);
}

/// Stepwise P-value of the best candidate when k covariates are already in:
/// outer Beta at Beta((n-k-1)/2, 1/2)(rss_{k,+b} / rss_k).
inline double pval_stepwise(double rss_k_plus_b, double rss_k, const PvalContext& c,
                            OuterShape shape = OuterShape::pool) {
  detail::require_ratio(rss_k_plus_b, rss_k, "pval_stepwise");
  if (c.n - c.k - 1 <= 0) throw std::domain_error("pval_stepwise: no residual degrees of freedom");
  if (c.k < 0 || c.q - c.k < 1) throw std::domain_error("pval_stepwise: empty candidate pool");
  const long m = c.q - c.k + (shape == OuterShape::literal ? 1 : 0);
  if (c.nu < 1) throw std::domain_error("pval_stepwise: nu must be at least 1");
  const long nu = std::min(c.nu, c.q - c.k);
  const double u =
      special::beta_cdf(detail::ratio_of(rss_k_plus_b, rss_k), {0.5 * static_cast<double>(c.n - c.k - 1), 0.5});
  return order_stat_cdf(u, nu, m);
}

/// Reading of the exponent in the asymptotic P-values 1 - F(stat)^m.
enum class ExponentReading {
  cdf,       ///< 1 - F^m, nu-th order statistic of the m survival values
  survival,  ///< (1 - F)^m, exponent on the survival value; nu = 1 only
};

/// Asymptotic P-value of a chi-square(1) statistic for the best of m candidates.
inline double pval_chisq_order(double stat, long m, long nu = 1, ExponentReading reading = ExponentReading::cdf) {
  if (m < 1) throw std::domain_error("pval_chisq_order: empty candidate pool");
  if (!(stat >= 0.0)) throw std::domain_error("pval_chisq_order: negative statistic");
  const double u = special::chisq_sf(stat, 1.0);
  if (reading == ExponentReading::survival) {
    if (nu != 1) throw std::domain_error("pval_chisq_order: survival reading needs nu = 1");
    return std::pow(u, static_cast<double>(m));
  }
  return order_stat_cdf(u, std::clamp<long>(nu, 1, m), m);
}

/// Largest ratio rss_{k,+b}/rss_k accepted by the stepwise rule at c.alpha.
inline double stepwise_ratio_threshold(const PvalContext& c, OuterShape shape = OuterShape::pool) {
  if (c.n - c.k - 1 <= 0 || c.q - c.k < 1) return 0.0;
  const long m = c.q - c.k + (shape == OuterShape::literal ? 1 : 0);
  const long nu = std::min(std::max<long>(c.nu, 1), c.q - c.k);
  const double u = order_stat_quantile(c.alpha, nu, m);
  return special::beta_inv_cdf(u, {0.5 * static_cast<double>(c.n - c.k - 1), 0.5});
}

/// Largest ratio rss_k/rss_{k,-i} for which a member of a k-subset passes.
inline double all_subset_ratio_threshold(const PvalContext& c) {
  if (c.k < 1 || c.k >= c.n || c.k > c.q) return 0.0;
  const long m = c.q - c.k + 1;
  const long nu = std::clamp<long>(c.nu, 1, m);
  const double u = order_stat_quantile(c.alpha, nu, m);
  return special::beta_inv_cdf(u, {0.5 * static_cast<double>(c.n - c.k), 0.5});
}

/// Stepwise threshold on |x~' y| / |Q_S y|: sqrt(Beta^{-1}_{1/2,(n-1)/2}((1-alpha)^{1/q})).
inline double kappa(double n, double q, double alpha) {
  if (!(n >= 3.0) || !(q >= 1.0)) throw std::domain_error("kappa: need n >= 3 and q >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("kappa: alpha must lie in (0,1)");
  const double tail = -std::expm1(std::log1p(-alpha) / q);
  return std::sqrt(special::beta_inv_sf(tail, {0.5, 0.5 * (n - 1.0)}));
}

}  // namespace gausscov
