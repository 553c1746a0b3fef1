#pragma once

// Approximation regions and per-coefficient intervals for a chosen subset.

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/regression.hpp"
#include "gausscov/special_functions.hpp"

namespace gausscov {

inline constexpr double kPivotTol = 1e-12;

/// {beta : ||y - X_S beta||^2 <= radius_rss}.
struct ApproxRegion {
  std::vector<long> subset;
  Eigen::VectorXd center;  ///< least-squares coefficients, subset order
  Eigen::MatrixXd gram;    ///< X_S^T X_S
  double rss_ls = 0.0;
  double radius_rss = 0.0;
  long n = 0;
  long k = 0;
  double alpha = 0.0;

  /// ||y - X_S beta||^2 from the quadratic expansion about the center.
  double rss_at(const Eigen::VectorXd& beta) const {
    const Eigen::VectorXd d = beta - center;
    return rss_ls + d.dot(gram * d);
  }
  bool contains(const Eigen::VectorXd& beta) const { return rss_at(beta) <= radius_rss; }

  /// Ellipsoid (beta - center)^T gram (beta - center) <= ellipsoid_radius().
  double ellipsoid_radius() const { return radius_rss - rss_ls; }
};

struct ApproxInterval {
  long index = -1;
  double center = 0.0;
  double half_width = 0.0;
  double sigma_k_sq = 0.0;       ///< (X_S^T X_S)^{-1} diagonal entry
  double partial_norm_sq = 0.0;  ///< ||x_k - Proj_{k-1} x_k||^2 = 1 / sigma_k_sq
  double alpha = 0.0;

  double lower() const { return center - half_width; }
  double upper() const { return center + half_width; }
};

namespace detail {

struct SubsetFit {
  Eigen::MatrixXd Xs;
  Eigen::VectorXd beta;
  double rss = 0.0;
};

inline SubsetFit fit_subset(const Dataset& data, std::span<const long> subset) {
  const long k = static_cast<long>(subset.size());
  if (k == 0) throw input_error("subset must not be empty");
  if (k >= data.n_eff()) throw input_error("subset size must be below the effective sample size");
  const FitState fit = fit_ls(data, subset);
  if (!fit.dependent().empty()) {
    throw input_error("subset is rank deficient: covariate " + data.name(fit.dependent().front()) +
                      " depends on the others");
  }
  SubsetFit out;
  out.Xs.resize(data.n(), k);
  for (long c = 0; c < k; ++c) out.Xs.col(c) = data.X().col(subset[static_cast<std::size_t>(c)]);
  out.beta = fit.coefficients();
  out.rss = fit.rss();
  return out;
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must lie in (0,1)");
}

}  // namespace detail

inline ApproxRegion region(const Dataset& data, std::span<const long> subset, double alpha) {
  detail::check_alpha(alpha);
  const auto fit = detail::fit_subset(data, subset);
  ApproxRegion r;
  r.subset.assign(subset.begin(), subset.end());
  r.center = fit.beta;
  r.gram = fit.Xs.transpose() * fit.Xs;
  r.rss_ls = fit.rss;
  r.n = data.n_eff();
  r.k = static_cast<long>(subset.size());
  r.alpha = alpha;
  const double b = special::beta_inv_cdf(alpha, {0.5 * (r.n - r.k), 0.5 * r.k});
  r.radius_rss = fit.rss / b;
  return r;
}

/// Interval for the coefficient of covariate `which`, a member of `subset`.
inline ApproxInterval interval(const Dataset& data, std::span<const long> subset, long which, double alpha) {
  detail::check_alpha(alpha);
  const auto pos = std::find(subset.begin(), subset.end(), which);
  if (pos == subset.end()) throw input_error("covariate is not in the subset");
  const long c = pos - subset.begin();
  const auto fit = detail::fit_subset(data, subset);
  const long n = data.n_eff();
  const long k = static_cast<long>(subset.size());

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(fit.Xs);
  const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const double sigma_sq = Rinv.row(c).squaredNorm();
  const double partial = 1.0 / sigma_sq;
  if (!(partial >= kPivotTol * fit.Xs.col(c).squaredNorm())) {
    throw input_error("covariate " + data.name(which) + " is nearly collinear with the rest of the subset");
  }

  ApproxInterval iv;
  iv.index = which;
  iv.center = fit.beta(c);
  iv.sigma_k_sq = sigma_sq;
  iv.partial_norm_sq = partial;
  iv.alpha = alpha;
  const double b = special::beta_inv_cdf(alpha, {0.5 * (n - k), 0.5});
  iv.half_width = std::sqrt(std::max(0.0, fit.rss * (1.0 / b - 1.0) * sigma_sq));
  return iv;
}

inline std::vector<ApproxInterval> intervals(const Dataset& data, std::span<const long> subset, double alpha) {
  std::vector<ApproxInterval> out;
  for (long j : subset) out.push_back(interval(data, subset, j, alpha));
  return out;
}

}  // namespace gausscov
