#pragma once

// rss of every subset of a small universe of columns.
//
// [X_U, y] is reduced once by a thin QR factorization; every subset rss is
// then a projection problem in (u+1) coordinates, enumerated depth first with
// Gram-Schmidt updates along the way.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/pvalues.hpp"
#include "gausscov/regression.hpp"

namespace gausscov {

/// A covariate subset with its rss and per-member all-subsets P-values.
struct SubsetApproximation {
  std::vector<long> indices;
  double rss = 0.0;
  std::vector<double> pvalues;
};

inline constexpr int kMaxSubsetUniverse = 25;

/// rss[mask] for every mask over `universe` (bit b stands for universe[b]).
inline std::vector<double> subset_rss_table(const Dataset& data, std::span<const long> universe) {
  const int u = static_cast<int>(universe.size());
  if (u > kMaxSubsetUniverse) {
    throw input_error("all-subsets enumeration is limited to " + std::to_string(kMaxSubsetUniverse) +
                      " covariates; supply a smaller universe");
  }
  const long n = data.n();
  Eigen::MatrixXd M(n, u + 1);
  for (int b = 0; b < u; ++b) M.col(b) = data.X().col(universe[static_cast<std::size_t>(b)]);
  M.col(u) = data.y();
  const int d = static_cast<int>(std::min<long>(n, u + 1));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
  const Eigen::VectorXd y = R.col(u);
  Eigen::VectorXd col_norm_sq(u);
  for (int b = 0; b < u; ++b) col_norm_sq[b] = R.col(b).squaredNorm();

  std::vector<double> rss(std::size_t{1} << u, 0.0);
  Eigen::MatrixXd basis(d, u);
  std::vector<Eigen::VectorXd> residuals(static_cast<std::size_t>(u) + 1);
  residuals[0] = y;
  rss[0] = y.squaredNorm();

  // depth = number of basis vectors in use; dependent columns add none.
  auto visit = [&](auto&& self, std::uint32_t mask, int next, int depth, int level) -> void {
    for (int b = next; b < u; ++b) {
      const std::uint32_t child = mask | (std::uint32_t{1} << b);
      Eigen::VectorXd v = R.col(b);
      for (int pass = 0; pass < 2 && depth > 0; ++pass) {
        v -= basis.leftCols(depth) * (basis.leftCols(depth).transpose() * v);
      }
      const double vn2 = v.squaredNorm();
      const Eigen::VectorXd& r = residuals[static_cast<std::size_t>(level)];
      if (vn2 < kCollinearityTol * col_norm_sq[b] || vn2 == 0.0) {
        rss[child] = rss[mask];
        residuals[static_cast<std::size_t>(level) + 1] = r;
        self(self, child, b + 1, depth, level + 1);
        continue;
      }
      v /= std::sqrt(vn2);
      basis.col(depth) = v;
      residuals[static_cast<std::size_t>(level) + 1] = r - v.dot(r) * v;
      rss[child] = residuals[static_cast<std::size_t>(level) + 1].squaredNorm();
      self(self, child, b + 1, depth + 1, level + 1);
    }
  };
  visit(visit, 0u, 0, 0, 0);
  return rss;
}

/// Masks whose every member passes the all-subsets test at ctx.alpha.
/// ctx.n, ctx.q and ctx.nu are used; k is taken from each mask.
inline std::vector<char> qualifying_masks(const std::vector<double>& rss, int u, PvalContext ctx) {
  std::vector<double> threshold(static_cast<std::size_t>(u) + 1, 0.0);
  for (int k = 1; k <= u; ++k) {
    ctx.k = k;
    threshold[static_cast<std::size_t>(k)] = all_subset_ratio_threshold(ctx);
  }
  std::vector<char> ok(rss.size(), 0);
  ok[0] = 1;
  for (std::uint32_t mask = 1; mask < rss.size(); ++mask) {
    const int k = std::popcount(mask);
    const double t = threshold[static_cast<std::size_t>(k)];
    bool pass = t > 0.0;
    for (std::uint32_t rest = mask; pass && rest; rest &= rest - 1) {
      const std::uint32_t bit = rest & (~rest + 1);
      const double denom = rss[mask ^ bit];
      pass = rss[mask] < denom && rss[mask] <= t * denom;
    }
    ok[mask] = pass ? 1 : 0;
  }
  return ok;
}

namespace detail {

// rss without each member from one QR: rss + b_i^2 / [(A'A)^{-1}]_ii.
// Empty when the subset is close to rank deficient.
inline std::vector<double> drop_one_rss_qr(const Dataset& sub, double& rss) {
  const Eigen::MatrixXd& A = sub.X();
  const long k = A.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::MatrixXd R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  for (long i = 0; i < k; ++i) {
    if (!(std::fabs(R(i, i)) > 1e-7 * A.col(i).norm())) return {};
  }
  const Eigen::VectorXd qty = (qr.householderQ().transpose() * sub.y()).head(k);
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::VectorXd b = Rinv * qty;
  rss = std::max(sub.y().squaredNorm() - qty.squaredNorm(), 0.0);
  std::vector<double> out(static_cast<std::size_t>(k));
  for (long i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = rss + b(i) * b(i) / Rinv.row(i).squaredNorm();
  return out;
}

}  // namespace detail

/// Per-member all-subsets P-values of `subset` (pool size q, rank nu).
inline std::vector<double> all_subset_pvalues(const Dataset& data, std::span<const long> subset, long q, long nu) {
  std::vector<double> out;
  if (subset.empty()) return out;
  const Dataset sub = data.columns(subset);
  double rss = 0.0;
  std::vector<double> without = detail::drop_one_rss_qr(sub, rss);
  if (without.empty()) {
    std::vector<long> local(subset.size());
    std::iota(local.begin(), local.end(), 0L);
    rss = fit_ls(sub, local).rss();
    for (long i : local) without.push_back(rss_drop_one(sub, local, i));
  }
  PvalContext ctx{data.n_eff(), static_cast<long>(subset.size()), 0, q, nu, 0.01};
  out.reserve(subset.size());
  for (double w : without) out.push_back(w > 0.0 ? pval_all_subset(std::min(rss, w), w, ctx) : 1.0);
  return out;
}

/// Indices of universe members present in mask, in universe order.
inline std::vector<long> mask_members(std::uint32_t mask, std::span<const long> universe) {
  std::vector<long> out;
  for (int b = 0; b < static_cast<int>(universe.size()); ++b) {
    if (mask & (std::uint32_t{1} << b)) out.push_back(universe[static_cast<std::size_t>(b)]);
  }
  return out;
}

}  // namespace gausscov
