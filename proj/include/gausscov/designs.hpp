#pragma once

// Synthetic designs with known truth for false-positive/negative scoring.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/random.hpp"
#include "gausscov/special_functions.hpp"

namespace gausscov {

enum class DesignKind { toeplitz, random_graph, null, orthonormal };

inline DesignKind parse_design_kind(const std::string& s) {
  if (s == "toeplitz") return DesignKind::toeplitz;
  if (s == "random_graph" || s == "randomgraph") return DesignKind::random_graph;
  if (s == "null") return DesignKind::null;
  if (s == "orthonormal") return DesignKind::orthonormal;
  throw input_error("unknown design '" + s + "'");
}

struct SimDesign {
  DesignKind kind = DesignKind::toeplitz;
  long n = 1000;
  long q = 1000;
  double rho = 0.25;         ///< Toeplitz correlation
  long p_active = 60;
  double amplitude = 4.5;    ///< Toeplitz: beta = amplitude / sqrt(n); orthonormal: beta = amplitude
  double edge_scale = 23.5;  ///< random graph: edge probability phi(edge_scale * distance)
  long max_degree = 4;       ///< random graph degree cap; 0 disables it
  double partial = 0.245;    ///< random graph off-diagonal precision entry
  bool compressed = true;    ///< orthonormal: (q+1) x q sufficient form with n_eff = n
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 2 || q < 1) throw input_error("design needs n >= 2 and q >= 1");
    if (!(std::fabs(rho) < 1.0)) throw input_error("|rho| must be below 1");
    const bool planted = kind == DesignKind::toeplitz || kind == DesignKind::orthonormal;
    if (planted && (p_active < 0 || p_active > q)) throw input_error("active count must lie in [0, q]");
    if (kind == DesignKind::orthonormal && q >= n) throw input_error("orthonormal design needs q < n");
    if (kind == DesignKind::random_graph && max_degree > 0 && partial * static_cast<double>(max_degree) >= 1.0) {
      throw input_error("precision matrix would not be diagonally dominant");
    }
  }
};

struct SimData {
  Dataset data;
  std::vector<long> truth;                    ///< active covariates, sorted
  std::vector<std::pair<long, long>> edges;   ///< random graph: true edges (a < b), sorted
  Eigen::Matrix2Xd positions;                 ///< random graph node coordinates
};

namespace detail {

inline std::vector<long> choose_subset(Sampler& s, long q, long k) {
  std::vector<long> idx(static_cast<std::size_t>(q));
  std::iota(idx.begin(), idx.end(), 0L);
  for (long i = 0; i < k; ++i) std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(s.integer(i, q - 1))]);
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline Eigen::MatrixXd toeplitz_rows(Sampler& s, long n, long q, double rho) {
  // AR(1) recursion across columns reproduces Sigma_ij = rho^|i-j| exactly
  Eigen::MatrixXd X(n, q);
  const double innov = std::sqrt(1.0 - rho * rho);
  for (long i = 0; i < n; ++i) {
    X(i, 0) = s.normal();
    for (long j = 1; j < q; ++j) X(i, j) = rho * X(i, j - 1) + innov * s.normal();
  }
  return X;
}

}  // namespace detail

/// Equal coefficient meeting the orthonormal signal bound with equality:
/// b / sqrt(n + k b^2) = (sqrt(tau log q) + sqrt(2 log k)) / sqrt(n), sigma = 1.
inline double consistency_beta(long n, long q, long k, double tau) {
  const double c = (std::sqrt(tau * std::log(static_cast<double>(q))) + std::sqrt(2.0 * std::log(static_cast<double>(k)))) /
                   std::sqrt(static_cast<double>(n));
  const double denom = 1.0 - static_cast<double>(k) * c * c;
  if (!(denom > 0.0)) throw input_error("signal bound cannot be met at this n");
  return std::sqrt(c * c * static_cast<double>(n) / denom);
}

/// Random graph on q nodes uniform in the unit square; edge (i, j) with
/// probability phi(edge_scale * distance). Edges are visited in random order
/// and kept while both endpoints stay within the degree cap.
inline std::vector<std::pair<long, long>> random_graph_edges(Sampler& s, const Eigen::Matrix2Xd& pos, double edge_scale,
                                                             long max_degree) {
  const long q = pos.cols();
  std::vector<std::pair<long, long>> cand;
  for (long a = 0; a < q; ++a)
    for (long b = a + 1; b < q; ++b)
      if (s.uniform() < special::normal_pdf(edge_scale * (pos.col(a) - pos.col(b)).norm())) cand.emplace_back(a, b);
  if (max_degree <= 0) return cand;
  for (long i = static_cast<long>(cand.size()) - 1; i > 0; --i)
    std::swap(cand[static_cast<std::size_t>(i)], cand[static_cast<std::size_t>(s.integer(0, i))]);
  std::vector<long> deg(static_cast<std::size_t>(q), 0);
  std::vector<std::pair<long, long>> kept;
  for (const auto& [a, b] : cand) {
    if (deg[static_cast<std::size_t>(a)] < max_degree && deg[static_cast<std::size_t>(b)] < max_degree) {
      ++deg[static_cast<std::size_t>(a)];
      ++deg[static_cast<std::size_t>(b)];
      kept.emplace_back(a, b);
    }
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

/// Draws replication `rep` of the design; identical (seed, rep) give identical data.
inline SimData gen_design(const SimDesign& d, std::uint64_t rep = 0) {
  d.validate();
  Sampler s(d.seed, rep);
  SimData out;
  const long n = d.n, q = d.q;
  switch (d.kind) {
    case DesignKind::null: {
      Eigen::MatrixXd X(n, q);
      for (long j = 0; j < q; ++j)
        for (long i = 0; i < n; ++i) X(i, j) = s.normal();
      Eigen::VectorXd y(n);
      for (long i = 0; i < n; ++i) y(i) = s.normal();
      out.data = Dataset(std::move(X), std::move(y));
      break;
    }
    case DesignKind::toeplitz: {
      Eigen::MatrixXd X = detail::toeplitz_rows(s, n, q, d.rho);
      out.truth = detail::choose_subset(s, q, d.p_active);
      const double beta = d.amplitude / std::sqrt(static_cast<double>(n));
      Eigen::VectorXd y(n);
      for (long i = 0; i < n; ++i) y(i) = s.normal();
      for (long j : out.truth) y += beta * X.col(j);
      out.data = Dataset(std::move(X), std::move(y));
      break;
    }
    case DesignKind::orthonormal: {
      out.truth = detail::choose_subset(s, q, d.p_active);
      Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
      for (long j : out.truth) beta(j) = d.amplitude;
      if (d.compressed) {
        // X'y = beta + N(0, I_q) and the orthogonal remainder has squared norm chi^2_{n-q}
        Eigen::MatrixXd X = Eigen::MatrixXd::Zero(q + 1, q);
        X.topRows(q).setIdentity();
        Eigen::VectorXd y(q + 1);
        for (long j = 0; j < q; ++j) y(j) = beta(j) + s.normal();
        y(q) = std::sqrt(s.chi_squared(static_cast<double>(n - q)));
        out.data = Dataset(std::move(X), std::move(y)).with_n_eff(n);
      } else {
        Eigen::MatrixXd G(n, q);
        for (long j = 0; j < q; ++j)
          for (long i = 0; i < n; ++i) G(i, j) = s.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
        Eigen::MatrixXd X = qr.householderQ() * Eigen::MatrixXd::Identity(n, q);
        Eigen::VectorXd y = X * beta;
        for (long i = 0; i < n; ++i) y(i) += s.normal();
        out.data = Dataset(std::move(X), std::move(y));
      }
      break;
    }
    case DesignKind::random_graph: {
      out.positions.resize(2, q);
      for (long j = 0; j < q; ++j) out.positions.col(j) << s.uniform(), s.uniform();
      out.edges = random_graph_edges(s, out.positions, d.edge_scale, d.max_degree);
      Eigen::MatrixXd theta = Eigen::MatrixXd::Identity(q, q);
      for (const auto& [a, b] : out.edges) theta(a, b) = theta(b, a) = d.partial;
      // rows x = L^{-T} z with Theta = L L^T have covariance Theta^{-1}
      Eigen::LLT<Eigen::MatrixXd> llt(theta);
      if (llt.info() != Eigen::Success) throw numerical_error("random graph precision matrix is not positive definite");
      Eigen::MatrixXd Z(q, n);
      for (long i = 0; i < n; ++i)
        for (long j = 0; j < q; ++j) Z(j, i) = s.normal();
      Eigen::MatrixXd X = llt.matrixU().solve(Z).transpose();
      Eigen::VectorXd y = X.col(0);
      out.data = Dataset(std::move(X), std::move(y));
      break;
    }
  }
  return out;
}

}  // namespace gausscov
