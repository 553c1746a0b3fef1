#pragma once

// Least squares by incremental modified Gram-Schmidt.
//
// FitState keeps every remaining candidate orthogonalized against the
// selected span, together with its inner product with the current residual,
// so rss_{k,+i} = rss_k - (x~_i' r)^2 / |x~_i|^2 costs O(1) per candidate and
// adding a column costs O(n q).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/parallel.hpp"

namespace gausscov {

/// Relative squared-norm threshold below which a column counts as dependent.
inline constexpr double kCollinearityTol = 1e-10;

struct Candidate {
  long index = -1;
  double rss_next = 0.0;
};

class FitState {
 public:
  /// Empty fit. Columns listed in `excluded` never become candidates.
  explicit FitState(const Dataset& data, std::span<const long> excluded = {}, int threads = 1)
      : data_(&data), threads_(threads) {
    const long q = data.q();
    status_.assign(static_cast<std::size_t>(q), Status::candidate);
    for (long j : excluded) {
      if (j < 0 || j >= q) throw input_error("excluded column index out of range");
      status_[static_cast<std::size_t>(j)] = Status::excluded;
    }
    pool_size_ = static_cast<long>(std::count(status_.begin(), status_.end(), Status::candidate));
    residual_ = data.y();
    rss_ = residual_.squaredNorm();
    norm0_sq_.resize(q);
    norm_sq_.resize(q);
    dot_.resize(q);
    for (long j = 0; j < q; ++j) {
      const auto col = data.X().col(j);
      norm0_sq_[j] = col.squaredNorm();
      norm_sq_[j] = norm0_sq_[j];
      dot_[j] = col.dot(residual_);
    }
  }

  const Dataset& data() const { return *data_; }
  long size() const { return static_cast<long>(selected_.size()); }
  double rss() const { return rss_; }
  const std::vector<long>& selected() const { return selected_; }
  const Eigen::VectorXd& residual() const { return residual_; }
  /// Columns rejected by fit_ls because they lay in the span of earlier ones.
  const std::vector<long>& dependent() const { return dependent_; }
  /// Number of columns that were ever candidates (q minus exclusions).
  long pool_size() const { return pool_size_; }
  long remaining() const { return pool_size_ - size(); }

  bool is_candidate(long j) const { return status_[static_cast<std::size_t>(j)] == Status::candidate; }

  /// Candidate j is admissible when its orthogonal part is not negligible.
  bool admissible(long j) const {
    return is_candidate(j) && norm_sq_[j] >= kCollinearityTol * norm0_sq_[j] && norm_sq_[j] > 0.0;
  }

  /// rss after adding candidate j.
  double rss_with(long j) const {
    if (!admissible(j)) return rss_;
    const double r = rss_ - dot_[j] * dot_[j] / norm_sq_[j];
    return std::max(r, 0.0);
  }

  /// Admissible candidate with the smallest rss_{k,+i}; lowest index on ties.
  std::optional<Candidate> best_candidate() const {
    std::optional<Candidate> best;
    double best_gain = -1.0;
    for (long j = 0; j < data_->q(); ++j) {
      if (!admissible(j)) continue;
      const double gain = dot_[j] * dot_[j] / norm_sq_[j];
      if (gain > best_gain) {
        best_gain = gain;
        best = Candidate{j, std::max(rss_ - gain, 0.0)};
      }
    }
    return best;
  }

  /// Adds candidate j to the fit.
  void advance(long j) {
    if (j < 0 || j >= data_->q()) throw input_error("column index out of range");
    if (!admissible(j)) {
      throw numerical_error("column " + std::to_string(j + 1) + " is not an admissible candidate");
    }
    if (work_.size() == 0) work_ = data_->X();
    const long n = data_->n();
    const long k = size();

    Eigen::VectorXd u = work_.col(j);
    // Second Gram-Schmidt pass against the stored basis keeps u orthogonal
    // when the candidate was nearly dependent.
    if (k > 0) u -= basis_.leftCols(k) * (basis_.leftCols(k).transpose() * u);
    const double unorm = u.norm();
    if (!(unorm > 0.0)) throw numerical_error("column " + std::to_string(j + 1) + " lost rank during update");
    u /= unorm;

    if (basis_.cols() <= k) {
      const long cap = std::max<long>(8, 2 * (k + 1));
      basis_.conservativeResize(n, std::min(cap, n));
      R_.conservativeResize(std::min(cap, n), std::min(cap, n));
      qty_.conservativeResize(std::min(cap, n));
    }
    basis_.col(k) = u;
    const auto x = data_->X().col(j);
    for (long i = 0; i <= k; ++i) R_(i, k) = basis_.col(i).dot(x);
    for (long i = 0; i < k; ++i) R_(k, i) = 0.0;
    qty_(k) = u.dot(data_->y());

    status_[static_cast<std::size_t>(j)] = Status::selected;
    selected_.push_back(j);

    residual_ -= u.dot(residual_) * u;
    rss_ = residual_.squaredNorm();

    const long q = data_->q();
    parallel_for(q, threads_, [&](long c) {
      if (status_[static_cast<std::size_t>(c)] != Status::candidate) return;
      auto w = work_.col(c);
      w -= u.dot(w) * u;
      norm_sq_[c] = w.squaredNorm();
      dot_[c] = w.dot(residual_);
    });
  }

  /// Marks j as a dependent column; it will not be offered again.
  void reject(long j) {
    status_[static_cast<std::size_t>(j)] = Status::excluded;
    dependent_.push_back(j);
  }

  /// Least-squares coefficients in the order of selected().
  Eigen::VectorXd coefficients() const {
    const long k = size();
    if (k == 0) return {};
    return R_.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(qty_.head(k));
  }

 private:
  enum class Status : unsigned char { candidate, selected, excluded };

  const Dataset* data_;
  int threads_;
  std::vector<Status> status_;
  long pool_size_ = 0;
  std::vector<long> selected_;
  std::vector<long> dependent_;
  Eigen::VectorXd residual_;
  double rss_ = 0.0;
  Eigen::VectorXd norm0_sq_;
  Eigen::VectorXd norm_sq_;
  Eigen::VectorXd dot_;
  Eigen::MatrixXd work_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd R_;
  Eigen::VectorXd qty_;
};

/// Least-squares fit on `subset` in the given order. Columns dependent on
/// earlier ones are skipped and listed in dependent().
inline FitState fit_ls(const Dataset& data, std::span<const long> subset) {
  std::vector<long> seen(subset.begin(), subset.end());
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) throw input_error("subset indices must be distinct");
  if (static_cast<long>(subset.size()) >= data.n()) throw input_error("subset size must be below the sample size");
  FitState state(data);
  for (long j : subset) {
    if (j < 0 || j >= data.q()) throw input_error("subset index out of range");
    if (state.admissible(j)) {
      state.advance(j);
    } else {
      state.reject(j);
    }
  }
  return state;
}

inline FitState fit_ls(const Dataset& data, std::initializer_list<long> subset) {
  return fit_ls(data, std::span<const long>(subset.begin(), subset.size()));
}

/// rss of `subset` with member i removed.
inline double rss_drop_one(const Dataset& data, std::span<const long> subset, long i) {
  if (subset.empty()) throw input_error("subset must not be empty");
  if (std::find(subset.begin(), subset.end(), i) == subset.end()) throw input_error("index is not in the subset");
  std::vector<long> rest;
  for (long j : subset) {
    if (j != i) rest.push_back(j);
  }
  return fit_ls(data, rest).rss();
}

}  // namespace gausscov
