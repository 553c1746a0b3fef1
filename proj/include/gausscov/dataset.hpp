#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/errors.hpp"

namespace gausscov {

/// Response y and design X. X is shared between datasets that differ only
/// in the response (graph construction regresses each column on the rest).
///
/// `n_eff()` is the sample size entering every Beta shape: n, or n - 1 after
/// centering. It may also be set explicitly for designs that were reduced to
/// fewer rows by an orthogonal transformation.
class Dataset {
 public:
  Dataset() = default;

  Dataset(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<std::string> names = {})
      : X_(std::make_shared<const Eigen::MatrixXd>(std::move(X))), y_(std::move(y)), names_(std::move(names)) {
    validate();
  }

  long n() const { return X_ ? X_->rows() : 0; }
  long q() const { return X_ ? X_->cols() : 0; }
  long n_eff() const { return n_eff_ ? *n_eff_ : n() - (centered_ ? 1 : 0); }
  bool centered() const { return centered_; }

  const Eigen::MatrixXd& X() const { return *X_; }
  const Eigen::VectorXd& y() const { return y_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(long j) const { return names_.at(static_cast<std::size_t>(j)); }
  std::shared_ptr<const Eigen::MatrixXd> shared_X() const { return X_; }

  /// Same design, new response.
  Dataset with_response(Eigen::VectorXd y) const {
    Dataset d = *this;
    d.y_ = std::move(y);
    d.check_response();
    return d;
  }

  /// Design restricted to `cols` (in that order); response and n_eff kept.
  Dataset columns(std::span<const long> cols) const {
    Eigen::MatrixXd X(n(), static_cast<long>(cols.size()));
    std::vector<std::string> names;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (cols[c] < 0 || cols[c] >= q()) throw input_error("column index out of range");
      X.col(static_cast<long>(c)) = X_->col(cols[c]);
      if (!names_.empty()) names.push_back(names_[static_cast<std::size_t>(cols[c])]);
    }
    Dataset d = *this;
    d.X_ = std::make_shared<const Eigen::MatrixXd>(std::move(X));
    d.names_ = std::move(names);
    return d;
  }

  Dataset with_n_eff(long n_eff) const {
    if (n_eff < 2) throw input_error("effective sample size must be at least 2");
    Dataset d = *this;
    d.n_eff_ = n_eff;
    return d;
  }

  /// Subtracts column and response means; Beta shapes then use n - 1.
  Dataset centered_copy() const {
    if (centered_) return *this;
    Eigen::MatrixXd X = *X_;
    X.rowwise() -= X.colwise().mean();
    Dataset d;
    d.X_ = std::make_shared<const Eigen::MatrixXd>(std::move(X));
    d.y_ = y_.array() - y_.mean();
    d.names_ = names_;
    d.centered_ = true;
    d.n_eff_ = n_eff_;
    d.validate();
    return d;
  }

  /// Marks the data as already centered without touching it.
  Dataset mark_centered() const {
    Dataset d = *this;
    d.centered_ = true;
    return d;
  }

 private:
  void validate() {
    if (!X_) throw input_error("design matrix missing");
    if (X_->rows() < 2) throw input_error("need at least 2 observations");
    if (X_->cols() < 1) throw input_error("need at least 1 covariate");
    if (!X_->allFinite()) throw input_error("design matrix contains non-finite entries");
    if (names_.empty()) {
      names_.reserve(static_cast<std::size_t>(X_->cols()));
      for (long j = 0; j < X_->cols(); ++j) names_.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<long>(names_.size()) != X_->cols()) throw input_error("column name count does not match the design");
    for (long j = 0; j < X_->cols(); ++j) {
      if (X_->col(j).squaredNorm() == 0.0) {
        throw input_error("covariate " + names_[static_cast<std::size_t>(j)] + " (column " + std::to_string(j + 1) +
                          ") is identically zero" + (centered_ ? " after centering" : ""));
      }
    }
    check_response();
  }

  void check_response() const {
    if (y_.size() != X_->rows()) throw input_error("response length does not match the design");
    if (!y_.allFinite()) throw input_error("response contains non-finite entries");
  }

  std::shared_ptr<const Eigen::MatrixXd> X_;
  Eigen::VectorXd y_;
  std::vector<std::string> names_;
  bool centered_ = false;
  std::optional<long> n_eff_;
};

}  // namespace gausscov
