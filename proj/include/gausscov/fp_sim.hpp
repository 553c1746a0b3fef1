#pragma once

// Null simulations of the stepwise procedure: y is regressed on q i.i.d.
// Gaussian covariates and every selected covariate is a false positive.
//
// Two engines. `dense` draws the n x q design and runs the stepwise fit.
// `rotational` uses the rotation invariance of the Gaussian design: only the
// coordinate of each column along the current residual direction and the
// squared norm of its part outside the span built so far are tracked. Each
// accepted step draws one new coordinate per column. Both engines produce
// the same law of false-positive counts.

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gausscov/dataset.hpp"
#include "gausscov/errors.hpp"
#include "gausscov/parallel.hpp"
#include "gausscov/pvalues.hpp"
#include "gausscov/random.hpp"
#include "gausscov/regression.hpp"

namespace gausscov {

enum class FpEngine { rotational, dense };

struct FpSimConfig {
  long n = 0;
  long q = 0;
  double alpha = 0.01;
  long nu = 1;
  long nsim = 1000;
  std::uint64_t seed = 1;
  bool per_covariate = false;  ///< graph mode: q - 1 candidates at cut-off alpha / q
  FpEngine engine = FpEngine::rotational;
  int threads = 1;
  std::optional<Eigen::VectorXd> y;  ///< dense engine only; defaults to 1..n
};

struct FpHistogram {
  std::map<long, double> counts;  ///< false-positive count -> relative frequency
  double mean = 0.0;
  double sd = 0.0;
  long nsim = 0;
  long n = 0;
  long q = 0;
  double alpha = 0.0;
  long nu = 1;
  std::uint64_t seed = 0;
  bool per_covariate = false;

  double frequency(long c) const {
    const auto it = counts.find(c);
    return it == counts.end() ? 0.0 : it->second;
  }
};

namespace detail {

struct NullRule {
  double alpha;
  long nu;
};

inline FpHistogram make_histogram(const std::vector<long>& raw) {
  FpHistogram h;
  h.nsim = static_cast<long>(raw.size());
  std::map<long, long> tally;
  for (long c : raw) ++tally[c];
  const double total = static_cast<double>(raw.size());
  for (const auto& [c, m] : tally) h.counts[c] = static_cast<double>(m) / total;
  double s = 0.0, s2 = 0.0;
  for (const auto& [c, f] : h.counts) {
    s += f * static_cast<double>(c);
    s2 += f * static_cast<double>(c) * static_cast<double>(c);
  }
  h.mean = s;
  h.sd = std::sqrt(std::max(0.0, s2 - s * s));
  return h;
}

/// Ratio thresholds by step k for each rule; extended on demand, thread safe.
class ThresholdTable {
 public:
  ThresholdTable(long n, long q_pool, std::vector<NullRule> rules, long k_hint)
      : n_(n), q_(q_pool), rules_(std::move(rules)) {
    for (long k = 0; k < k_hint; ++k) push_row();
  }
  double at(std::size_t rule, long k) {
    const std::lock_guard<std::mutex> lock(mu_);
    while (static_cast<long>(rows_.size()) <= k) push_row();
    return rows_[static_cast<std::size_t>(k)][rule];
  }
  const std::vector<NullRule>& rules() const { return rules_; }

 private:
  void push_row() {
    const long k = static_cast<long>(rows_.size());
    std::vector<double> row;
    for (const auto& r : rules_) row.push_back(stepwise_ratio_threshold(PvalContext{n_, k, 0, q_, r.nu, r.alpha}));
    rows_.push_back(std::move(row));
  }
  long n_, q_;
  std::vector<NullRule> rules_;
  std::vector<std::vector<double>> rows_;
  std::mutex mu_;
};

/// One null path shared by every rule: the best candidate does not depend
/// on alpha or nu, only the stopping step does.
template <class Engine>
std::vector<long> count_null_path(Engine& eng, long n, long q_pool, ThresholdTable& thresholds) {
  const std::size_t nr = thresholds.rules().size();
  std::vector<long> count(nr, -1);
  std::size_t active = nr;
  const long kmx = std::min(n - 2, q_pool);
  for (long k = 0;; ++k) {
    if (k >= kmx || q_pool - k < 1 || n - k - 1 <= 0) {
      for (auto& c : count)
        if (c < 0) c = k;
      break;
    }
    const double ratio = eng.best_ratio();
    for (std::size_t r = 0; r < nr; ++r) {
      if (count[r] < 0 && ratio > thresholds.at(r, k)) {
        count[r] = k;
        --active;
      }
    }
    if (active == 0) break;
    eng.advance();
  }
  return count;
}

class RotationalNull {
 public:
  RotationalNull(long n, long q, Sampler& s) : n_(n), s_(s), d_(q), t_(q) {
    for (long j = 0; j < q; ++j) {
      d_[j] = s_.normal();
      t_[j] = s_.chi_squared(static_cast<double>(n - 1));
    }
  }

  /// rss ratio of the best candidate; the fraction removed is d^2 / (d^2 + T).
  double best_ratio() {
    best_ = -1;
    double best_f = -1.0;
    for (std::size_t j = 0; j < d_.size(); ++j) {
      if (t_[j] < 0.0) continue;
      const double d2 = d_[j] * d_[j];
      const double f = d2 / (d2 + t_[j]);
      if (f > best_f) {
        best_f = f;
        best_ = static_cast<long>(j);
      }
    }
    return best_ < 0 ? 1.0 : 1.0 - best_f;
  }

  void advance() {
    const auto b = static_cast<std::size_t>(best_);
    const double db = d_[b];
    const double tb = t_[b];
    const double norm = std::sqrt(db * db + tb);
    const double sb = std::sqrt(tb);
    // Coordinate of a uniform direction in the complement of dimension
    // n - dim: g / sqrt(g^2 + V) with V ~ chi^2_{n-dim-1}.
    const double df = static_cast<double>(n_ - dim_ - 1);
    std::gamma_distribution<double> half_chi(df > 0.0 ? 0.5 * df : 1.0);
    for (std::size_t j = 0; j < d_.size(); ++j) {
      if (j == b || t_[j] < 0.0) continue;
      const double g = s_.normal();
      const double v = df > 0.0 ? 2.0 * half_chi(s_.stream()) : 0.0;
      const double scale = std::sqrt(t_[j] / (g * g + v));
      const double z = g * scale;
      t_[j] = v * scale * scale;
      d_[j] = (sb * d_[j] - db * z) / norm;
    }
    t_[b] = -1.0;
    ++dim_;
  }

 private:
  long n_;
  long dim_ = 1;  ///< span of the response and the selected columns
  Sampler& s_;
  std::vector<double> d_;
  std::vector<double> t_;
  long best_ = -1;
};

class DenseNull {
 public:
  DenseNull(const Dataset& data) : state_(data) {}
  double best_ratio() {
    cand_ = state_.best_candidate();
    if (!cand_ || !(state_.rss() > 0.0)) return 1.0;
    return std::min(cand_->rss_next, state_.rss()) / state_.rss();
  }
  void advance() { state_.advance(cand_->index); }

 private:
  FitState state_;
  std::optional<Candidate> cand_;
};

}  // namespace detail

/// Histograms for every (alpha, nu) pair, alpha-major, from shared paths.
inline std::vector<FpHistogram> simulate_fp_grid(const FpSimConfig& cfg, const std::vector<double>& alphas,
                                                 const std::vector<long>& nus) {
  if (cfg.n < 3) throw input_error("null simulation needs n >= 3");
  if (cfg.q < 1 || (cfg.per_covariate && cfg.q < 2)) throw input_error("null simulation needs more covariates");
  if (cfg.nsim < 1) throw input_error("nsim must be at least 1");
  if (alphas.empty() || nus.empty()) throw input_error("empty alpha or nu list");
  std::vector<detail::NullRule> rules;
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) throw input_error("alpha must lie in (0,1)");
    for (long v : nus) {
      if (v < 1) throw input_error("nu must be at least 1");
      rules.push_back({cfg.per_covariate ? a / static_cast<double>(cfg.q) : a, v});
    }
  }
  const long q_pool = cfg.per_covariate ? cfg.q - 1 : cfg.q;
  Eigen::VectorXd y;
  if (cfg.engine == FpEngine::dense) {
    y = cfg.y ? *cfg.y : Eigen::VectorXd::LinSpaced(cfg.n, 1.0, static_cast<double>(cfg.n));
    if (y.size() != cfg.n || !(y.squaredNorm() > 0.0)) throw input_error("response must be a nonzero vector of length n");
  }

  std::vector<std::vector<long>> per_rep(static_cast<std::size_t>(cfg.nsim));
  detail::ThresholdTable table(cfg.n, q_pool, rules, 8);
  parallel_for(cfg.nsim, cfg.threads, [&](long rep) {
    Sampler s(cfg.seed, static_cast<std::uint64_t>(rep));
    if (cfg.engine == FpEngine::rotational) {
      detail::RotationalNull eng(cfg.n, q_pool, s);
      per_rep[static_cast<std::size_t>(rep)] = detail::count_null_path(eng, cfg.n, q_pool, table);
    } else {
      Eigen::MatrixXd X(cfg.n, q_pool);
      for (long j = 0; j < q_pool; ++j)
        for (long i = 0; i < cfg.n; ++i) X(i, j) = s.normal();
      const Dataset data(std::move(X), y);
      detail::DenseNull eng(data);
      per_rep[static_cast<std::size_t>(rep)] = detail::count_null_path(eng, cfg.n, q_pool, table);
    }
  });

  std::vector<FpHistogram> out;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    std::vector<long> raw;
    raw.reserve(per_rep.size());
    for (const auto& v : per_rep) raw.push_back(v[r]);
    FpHistogram h = detail::make_histogram(raw);
    h.n = cfg.n;
    h.q = cfg.q;
    h.alpha = alphas[r / nus.size()];
    h.nu = nus[r % nus.size()];
    h.seed = cfg.seed;
    h.per_covariate = cfg.per_covariate;
    out.push_back(std::move(h));
  }
  return out;
}

inline FpHistogram simulate_fp(const FpSimConfig& cfg) { return simulate_fp_grid(cfg, {cfg.alpha}, {cfg.nu}).front(); }

}  // namespace gausscov
