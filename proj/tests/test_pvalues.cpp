#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gausscov/pvalues.hpp"
#include "gausscov/regression.hpp"
#include "test_util.hpp"

using namespace gausscov;
using special::beta_cdf;

namespace {

double rss_of(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  if (A.cols() == 0) return y.squaredNorm();
  return (y - A * A.colPivHouseholderQr().solve(y)).squaredNorm();
}

Eigen::VectorXd ramp(long n) { return Eigen::VectorXd::LinSpaced(n, 1.0, static_cast<double>(n)); }

}  // namespace

TEST(PvalJoint, Boundaries) {
  const PvalContext c{50, 5, 2, 100, 1, 0.01};
  EXPECT_DOUBLE_EQ(pval_joint(3.0, 3.0, c), 1.0);
  EXPECT_DOUBLE_EQ(pval_joint(0.0, 3.0, c), 0.0);
  EXPECT_THROW(pval_joint(4.0, 3.0, c), std::domain_error);
  EXPECT_THROW(pval_joint(1.0, 0.0, c), std::domain_error);
}

TEST(PvalJoint, BetaAndFRoutesAgree) {
  Sampler s(1, 0);
  for (int i = 0; i < 2000; ++i) {
    const long n = s.integer(3, 10000);
    const long dk = s.integer(1, std::min<long>(50, n - 2));
    const long k0 = s.integer(0, n - 2 - dk);
    const long k = k0 + dk;
    const double ratio = s.uniform();
    const PvalContext c{n, k, k0, k, 1, 0.01};
    EXPECT_NEAR(pval_joint(ratio, 1.0, c), pval_joint_f(ratio, 1.0, c), 1e-10) << n << " " << k << " " << k0;
  }
}

TEST(PvalJoint, ExactLawForFixedResponse) {
  // y fixed, one fixed covariate, two Gaussian covariates drawn afresh each time.
  const long n = 30, k = 3, k0 = 1;
  const Eigen::VectorXd y = ramp(n);
  Eigen::MatrixXd A(n, k);
  A.col(0) = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0).array().sin();
  const double rss0 = rss_of(A.leftCols(1), y);
  Sampler s(2, 0);
  std::vector<double> ratios;
  for (int rep = 0; rep < 10000; ++rep) {
    for (long j = 1; j < k; ++j)
      for (long i = 0; i < n; ++i) A(i, j) = s.normal();
    ratios.push_back(rss_of(A, y) / rss0);
  }
  const double ks = testutil::ks_distance(ratios, [&](double x) {
    return beta_cdf(std::min(x, 1.0), {0.5 * (n - k), 0.5 * (k - k0)});
  });
  EXPECT_LT(ks, 0.02);
}

TEST(PvalAllSubset, ReducesToSingleTestWhenPoolIsFull) {
  const PvalContext c{40, 6, 0, 6, 1, 0.01};
  for (double r : {0.2, 0.7, 0.95}) {
    EXPECT_NEAR(pval_all_subset(r, 1.0, c), beta_cdf(r, {0.5 * (40 - 6), 0.5}), 1e-15);
  }
  EXPECT_DOUBLE_EQ(pval_all_subset(2.0, 2.0, c), 1.0);
}

TEST(PvalAllSubset, OrderStatisticForm) {
  const PvalContext c{20, 3, 0, 10, 1, 0.01};
  const double u = beta_cdf(0.5, {8.5, 0.5});
  EXPECT_NEAR(pval_all_subset(0.5, 1.0, c), 1.0 - std::pow(1.0 - u, 8), 1e-14);
}

TEST(PvalAllSubset, MatchesGaussianReplacementFrequency) {
  // Replace x_i and the q-k unused covariates by Gaussian noise and count how
  // often the best replacement beats x_i.
  const long n = 20, q = 6, k = 3;
  const Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 3);
  Eigen::VectorXd y = testutil::gaussian_vector(n, 4) + 0.4 * X.col(0);
  Eigen::MatrixXd others(n, k - 1);
  others << X.col(1), X.col(2);
  Eigen::MatrixXd full(n, k);
  full << X.col(0), others;
  const double rss_k = rss_of(full, y);
  const double rss_minus = rss_of(others, y);
  const double p = pval_all_subset(rss_k, rss_minus, PvalContext{n, k, 0, q, 1, 0.01});
  Sampler s(5, 0);
  const int reps = 10000;
  int hits = 0;
  Eigen::MatrixXd trial(n, k);
  trial.rightCols(k - 1) = others;
  for (int rep = 0; rep < reps; ++rep) {
    bool beaten = false;
    for (long z = 0; z < q - k + 1; ++z) {
      for (long i = 0; i < n; ++i) trial(i, 0) = s.normal();
      if (rss_of(trial, y) <= rss_k) beaten = true;
    }
    hits += beaten;
  }
  const double freq = static_cast<double>(hits) / reps;
  EXPECT_NEAR(freq, p, 3.0 * std::sqrt(p * (1 - p) / reps) + 1e-3) << p;
}

TEST(PvalAllSubset, SimulationDefinitionAtFullPool) {
  const long n = 12, q = 3;
  const Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 6);
  const Eigen::VectorXd y = ramp(n);
  const double rss_q = rss_of(X, y);
  Eigen::MatrixXd rest(n, q - 1);
  rest << X.col(1), X.col(2);
  const double p = pval_all_subset(rss_q, rss_of(rest, y), PvalContext{n, q, 0, q, 1, 0.01});
  Sampler s(7, 0);
  const int reps = 10000;
  int hits = 0;
  Eigen::MatrixXd trial = X;
  for (int rep = 0; rep < reps; ++rep) {
    for (long i = 0; i < n; ++i) trial(i, 0) = s.normal();
    hits += rss_of(trial, y) <= rss_q;
  }
  const double freq = static_cast<double>(hits) / reps;
  EXPECT_NEAR(freq, p, 3.0 * std::sqrt(p * (1 - p) / reps) + 1e-3);
}

TEST(PvalStepwise, RatioOneGivesOne) {
  EXPECT_DOUBLE_EQ(pval_stepwise(5.0, 5.0, PvalContext{100, 2, 0, 50, 1, 0.01}), 1.0);
  EXPECT_DOUBLE_EQ(pval_stepwise(5.0, 5.0, PvalContext{100, 2, 0, 50, 4, 0.01}), 1.0);
}

TEST(PvalStepwise, InnerLevelCorrespondingToOnePercent) {
  // Inner P-value at which the outer P-value equals 0.01 with k=1, q=176358.
  const long q = 176358, k = 1;
  const double inner = order_stat_quantile(0.01, 1, q - k);
  EXPECT_NEAR(inner, -std::expm1(std::log1p(-0.01) / (q - k)), 1e-20);
  EXPECT_NEAR(inner, 5.6989e-08, 1e-12);
  // The published figure 5.025168e-08 equals -log(0.99)/200000 instead.
  const double published = 5.025168e-08;
  EXPECT_NEAR(-std::log(0.99) / 200000.0, published, 1e-14);
  EXPECT_GT(std::fabs(inner - published) / inner, 0.1);
  EXPECT_NEAR(order_stat_cdf(inner, 1, q - k), 0.01, 1e-12);
}

TEST(PvalStepwise, OrderRankMonotone) {
  const long m = 100;
  // At u = 0.9 both CDFs round to 1; compare the upper tails instead.
  const double tail1 = special::beta_sf(0.9, {1.0, 100.0});
  const double tail10 = special::beta_sf(0.9, {10.0, 91.0});
  EXPECT_GT(tail10, tail1);
  EXPECT_LE(order_stat_cdf(0.9, 10, m), order_stat_cdf(0.9, 1, m));
  EXPECT_LT(order_stat_cdf(0.01, 10, m), order_stat_cdf(0.01, 1, m));
  // Brute force: nu-th smallest of m simulated uniforms.
  Sampler s(8, 0);
  const int reps = 100000;
  int hit1 = 0, hit10 = 0;
  std::vector<double> u(m);
  for (int r = 0; r < reps; ++r) {
    for (auto& v : u) v = s.uniform();
    std::nth_element(u.begin(), u.begin() + 9, u.end());
    hit10 += u[9] <= 0.05;
    hit1 += *std::min_element(u.begin(), u.begin() + 10) <= 0.05;
  }
  const double p1 = order_stat_cdf(0.05, 1, m), p10 = order_stat_cdf(0.05, 10, m);
  EXPECT_NEAR(hit1 / double(reps), p1, 3 * std::sqrt(p1 * (1 - p1) / reps) + 1e-4);
  EXPECT_NEAR(hit10 / double(reps), p10, 3 * std::sqrt(p10 * (1 - p10) / reps) + 1e-4);
  EXPECT_LT(p10, p1);
}

TEST(PvalStepwise, Monotonicity) {
  const long n = 200;
  double prev = 0.0;
  for (double r = 0.80; r <= 1.0; r += 0.005) {
    const double p = pval_stepwise(r, 1.0, PvalContext{n, 3, 0, 500, 1, 0.01});
    EXPECT_GE(p, prev);
    prev = p;
  }
  double prev_q = 0.0;
  for (long q : {10, 50, 100, 1000, 10000}) {
    const double p = pval_stepwise(0.95, 1.0, PvalContext{n, 3, 0, q, 1, 0.01});
    EXPECT_GE(p, prev_q);
    prev_q = p;
  }
  double prev_nu = 1.0;
  for (long nu = 1; nu <= 10; ++nu) {
    const double p = pval_stepwise(0.97, 1.0, PvalContext{n, 3, 0, 500, nu, 0.01});
    EXPECT_LE(p, prev_nu);
    prev_nu = p;
  }
}

TEST(PvalStepwise, OuterShapeSwitch) {
  const PvalContext c{100, 4, 0, 30, 1, 0.01};
  const double u = beta_cdf(0.9, {0.5 * (100 - 4 - 1), 0.5});
  EXPECT_NEAR(pval_stepwise(0.9, 1.0, c), 1 - std::pow(1 - u, 26), 1e-14);
  EXPECT_NEAR(pval_stepwise(0.9, 1.0, c, OuterShape::literal), 1 - std::pow(1 - u, 27), 1e-14);
}

TEST(PvalStepwise, DomainErrors) {
  EXPECT_THROW(pval_stepwise(0.5, 1.0, PvalContext{5, 4, 0, 10, 1, 0.01}), std::domain_error);
  EXPECT_THROW(pval_stepwise(0.5, 1.0, PvalContext{50, 10, 0, 10, 1, 0.01}), std::domain_error);
  EXPECT_THROW(pval_stepwise(0.5, 1.0, PvalContext{50, 1, 0, 10, 0, 0.01}), std::domain_error);
}

TEST(Kappa, Values) {
  double prev = 1.0;
  for (double a : {0.001, 0.01, 0.1, 0.5, 0.9, 0.999, 1.0 - 1e-12}) {
    const double kap = kappa(1000, 2, a);
    EXPECT_LT(kap, prev);
    prev = kap;
  }
  EXPECT_LT(prev, 1e-3);
  EXPECT_NEAR(kappa(1000, 1000, 0.01), 0.13907415730584175151, 1e-12);
  EXPECT_NEAR(kappa(500, 500, 0.01), 0.18924006571524065787, 1e-12);
  EXPECT_NEAR(kappa(30, 10, 0.05), 0.49022720043887942189, 1e-12);
  // n kappa^2 at (1e6, 1e4, 0.01); 30-digit quadrature reference.
  EXPECT_NEAR(1e6 * std::pow(kappa(1e6, 1e4, 0.01), 2), 23.918211601920183313, 1e-7);
}

TEST(Kappa, EquivalentToStepwiseTest) {
  Sampler s(9, 0);
  int accepted = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const long n = s.integer(20, 200);
    const long q = s.integer(5, 300);
    const long k = s.integer(0, 3);
    const double alpha = 0.01 + 0.1 * s.uniform();
    // Reduction fraction near the threshold so both outcomes occur.
    const double kap2 = std::pow(kappa(static_cast<double>(n - k), static_cast<double>(q - k), alpha), 2);
    const double frac = kap2 * (0.8 + 0.4 * s.uniform());
    const double p = pval_stepwise(1.0 - frac, 1.0, PvalContext{n, k, 0, q, 1, alpha});
    EXPECT_EQ(p <= alpha, frac >= kap2) << n << " " << q << " " << k;
    accepted += p <= alpha;
  }
  EXPECT_GT(accepted, 10);
  EXPECT_LT(accepted, 90);
}

TEST(Thresholds, MatchPvalueAtAlpha) {
  for (long nu : {1, 3}) {
    const PvalContext c{300, 4, 0, 120, nu, 0.05};
    const double t = stepwise_ratio_threshold(c);
    EXPECT_NEAR(pval_stepwise(t, 1.0, c), 0.05, 1e-9);
    PvalContext a = c;
    a.k = 5;
    const double t2 = all_subset_ratio_threshold(a);
    EXPECT_NEAR(pval_all_subset(t2, 1.0, a), 0.05, 1e-9);
  }
}
