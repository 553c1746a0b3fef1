#include <gtest/gtest.h>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <vector>

#include "gausscov/regions.hpp"
#include "test_util.hpp"

using namespace gausscov;

namespace {

Eigen::MatrixXd orthonormal(long n, long k, std::uint64_t seed) {
  const Eigen::MatrixXd G = testutil::gaussian_matrix(n, k, seed);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ() * Eigen::MatrixXd::Identity(n, k);
}

double rss_of(const Eigen::MatrixXd& A, const Eigen::VectorXd& y) {
  return (y - A * A.colPivHouseholderQr().solve(y)).squaredNorm();
}

}  // namespace

TEST(Region, SingleCovariateOracle) {
  const long n = 11;
  const Eigen::MatrixXd X = testutil::gaussian_matrix(n, 3, 1);
  const Dataset d(X, testutil::gaussian_vector(n, 2));
  const std::vector<long> s{1};
  const auto r = region(d, s, 0.01);
  // Quantile of Beta(5, 1/2) at 0.01, 30-digit reference.
  EXPECT_NEAR(r.radius_rss, r.rss_ls / 0.498895214672056868837071161223, 1e-12 * r.radius_rss);
  EXPECT_TRUE(r.contains(r.center));
  EXPECT_GT(r.radius_rss, r.rss_ls);
}

TEST(Region, AlphaNearOneShrinksToFit) {
  const Eigen::MatrixXd X = testutil::gaussian_matrix(30, 4, 3);
  const Dataset d(X, testutil::gaussian_vector(30, 4));
  const std::vector<long> s{0, 2, 3};
  const auto r = region(d, s, 1.0 - 1e-12);
  EXPECT_NEAR(r.radius_rss / r.rss_ls, 1.0, 1e-6);
}

TEST(Region, MembershipMatchesDirectRss) {
  const long n = 40;
  const Eigen::MatrixXd X = testutil::gaussian_matrix(n, 5, 5);
  const Dataset d(X, X.col(0) - X.col(3) + testutil::gaussian_vector(n, 6));
  const std::vector<long> s{0, 3, 4};
  const auto r = region(d, s, 0.05);
  Sampler smp(7, 0);
  Eigen::MatrixXd Xs(n, 3);
  Xs << X.col(0), X.col(3), X.col(4);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd beta = r.center;
    for (long c = 0; c < 3; ++c) beta(c) += 0.3 * smp.normal();
    const double direct = (d.y() - Xs * beta).squaredNorm();
    EXPECT_NEAR(r.rss_at(beta), direct, 1e-9 * direct);
    EXPECT_EQ(r.contains(beta), direct <= r.radius_rss);
  }
}

TEST(Region, BoundaryFrequencyEqualsAlpha) {
  const long n = 25, k = 2;
  const double alpha = 0.1;
  const Eigen::MatrixXd X = testutil::gaussian_matrix(n, k, 8);
  const Dataset d(X, X.col(0) + testutil::gaussian_vector(n, 9));
  const std::vector<long> s{0, 1};
  const auto r = region(d, s, alpha);
  // A boundary point along the first eigen-direction of the Gram matrix.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.gram);
  const Eigen::VectorXd dir = es.eigenvectors().col(0);
  const Eigen::VectorXd beta = r.center + std::sqrt(r.ellipsoid_radius() / es.eigenvalues()(0)) * dir;
  ASSERT_NEAR(r.rss_at(beta), r.radius_rss, 1e-9 * r.radius_rss);
  const Eigen::VectorXd resid = d.y() - X * beta;
  Sampler smp(10, 0);
  const int reps = 10000;
  int hits = 0;
  Eigen::MatrixXd Z(n, k);
  for (int rep = 0; rep < reps; ++rep) {
    for (long c = 0; c < k; ++c)
      for (long i = 0; i < n; ++i) Z(i, c) = smp.normal();
    hits += rss_of(Z, resid) <= r.rss_ls;
  }
  EXPECT_NEAR(hits / double(reps), alpha, 3 * std::sqrt(alpha * (1 - alpha) / reps));
}

TEST(Region, MatchesFRegion) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const long n = 20 + 10 * static_cast<long>(seed), q = 6;
    const Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 20 + seed);
    const Dataset d(X, testutil::gaussian_vector(n, 40 + seed));
    const std::vector<long> s{0, 1, 2, 3};
    const double alpha = 0.01 + 0.01 * static_cast<double>(seed);
    const auto r = region(d, s, alpha);
    const long k = 4;
    const double f = boost::math::quantile(boost::math::fisher_f(k, n - k), 1 - alpha);
    EXPECT_NEAR(r.radius_rss, r.rss_ls * (1 + k * f / (n - k)), 1e-9 * r.radius_rss);
  }
}

TEST(Region, Nesting) {
  const Eigen::MatrixXd X = testutil::gaussian_matrix(50, 3, 11);
  const Dataset d(X, testutil::gaussian_vector(50, 12));
  const std::vector<long> s{0, 1, 2};
  double prev = INFINITY, prev_hw = INFINITY;
  for (double a : {0.001, 0.01, 0.05, 0.2, 0.5}) {
    const double rad = region(d, s, a).radius_rss;
    const double hw = interval(d, s, 1, a).half_width;
    EXPECT_LT(rad, prev);
    EXPECT_LT(hw, prev_hw);
    prev = rad;
    prev_hw = hw;
  }
}

TEST(Region, Errors) {
  const long n = 20;
  Eigen::MatrixXd X = testutil::gaussian_matrix(n, 3, 13);
  X.col(2) = X.col(0) + X.col(1);
  const Dataset d(X, testutil::gaussian_vector(n, 14));
  const std::vector<long> dep{0, 1, 2};
  EXPECT_THROW(region(d, dep, 0.05), input_error);
  EXPECT_THROW(interval(d, dep, 2, 0.05), input_error);
  const std::vector<long> ok{0, 1};
  EXPECT_THROW(region(d, ok, 0.0), input_error);
  EXPECT_THROW(interval(d, ok, 2, 0.05), input_error);
  EXPECT_THROW(region(d, std::vector<long>{}, 0.05), input_error);
}

TEST(Interval, OrthonormalPlugIn) {
  const long n = 42;
  const Eigen::MatrixXd Q = orthonormal(n, 2, 15);
  const Dataset d(Q, 2 * Q.col(0) + testutil::gaussian_vector(n, 16));
  const std::vector<long> s{0, 1};
  const auto iv = interval(d, s, 0, 0.05);
  EXPECT_NEAR(iv.sigma_k_sq, 1.0, 1e-12);
  const double rss = fit_ls(d, s).rss();
  // Quantile of Beta(20, 1/2) at 0.05, 30-digit reference.
  const double b = 0.907343330093973189043110438012;
  EXPECT_NEAR(iv.half_width * iv.half_width, rss * (1 / b - 1), 1e-11 * rss);
  EXPECT_NEAR(iv.center, Q.col(0).dot(d.y()), 1e-12);
}

TEST(Interval, ClassicalTInterval) {
  Sampler smp(17, 0);
  for (int inst = 0; inst < 50; ++inst) {
    const long n = smp.integer(8, 200);
    const long k = smp.integer(1, std::min<long>(6, n - 2));
    const Eigen::MatrixXd X = testutil::gaussian_matrix(n, k, 100 + inst);
    const Dataset d(X, 0.5 * X.col(0) + testutil::gaussian_vector(n, 200 + inst));
    std::vector<long> s(k);
    for (long j = 0; j < k; ++j) s[j] = j;
    const double alpha = 0.001 + 0.2 * smp.uniform();
    const long which = smp.integer(0, k - 1);
    const auto iv = interval(d, s, which, alpha);
    const Eigen::MatrixXd G = X.transpose() * X;
    const double inv_diag = G.inverse()(which, which);
    const double s2 = fit_ls(d, s).rss() / (n - k);
    const double t = boost::math::quantile(boost::math::students_t(n - k), 1 - alpha / 2);
    const double classical = t * std::sqrt(s2 * inv_diag);
    EXPECT_NEAR(iv.half_width / classical, 1.0, 1e-6) << n << " " << k;
    EXPECT_NEAR(iv.sigma_k_sq, inv_diag, 1e-9 * inv_diag);
  }
}

TEST(Interval, RssExpansionIdentity) {
  const long n = 60, k = 4;
  const Eigen::MatrixXd X = testutil::gaussian_matrix(n, k, 18);
  const Dataset d(X, X.col(1) + testutil::gaussian_vector(n, 19));
  const std::vector<long> s{0, 1, 2, 3};
  const double rss = fit_ls(d, s).rss();
  Sampler smp(20, 0);
  for (long which = 0; which < k; ++which) {
    const auto iv = interval(d, s, which, 0.05);
    Eigen::MatrixXd others(n, k - 1);
    for (long c = 0, o = 0; c < k; ++c)
      if (c != which) others.col(o++) = X.col(c);
    for (int t = 0; t < 10; ++t) {
      const double lambda = 2 * smp.normal();
      const Eigen::VectorXd shifted = d.y() - (iv.center + lambda) * X.col(which);
      const double expect = rss + lambda * lambda * iv.partial_norm_sq;
      EXPECT_NEAR(rss_of(others, shifted), expect, 1e-9 * expect);
    }
    // lambda = 0 lies inside.
    EXPECT_GE(iv.half_width, 0.0);
    EXPECT_LE(iv.lower(), iv.center);
    EXPECT_GE(iv.upper(), iv.center);
  }
}
