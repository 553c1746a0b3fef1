#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gausscov/selection.hpp"
#include "test_util.hpp"

using namespace gausscov;

namespace {

Dataset noise_data(long n, long q, std::uint64_t seed) {
  return Dataset(testutil::gaussian_matrix(n, q, seed, 0), testutil::gaussian_vector(n, seed, 1));
}

std::vector<long> sorted(std::vector<long> v) {
  std::sort(v.begin(), v.end());
  return v;
}

bool is_subset(const std::vector<long>& a, const std::vector<long>& b) {
  const auto sa = sorted(a), sb = sorted(b);
  return std::includes(sb.begin(), sb.end(), sa.begin(), sa.end());
}

}  // namespace

TEST(SelectionConfig, Validation) {
  SelectionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), input_error);
  c = {};
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), input_error);
  c = {};
  c.kmn = 5;
  c.kmx = 3;
  EXPECT_THROW(c.validate(), input_error);
  c = {};
  c.final_limit = 26;
  EXPECT_THROW(c.validate(), input_error);
  c = {};
  c.m = 0;
  EXPECT_THROW(c.validate(), input_error);
}

TEST(F1st, ExactResponseSelectedWithZeroPvalue) {
  const Eigen::MatrixXd X = testutil::gaussian_matrix(40, 10, 11);
  const Dataset d(X, X.col(3));
  const auto t = f1st(d, {});
  ASSERT_EQ(t.chosen, std::vector<long>{3});
  ASSERT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.steps[0].index, 3);
  EXPECT_EQ(t.steps[0].pvalue, 0.0);
  EXPECT_EQ(t.reason, Termination::exact_fit);
  EXPECT_NEAR(t.coeffs(0), 1.0, 1e-12);
}

TEST(F1st, PlantedSignal) {
  const long n = 200, q = 40;
  Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 1012);
  Eigen::VectorXd y = 0.6 * X.col(5) - 0.5 * X.col(17) + 0.4 * X.col(30) + testutil::gaussian_vector(n, 1013);
  const auto t = f1st(Dataset(X, y), {});
  EXPECT_EQ(sorted(t.chosen), (std::vector<long>{5, 17, 30}));
  for (std::size_t i = 1; i < t.steps.size(); ++i) EXPECT_LT(t.steps[i].rss, t.steps[i - 1].rss);
  for (double p : t.final_pvalues) {
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 0.01);
  }
  EXPECT_TRUE(t.final_pass_applied);
  EXPECT_EQ(t.coeffs.size(), 3);
}

TEST(F1st, TraceInvariantsOnManyDatasets) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const long n = 60, q = 25;
    Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 100 + seed);
    Eigen::VectorXd y = 0.35 * X.col(seed % q) + 0.3 * X.col((seed * 7 + 3) % q) + testutil::gaussian_vector(n, 200 + seed);
    SelectionConfig cfg;
    cfg.alpha = 0.2;
    cfg.nu = 1 + static_cast<long>(seed % 3);
    const auto t = f1st(Dataset(X, y), cfg);
    double prev = y.squaredNorm();
    for (const auto& s : t.steps) {
      EXPECT_LT(s.rss, prev);
      EXPECT_GE(s.pvalue, 0.0);
      EXPECT_LE(s.pvalue, cfg.alpha);
      prev = s.rss;
    }
    EXPECT_EQ(t.final_pvalues.size(), t.chosen.size());
    for (double p : t.final_pvalues) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

TEST(F1st, PureNoiseUsuallyEmpty) {
  int nonempty = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) nonempty += !f1st(noise_data(50, 20, 1000 + r), {}).empty();
  // Bound -log(1-alpha) plus three binomial standard deviations.
  const double bound = -std::log1p(-0.01);
  EXPECT_LE(nonempty / double(reps), bound + 3 * std::sqrt(bound * (1 - bound) / reps));
}

TEST(F1st, ForcedStepsAndCaps) {
  const Dataset d = noise_data(50, 20, 14);
  SelectionConfig cfg;
  cfg.kmn = 4;
  cfg.final_pass = false;
  const auto t = f1st(d, cfg);
  EXPECT_GE(t.steps.size(), 4u);
  cfg.kmx = 2;
  cfg.kmn = 2;
  const auto capped = f1st(d, cfg);
  EXPECT_EQ(capped.steps.size(), 2u);
  EXPECT_EQ(capped.reason, Termination::kmx_reached);
  cfg = {};
  cfg.kmn = 100;
  cfg.final_pass = false;
  const auto all = f1st(d, cfg);
  EXPECT_EQ(all.steps.size(), 20u);
}

TEST(F1st, CollinearPoolBeforeForcedStepsWarns) {
  const long n = 30;
  const Eigen::VectorXd v = testutil::gaussian_vector(n, 15);
  Eigen::MatrixXd X(n, 4);
  X << v, 2 * v, -v, 3 * v;
  SelectionConfig cfg;
  cfg.kmn = 3;
  const auto t = f1st(Dataset(X, testutil::gaussian_vector(n, 16)), cfg);
  EXPECT_EQ(t.steps.size(), 1u);
  EXPECT_EQ(t.reason, Termination::no_admissible_candidate);
  EXPECT_FALSE(t.warnings.empty());
}

TEST(F1st, SmallSampleRejected) {
  EXPECT_THROW(f1st(Dataset(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2)), {}), input_error);
}

TEST(F1st, DeterministicAndThreadIndependent) {
  Eigen::MatrixXd X = testutil::gaussian_matrix(100, 80, 17);
  Eigen::VectorXd y = 0.3 * X.col(1) + 0.3 * X.col(50) + testutil::gaussian_vector(100, 18);
  const Dataset d(X, y);
  SelectionConfig cfg;
  cfg.kmn = 5;
  const auto a = f1st(d, cfg);
  cfg.threads = 4;
  const auto b = f1st(d, cfg);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].index, b.steps[i].index);
    EXPECT_EQ(a.steps[i].pvalue, b.steps[i].pvalue);
    EXPECT_EQ(a.steps[i].rss, b.steps[i].rss);
  }
  EXPECT_EQ(a.chosen, b.chosen);
  EXPECT_EQ(a.rss, b.rss);
}

TEST(F1st, ColumnPermutationInvariance) {
  const long n = 120, q = 30;
  Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 19);
  Eigen::VectorXd y = 0.5 * X.col(2) + 0.4 * X.col(11) + 0.3 * X.col(25) + testutil::gaussian_vector(n, 20);
  std::vector<long> perm(q);
  for (long j = 0; j < q; ++j) perm[j] = (j * 7 + 3) % q;
  Eigen::MatrixXd P(n, q);
  for (long j = 0; j < q; ++j) P.col(j) = X.col(perm[j]);
  SelectionConfig cfg;
  cfg.kmn = 4;
  const auto a = f1st(Dataset(X, y), cfg);
  const auto b = f1st(Dataset(P, y), cfg);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(perm[b.steps[i].index], a.steps[i].index);
    EXPECT_NEAR(a.steps[i].pvalue, b.steps[i].pvalue, 1e-9);
  }
  std::vector<long> mapped;
  for (long j : b.chosen) mapped.push_back(perm[j]);
  EXPECT_EQ(sorted(mapped), sorted(a.chosen));
}

TEST(F1st, FinalPassDropsWeakForcedCovariates) {
  const long n = 150, q = 20;
  Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 21);
  Eigen::VectorXd y = 0.8 * X.col(4) + testutil::gaussian_vector(n, 22);
  SelectionConfig cfg;
  cfg.kmn = 6;
  const auto t = f1st(Dataset(X, y), cfg);
  EXPECT_GE(t.steps.size(), 6u);
  EXPECT_EQ(t.chosen, std::vector<long>{4});
}

TEST(F2st, RecoversSubstituteAfterExclusion) {
  const long n = 100, q = 10;
  Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 23);
  X.col(1) = X.col(0) + 0.3 * testutil::gaussian_vector(n, 24);
  Eigen::VectorXd y = X.col(0) + 0.5 * testutil::gaussian_vector(n, 25);
  const Dataset d(X, y);
  // Independent check: with x0 present x1 adds nothing significant.
  EXPECT_GT(pval_all_subset(fit_ls(d, {0, 1}).rss(), fit_ls(d, {0}).rss(), PvalContext{n, 2, 0, q, 1, 0.01}), 0.01);
  const auto rounds = f2st(d, {});
  ASSERT_GE(rounds.size(), 2u);
  EXPECT_EQ(rounds[0].chosen, std::vector<long>{0});
  EXPECT_EQ(rounds[1].chosen, std::vector<long>{1});
  std::set<long> seen;
  for (const auto& r : rounds)
    for (long j : r.chosen) EXPECT_TRUE(seen.insert(j).second);
}

TEST(F2st, PureNoise) {
  int long_lists = 0;
  for (int r = 0; r < 100; ++r) long_lists += f2st(noise_data(40, 15, 3000 + r), {}).size() > 1;
  EXPECT_LE(long_lists, 2);
}

TEST(F3st, SingleStrongCovariate) {
  const long n = 100, q = 15;
  Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 26);
  Eigen::VectorXd y = 3.0 * X.col(7) + testutil::gaussian_vector(n, 27);
  SelectionConfig cfg;
  cfg.m = 1;
  const auto out = f3st(Dataset(X, y), cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].indices, std::vector<long>{7});
}

TEST(F3st, TwinCovariatesBothAppear) {
  const long n = 200, q = 12;
  Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 28);
  X.col(1) = X.col(0) + 0.05 * testutil::gaussian_vector(n, 29);
  Eigen::VectorXd y = X.col(0) + X.col(2) + testutil::gaussian_vector(n, 30);
  SelectionConfig cfg;
  cfg.m = 2;
  cfg.threads = 3;
  const auto out = f3st(Dataset(X, y), cfg);
  std::set<std::vector<long>> sets;
  for (const auto& a : out) sets.insert(sorted(a.indices));
  EXPECT_TRUE(sets.count({0, 2}));
  EXPECT_TRUE(sets.count({1, 2}));
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LE(out[i - 1].rss, out[i].rss);
  EXPECT_EQ(sets.size(), out.size());
  cfg.threads = 1;
  const auto serial = f3st(Dataset(X, y), cfg);
  ASSERT_EQ(serial.size(), out.size());
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(serial[i].indices, out[i].indices);
}

TEST(Fasb, SingleStrongCovariate) {
  const long n = 50;
  Eigen::MatrixXd X = testutil::gaussian_matrix(n, 1, 31);
  Eigen::VectorXd y = 2 * X.col(0) + testutil::gaussian_vector(n, 32);
  const auto out = fasb(Dataset(X, y), {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].indices, std::vector<long>{0});
}

TEST(Fasb, OrthonormalTwoStrongOneNull) {
  const long n = 60;
  Eigen::MatrixXd G = testutil::gaussian_matrix(n, 3, 33);
  Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ() * Eigen::MatrixXd::Identity(n, 3);
  Eigen::VectorXd y = 4 * Q.col(0) + 3 * Q.col(1) + 0.3 * testutil::gaussian_vector(n, 34);
  const Dataset d(Q, y);
  const auto out = fasb(d, {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].indices, (std::vector<long>{0, 1}));

  // Same answer from direct least squares on all eight subsets.
  std::vector<std::vector<long>> retained;
  for (int mask = 1; mask < 8; ++mask) {
    std::vector<long> s;
    for (long j = 0; j < 3; ++j)
      if (mask >> j & 1) s.push_back(j);
    const double rss = fit_ls(d, s).rss();
    bool all = true;
    for (long i : s) {
      const double p = pval_all_subset(rss, rss_drop_one(d, s, i), PvalContext{n, static_cast<long>(s.size()), 0, 3, 1, 0.01});
      all = all && p <= 0.01;
    }
    if (all) retained.push_back(s);
  }
  std::vector<std::vector<long>> maximal;
  for (const auto& a : retained) {
    bool contained = false;
    for (const auto& b : retained) contained = contained || (a != b && is_subset(a, b));
    if (!contained) maximal.push_back(a);
  }
  ASSERT_EQ(maximal.size(), 1u);
  EXPECT_EQ(maximal[0], out[0].indices);
}

TEST(Fasb, MaximalityAndOrdering) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const long n = 40, q = 12;
    Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 400 + seed);
    Eigen::VectorXd y = 0.5 * X.col(0) + 0.4 * X.col(1) + 0.4 * X.col(2) + testutil::gaussian_vector(n, 500 + seed);
    SelectionConfig cfg;
    cfg.alpha = 0.1;
    const auto out = fasb(Dataset(X, y), cfg);
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = 0; j < out.size(); ++j)
        if (i != j) EXPECT_FALSE(is_subset(out[i].indices, out[j].indices));
      for (double p : out[i].pvalues) EXPECT_LE(p, cfg.alpha);
      if (i > 0) EXPECT_LE(out[i - 1].rss, out[i].rss);
    }
  }
}

TEST(Fasb, LargePoolNeedsUniverse) {
  const Dataset d = noise_data(60, 30, 35);
  EXPECT_THROW(fasb(d, {}), input_error);
  EXPECT_NO_THROW(fasb(d, {}, std::vector<long>{0, 5, 9}));
  EXPECT_THROW(fasb(d, {}, std::vector<long>{0, 0}), input_error);
  EXPECT_THROW(fasb(d, {}, std::vector<long>{31}), input_error);
}

TEST(Fasb, UniverseFromForcedSteps) {
  const long n = 150, q = 60;
  Eigen::MatrixXd X = testutil::gaussian_matrix(n, q, 36);
  Eigen::VectorXd y = 0.6 * X.col(10) + 0.5 * X.col(40) + testutil::gaussian_vector(n, 37);
  const Dataset d(X, y);
  SelectionConfig cfg;
  cfg.kmn = 10;
  cfg.final_pass = false;
  const auto t = f1st(d, cfg);
  const auto out = fasb(d, cfg, t.chosen, q);
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(sorted(out[0].indices), (std::vector<long>{10, 40}));
}

TEST(AllSubsetPvalues, MatchExplicitRefits) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset d = noise_data(60, 12, 300 + seed);
    const std::vector<long> s{7, 2, 9, 0, 4};
    const auto p = all_subset_pvalues(d, s, d.q(), 2);
    const double rss = fit_ls(d, s).rss();
    const PvalContext c{d.n_eff(), 5, 0, d.q(), 2, 0.01};
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double w = rss_drop_one(d, s, s[i]);
      EXPECT_NEAR(p[i], pval_all_subset(rss, w, c), 1e-10);
    }
  }
}

TEST(AllSubsetPvalues, CollinearSubsetFallsBack) {
  Eigen::MatrixXd X = testutil::gaussian_matrix(40, 3, 5, 0);
  X.col(2) = X.col(0) + X.col(1);
  const Dataset d(X, X.col(0) + testutil::gaussian_vector(40, 5, 1));
  const std::vector<long> s{0, 1, 2};
  const auto p = all_subset_pvalues(d, s, 3, 1);
  ASSERT_EQ(p.size(), 3u);
  for (double v : p) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
}
