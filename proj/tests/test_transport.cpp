#include "cbe/transport.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace cbe;

namespace {

PointCloud random_cloud(Rng& rng, int m, int dim, double spread = 1.0) {
  std::vector<std::vector<double>> pts(m, std::vector<double>(dim));
  for (auto& p : pts)
    for (double& c : p) c = spread * rng.gaussian();
  return make_cloud(std::move(pts));
}

}  // namespace

TEST(EmpiricalW1, IdenticalCloudsAreZero) {
  Rng rng(401);
  const PointCloud a = random_cloud(rng, 20, 3);
  EXPECT_DOUBLE_EQ(empirical_w1(a, a, W1Method::exact), 0.0);
}

TEST(EmpiricalW1, Singletons) {
  const PointCloud a = make_cloud({{0.0, 0.0}});
  const PointCloud b = make_cloud({{3.0, 4.0}});
  EXPECT_DOUBLE_EQ(empirical_w1(a, b, W1Method::exact), 5.0);
}

TEST(EmpiricalW1, TwoPointsBruteForce) {
  const PointCloud a = make_cloud({{0.0}, {1.0}});
  const PointCloud b = make_cloud({{0.9}, {2.0}});
  // pairings: (0.9, 1.0) vs (2.0, -0.1): mean min is (0.9 + 1.0)/2
  EXPECT_DOUBLE_EQ(empirical_w1(a, b, W1Method::exact), 0.95);
}

TEST(EmpiricalW1, MatchesBruteForcePermutations) {
  Rng rng(402);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + int(rng.uniform() * 5);    // up to 6
    const int dim = 1 + int(rng.uniform() * 3);  // 2d <= 6
    const PointCloud a = random_cloud(rng, m, dim);
    const PointCloud b = random_cloud(rng, m, dim);
    const double exact = empirical_w1(a, b, W1Method::exact);
    const double brute = oracle::brute_force_w1(a.points, b.points);
    EXPECT_LE(std::fabs(exact - brute), 1e-12 * (1.0 + brute))
        << "m=" << m << " dim=" << dim;
  }
}

TEST(EmpiricalW1, MetricProperties) {
  Rng rng(403);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 8;
    const PointCloud a = random_cloud(rng, m, 2);
    const PointCloud b = random_cloud(rng, m, 2);
    const PointCloud c = random_cloud(rng, m, 2);
    const double ab = empirical_w1(a, b);
    const double ba = empirical_w1(b, a);
    const double bc = empirical_w1(b, c);
    const double ac = empirical_w1(a, c);
    EXPECT_NEAR(ab, ba, 1e-12 * (1.0 + ab));
    EXPECT_LE(ac, ab + bc + 1e-9);
    EXPECT_GE(ab, 0.0);
  }
}

TEST(EmpiricalW1, ErrorPaths) {
  Rng rng(404);
  const PointCloud a = random_cloud(rng, 4, 2);
  const PointCloud b = random_cloud(rng, 5, 2);
  EXPECT_THROW(empirical_w1(a, b, W1Method::exact), std::invalid_argument);
  const PointCloud c = random_cloud(rng, 4, 3);
  EXPECT_THROW(empirical_w1(a, c, W1Method::exact), std::invalid_argument);
  EXPECT_THROW(make_cloud({}), std::invalid_argument);
}

TEST(EmpiricalW1, SlicedTracksExactInOneDimension) {
  // in 1-d every direction reduces to +-identity, so sliced = exact
  Rng rng(405);
  const PointCloud a = random_cloud(rng, 50, 1);
  const PointCloud b = random_cloud(rng, 50, 1);
  const double exact = empirical_w1(a, b, W1Method::exact);
  const double sliced = empirical_w1(a, b, W1Method::sliced, 32);
  EXPECT_NEAR(sliced, exact, 1e-10 * (1.0 + exact));
}

TEST(EmpiricalW1, SlicedHandlesUnequalSizes) {
  // quantile coupling against an exactly computable case: point masses
  const PointCloud a = make_cloud({{0.0}, {0.0}});
  const PointCloud b = make_cloud({{1.0}});
  EXPECT_NEAR(empirical_w1(a, b, W1Method::sliced, 8), 1.0, 1e-12);
}

TEST(SolveAssignment, TiesAndStructuredCosts) {
  // all-equal costs: any permutation is optimal, total = m * c
  std::vector<std::vector<double>> flat(5, std::vector<double>(5, 2.5));
  const auto match = solve_assignment(flat);
  std::vector<bool> used(5, false);
  for (int j : match) {
    EXPECT_FALSE(used[j]);
    used[j] = true;
  }

  // diagonal-dominant: identity forced
  std::vector<std::vector<double>> diag(4, std::vector<double>(4, 10.0));
  for (int i = 0; i < 4; ++i) diag[i][i] = double(i);
  const auto id = solve_assignment(diag);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(id[i], i);
}

TEST(W1Experiment, GaussianFloorAndShape) {
  McmcConfig mcfg;
  mcfg.burn_in = 80;
  mcfg.thinning = 2;
  const W1Experiment exp =
      w1_convergence_experiment(2.0, 2, {10, 20}, 100, 321, mcfg, 3);
  ASSERT_EQ(exp.rows.size(), 2u);
  for (const auto& row : exp.rows) {
    EXPECT_GE(row.w1, 0.0);
    EXPECT_GT(row.floor, 0.0);  // same-law floor is nonzero at finite m
    EXPECT_GE(row.se, 0.0);
    EXPECT_EQ(row.m, 100);
  }
}
