#include "cbe/ensemble.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cbe/statistics.hpp"
#include "oracles.hpp"

using namespace cbe;

TEST(Selberg, TrivialN1) {
  EXPECT_DOUBLE_EQ(selberg_constant(1, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(selberg_constant(1, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(selberg_constant(1, 13.0), 1.0);
}

TEST(Selberg, MatchesQuadratureN2) {
  // (1/2pi)^2 int |e^{ix1}-e^{ix2}|^beta over the torus; the integrand is a
  // trigonometric polynomial for even beta so the grid rule is exact.
  for (double beta : {2.0, 4.0}) {
    const double quad = oracle::periodic_grid_quadrature(
        [beta](const std::vector<double>& x) {
          return oracle::vandermonde_abs_pow(x, beta);
        },
        2, 32);
    EXPECT_NEAR(selberg_constant(2, beta), quad,
                1e-6 * std::fabs(quad));
  }
  EXPECT_NEAR(selberg_constant(2, 2.0), 2.0, 1e-12);
}

TEST(Selberg, MatchesQuadratureN3) {
  const double quad = oracle::periodic_grid_quadrature(
      [](const std::vector<double>& x) {
        return oracle::vandermonde_abs_pow(x, 2.0);
      },
      3, 16);
  EXPECT_NEAR(selberg_constant(3, 2.0), quad, 1e-6 * quad);
  EXPECT_NEAR(selberg_constant(3, 2.0), 6.0, 1e-12);
}

TEST(Selberg, FractionalBetaAgainstTanhSinh) {
  // n = 2 reduces to a 1-d gap integral (1/2pi) int (2|sin(g/2)|)^beta dg
  for (double beta : {0.5, 1.0, 3.3}) {
    const double quad =
        oracle::tanh_sinh(
            [beta](double g) {
              return std::pow(2.0 * std::fabs(std::sin(0.5 * g)), beta);
            },
            0.0, two_pi) /
        two_pi;
    EXPECT_NEAR(selberg_constant(2, beta), quad, 1e-8 * quad) << beta;
  }
}

TEST(Selberg, LogVariantAndOverflow) {
  // the log variant stays finite where the direct value overflows
  const double lz = selberg_log_constant(4000, 2.0);
  EXPECT_TRUE(std::isfinite(lz));
  EXPECT_THROW(selberg_constant(4000, 2.0), std::range_error);
  EXPECT_THROW(selberg_constant(0, 2.0), std::invalid_argument);
  EXPECT_THROW(selberg_constant(2, -1.0), std::invalid_argument);
}

TEST(LogDensity, KnownValues) {
  const Configuration half = Configuration::sorted({0.0, std::numbers::pi});
  EXPECT_NEAR(log_density_unnormalized(half, 2.0), 2.0 * std::log(2.0), 1e-14);

  const Configuration coincide{{1.0, 1.0, 2.0}};
  EXPECT_EQ(log_density_unnormalized(coincide, 2.0),
            -std::numeric_limits<double>::infinity());

  const Configuration thirds =
      Configuration::sorted({0.0, two_pi / 3.0, 2.0 * two_pi / 3.0});
  EXPECT_NEAR(log_density_unnormalized(thirds, 2.0),
              2.0 * std::log(3.0 * std::sqrt(3.0)), 1e-12);
}

TEST(LogDensity, RotationAndPermutationInvariance) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + int(rng.uniform() * 6);
    std::vector<double> a(n);
    for (double& v : a) v = rng.uniform(0.0, two_pi);
    const Configuration c = Configuration::sorted(a);
    const double base = log_density_unnormalized(c, 2.5);

    const double theta = rng.uniform(0.0, two_pi);
    std::vector<double> rot = c.angles;
    for (double& v : rot) v = wrap_angle(v + theta);
    EXPECT_NEAR(log_density_unnormalized(Configuration::sorted(rot), 2.5),
                base, 1e-9 * (1.0 + std::fabs(base)));

    // sorting is a permutation; evaluate unsorted directly
    std::vector<double> shuffled = c.angles;
    std::swap(shuffled[0], shuffled[n - 1]);
    EXPECT_NEAR(log_density_unnormalized(Configuration{shuffled}, 2.5), base,
                1e-10 * (1.0 + std::fabs(base)));
  }
}

TEST(Mcmc, DetailedBalanceRatio) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + int(rng.uniform() * 5);
    std::vector<double> a(n);
    for (double& v : a) v = rng.uniform(0.0, two_pi);
    std::sort(a.begin(), a.end());
    const int j = int(rng.uniform() * n);
    const double x_new = rng.uniform(0.0, two_pi);
    const double beta = rng.uniform(0.5, 4.0);

    const double forward = mcmc_log_accept_ratio(a, j, x_new, beta);
    std::vector<double> b = a;
    b[j] = x_new;
    const double backward = mcmc_log_accept_ratio(b, j, a[j], beta);
    EXPECT_NEAR(forward, -backward, 1e-10 * (1.0 + std::fabs(forward)));
  }
}

TEST(Mcmc, SingleAngleIsUniform) {
  EnsembleParams params{1, 2.0, 123};
  McmcConfig cfg;
  cfg.burn_in = 10;
  cfg.thinning = 1;
  const SampleBatch batch = mcmc_sample(params, 4000, cfg);
  ASSERT_EQ(batch.m(), 4000);
  // constant density accepts every proposal
  EXPECT_DOUBLE_EQ(batch.provenance.acceptance_rate, 1.0);
  double mc = 0.0, ms = 0.0;
  for (const auto& c : batch.configs) {
    mc += std::cos(c.angles[0]);
    ms += std::sin(c.angles[0]);
  }
  mc /= batch.m();
  ms /= batch.m();
  // E cos = E sin = 0 with sd = 1/sqrt(2m)
  const double se = 1.0 / std::sqrt(2.0 * batch.m());
  EXPECT_LT(std::fabs(mc), 4.0 * se);
  EXPECT_LT(std::fabs(ms), 4.0 * se);
}

TEST(Mcmc, TwoPointGapLawMatchesQuadrature) {
  // symmetrized gap statistic: for h, compare the sample mean of
  // (h(g) + h(2pi - g))/2 against int h dmu with dmu prop sin^beta(g/2)
  const double beta = 2.0;
  EnsembleParams params{2, beta, 77};
  McmcConfig cfg;
  cfg.burn_in = 100;
  cfg.thinning = 4;
  const SampleBatch batch = mcmc_sample(params, 8000, cfg);

  auto h = [](double g) { return std::cos(g); };
  std::vector<double> vals;
  vals.reserve(batch.m());
  for (const auto& c : batch.configs) {
    const double g = c.angles[1] - c.angles[0];
    vals.push_back(0.5 * (h(g) + h(two_pi - g)));
  }
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= vals.size();
  double var = 0.0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var /= (vals.size() - 1);

  const double znorm = oracle::tanh_sinh(
      [beta](double g) { return std::pow(2.0 * std::sin(0.5 * g), beta); },
      0.0, two_pi);
  const double expect =
      oracle::tanh_sinh(
          [beta, h](double g) {
            return h(g) * std::pow(2.0 * std::sin(0.5 * g), beta);
          },
          0.0, two_pi) /
      znorm;
  // batch-means-free bound: retained samples are thinned, allow 5 sigma
  EXPECT_NEAR(mean, expect, 5.0 * std::sqrt(var / vals.size()));
}

TEST(Mcmc, CueSecondMomentSaturatesBound) {
  EnsembleParams params{50, 2.0, 2024};
  McmcConfig cfg;
  cfg.burn_in = 200;
  cfg.thinning = 4;
  cfg.chains = 2;
  const SampleBatch batch = mcmc_sample(params, 6000, cfg);
  for (int m = 1; m <= 3; ++m) {
    std::vector<double> y(batch.m());
    for (int i = 0; i < batch.m(); ++i)
      y[i] = std::norm(power_sum(batch.configs[i], m));
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= y.size();
    const double se = detail::batch_means_se(y);
    EXPECT_NEAR(mean, double(m), 4.0 * se) << "k=" << m;
  }
}

TEST(Mcmc, DeterministicAcrossWorkerCounts) {
  EnsembleParams params{10, 1.5, 42};
  McmcConfig cfg;
  cfg.burn_in = 20;
  cfg.thinning = 2;
  cfg.chains = 4;
  cfg.workers = 1;
  const SampleBatch a = mcmc_sample(params, 100, cfg);
  cfg.workers = 4;
  const SampleBatch b = mcmc_sample(params, 100, cfg);
  ASSERT_EQ(a.m(), b.m());
  for (int i = 0; i < a.m(); ++i)
    for (int j = 0; j < params.n; ++j)
      EXPECT_EQ(a.configs[i].angles[j], b.configs[i].angles[j]);
}

TEST(Mcmc, SortedConfigurations) {
  EnsembleParams params{8, 1.0, 5};
  McmcConfig cfg;
  cfg.burn_in = 50;
  cfg.thinning = 1;
  const SampleBatch batch = mcmc_sample(params, 200, cfg);
  for (const auto& c : batch.configs) {
    for (int j = 0; j + 1 < c.n(); ++j) EXPECT_LE(c.angles[j], c.angles[j + 1]);
    for (double a : c.angles) {
      EXPECT_GE(a, 0.0);
      EXPECT_LT(a, two_pi);
    }
  }
}

TEST(Diagnostics, AcceptanceRateAndTau) {
  EnsembleParams params{20, 2.0, 99};
  McmcConfig cfg;
  cfg.burn_in = 100;
  cfg.thinning = 1;
  cfg.proposal_scale = 0.5;
  const SampleBatch batch = mcmc_sample(params, 2000, cfg);
  const McmcDiagnostics diag = mcmc_diagnostics(batch);
  EXPECT_GT(diag.acceptance_rate, 0.0);
  EXPECT_LT(diag.acceptance_rate, 1.0);
  EXPECT_GE(diag.autocorrelation_time, 0.5);
  EXPECT_TRUE(diag.reliable);

  const SampleBatch small = mcmc_sample(params, 20, cfg);
  EXPECT_FALSE(mcmc_diagnostics(small).reliable);
}

TEST(Mcmc, RejectsBadArguments) {
  EXPECT_THROW(mcmc_sample(EnsembleParams{0, 2.0, 0}, 10),
               std::invalid_argument);
  EXPECT_THROW(mcmc_sample(EnsembleParams{3, -2.0, 0}, 10),
               std::invalid_argument);
  EXPECT_THROW(mcmc_sample(EnsembleParams{3, 2.0, 0}, 0),
               std::invalid_argument);
}
