#include "cbe/stein.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "cbe/generator.hpp"
#include "oracles.hpp"

using namespace cbe;

namespace {

Configuration random_config(Rng& rng, int n) {
  std::vector<double> a(n);
  for (double& v : a) v = rng.uniform(0.0, two_pi);
  return Configuration::sorted(a);
}

}  // namespace

TEST(Generator, ClosedFormMatchesNumericOperator) {
  Rng rng(101);
  const double betas[] = {0.5, 1.0, 2.0, 4.0};
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + int(rng.uniform() * 7);
    const double beta = betas[trial % 4];
    const Configuration c = random_config(rng, n);
    for (long k = -6; k <= 6; ++k) {
      const cplx closed = apply_generator_pk(c, k, beta);
      const cplx numeric = apply_generator_numeric(c, k, beta);
      EXPECT_LE(std::abs(closed - numeric), 1e-9 * (1.0 + std::abs(closed)))
          << "n=" << n << " beta=" << beta << " k=" << k;
    }
  }
}

TEST(Generator, SpecialCases) {
  Rng rng(102);
  const Configuration c = random_config(rng, 6);
  EXPECT_EQ(apply_generator_pk(c, 0, 1.7), cplx(0.0, 0.0));
  EXPECT_EQ(apply_generator_numeric(c, 0, 1.7), cplx(0.0, 0.0));

  // |k| = 1: empty interaction sum
  for (double beta : {0.5, 2.0, 4.0}) {
    const cplx expect =
        -(6.0 * beta / 2.0 + 1.0 - beta / 2.0) * power_sum(c, 1);
    EXPECT_LT(std::abs(apply_generator_pk(c, 1, beta) - expect),
              1e-10 * (1.0 + std::abs(expect)));
  }

  // n = 1: interaction terms cancel, L p_k = -k^2 p_k for any beta
  const Configuration single{{1.23}};
  for (long k : {1L, 2L, 5L, -3L}) {
    const cplx expect = -double(k) * double(k) * power_sum(single, k);
    EXPECT_LT(std::abs(apply_generator_pk(single, k, 0.7) - expect), 1e-12);
    EXPECT_LT(std::abs(apply_generator_numeric(single, k, 0.7) - expect),
              1e-12);
  }
}

TEST(Generator, ConjugationSymmetry) {
  Rng rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const Configuration c = random_config(rng, 5);
    for (long k = 1; k <= 6; ++k) {
      const cplx plus = apply_generator_pk(c, k, 1.3);
      const cplx minus = apply_generator_pk(c, -k, 1.3);
      EXPECT_EQ(minus, std::conj(plus));
    }
  }
}

TEST(Generator, ProductRuleMatchesNumericOperator) {
  Rng rng(104);
  const double betas[] = {0.5, 1.0, 2.0, 4.0};
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + int(rng.uniform() * 7);
    const double beta = betas[trial % 4];
    const Configuration c = random_config(rng, n);
    const long k = -4 + long(rng.uniform() * 9);
    const long l = -4 + long(rng.uniform() * 9);
    const cplx closed = apply_generator_product(c, k, l, beta);
    const cplx numeric = oracle::generator_on_product_numeric(c, k, l, beta);
    EXPECT_LE(std::abs(closed - numeric), 1e-9 * (1.0 + std::abs(closed)))
        << "n=" << n << " beta=" << beta << " k=" << k << " l=" << l;
  }
}

TEST(Generator, ProductSpecialCases) {
  Rng rng(105);
  const Configuration c = random_config(rng, 7);
  const double beta = 2.0;

  // k = 1, l = -1: cross term -2kl p_0 = +2n
  const cplx lhs = apply_generator_product(c, 1, -1, beta);
  const cplx expect = power_sum(c, 1) * apply_generator_pk(c, -1, beta) +
                      power_sum(c, -1) * apply_generator_pk(c, 1, beta) +
                      2.0 * cplx(7.0, 0.0);
  EXPECT_LT(std::abs(lhs - expect), 1e-12 * (1.0 + std::abs(expect)));

  // l = 0: reduces to n L p_k
  const cplx with_const = apply_generator_product(c, 3, 0, beta);
  const cplx n_l = 7.0 * apply_generator_pk(c, 3, beta);
  EXPECT_LT(std::abs(with_const - n_l), 1e-12 * (1.0 + std::abs(n_l)));
}

TEST(SteinData, ClosedFormsAndShapes) {
  Rng rng(106);
  const Configuration c = random_config(rng, 10);
  const SteinData sd = stein_data(c, 3, 2.0);
  EXPECT_DOUBLE_EQ(sd.lambda_diag[0], 10.0);
  EXPECT_DOUBLE_EQ(sd.lambda_diag[1], 20.0);
  EXPECT_DOUBLE_EQ(sd.lambda_diag[2], 30.0);
  EXPECT_DOUBLE_EQ(sd.sigma_diag[0], 1.0);
  EXPECT_DOUBLE_EQ(sd.sigma_diag[1], 2.0);
  EXPECT_DOUBLE_EQ(sd.sigma_diag[2], 3.0);

  // beta = 2: R_1 = 0 (both terms vanish)
  EXPECT_EQ(sd.r[0], cplx(0.0, 0.0));

  // S diagonal identically zero; T symmetric
  for (int k = 0; k < 3; ++k) EXPECT_EQ(sd.s[k][k], cplx(0.0, 0.0));
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) EXPECT_EQ(sd.t[j][k], sd.t[k][j]);

  // operator norms of the diagonal matrices
  EXPECT_DOUBLE_EQ(sd.lambda_inv_op_norm(), 0.1);
  EXPECT_DOUBLE_EQ(sd.sigma_inv_sqrt_op_norm(), 1.0);
}

TEST(SteinData, DecompositionIdentity) {
  // -Lambda_{kk} p_k + R_k = L_beta p_k across the full test grid
  Rng rng(107);
  const double betas[] = {0.5, 1.0, 2.0, 4.0};
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + int(rng.uniform() * 7);
    const double beta = betas[trial % 4];
    const Configuration c = random_config(rng, n);
    const int d = 6;
    const SteinData sd = stein_data(c, d, beta);
    const PowerSumVector ps = power_sum_vector(c, d);
    for (int k = 1; k <= d; ++k) {
      const cplx lhs = -sd.lambda_diag[k - 1] * ps.p(k) + sd.r[k - 1];
      const cplx rhs = apply_generator_pk(c, k, beta);
      EXPECT_LE(std::abs(lhs - rhs), 1e-12 * (1.0 + std::abs(rhs)))
          << "n=" << n << " beta=" << beta << " k=" << k;
    }
  }
}

TEST(SteinData, EntryFormulas) {
  Rng rng(108);
  const Configuration c = random_config(rng, 8);
  const double beta = 1.5;
  const int d = 4;
  const SteinData sd = stein_data(c, d, beta);
  for (int k = 1; k <= d; ++k) {
    for (int l = 1; l <= d; ++l) {
      if (k != l) {
        const cplx expect = 2.0 * k * l * power_sum(c, k - l);
        EXPECT_LT(std::abs(sd.s[k - 1][l - 1] - expect), 1e-11);
      }
      const cplx expect_t = -2.0 * k * l * power_sum(c, k + l);
      EXPECT_LT(std::abs(sd.t[k - 1][l - 1] - expect_t), 1e-11);
    }
  }
}

TEST(WassersteinBound, SingleModeReduction) {
  // d = 1, beta = 2: R = 0, S = 0, so the bound reduces to
  // (1/n) (1/2pi) E(2|p_2|)
  EnsembleParams params{12, 2.0, 55};
  McmcConfig cfg;
  cfg.burn_in = 100;
  cfg.thinning = 2;
  const SampleBatch batch = mcmc_sample(params, 1000, cfg);
  const WassersteinBoundEstimate est = wasserstein_bound_mc(batch, 1);
  double expect = 0.0;
  for (const auto& c : batch.configs)
    expect += 2.0 * std::abs(power_sum(c, 2));
  expect *= 1.0 / batch.m() / 12.0 * 0.5 / std::numbers::pi;
  EXPECT_NEAR(est.bound, expect, 1e-12 * expect);
  EXPECT_DOUBLE_EQ(est.mean_r, 0.0);
  EXPECT_DOUBLE_EQ(est.mean_s_hs, 0.0);
  EXPECT_GT(est.bound, 0.0);
}

TEST(WassersteinBound, PositiveForLargerD) {
  EnsembleParams params{15, 1.0, 56};
  McmcConfig cfg;
  cfg.burn_in = 80;
  cfg.thinning = 2;
  const SampleBatch batch = mcmc_sample(params, 400, cfg);
  const WassersteinBoundEstimate est = wasserstein_bound_mc(batch, 3);
  EXPECT_GT(est.bound, 0.0);
  EXPECT_GT(est.mean_r, 0.0);
  EXPECT_GT(est.mean_s_hs, 0.0);
  EXPECT_GT(est.mean_t_hs, 0.0);
  EXPECT_GT(est.se, 0.0);
}

TEST(CubicScaling, RequiresDecadeGrid) {
  EnsembleParams params{6, 2.0, 57};
  EXPECT_THROW(
      cubic_increment_scaling(params, 2, {1e-3, 2e-3}, 10),
      std::invalid_argument);
}
