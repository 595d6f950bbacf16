#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cbe/dynamics.hpp"
#include "cbe/ensemble.hpp"
#include "cbe/generator.hpp"
#include "cbe/parallel.hpp"
#include "cbe/statistics.hpp"

namespace cbe {

struct IncrementLimitsReport {
  int d = 0;
  int starts = 0;
  int noise_paths = 0;
  std::vector<double> t_grid;
  // relative L1 discrepancies, aggregated over starts
  std::vector<double> first_order;               // per k = 1..d, vs -Lambda W + R
  std::vector<std::vector<double>> mixed;        // (j,k), vs 2 Lambda Sigma + S
  std::vector<std::vector<double>> plain;        // (j,k), vs T
  double max_rel_error = 0.0;
  bool inconclusive = false;
};

// Monte Carlo verification of the three conditional-increment limits:
//   (1/t) E[W_t - W | W]                 -> -Lambda W + R
//   (1/t) E[(W_t - W)(W_t - W)^* | W]    -> 2 Lambda Sigma + S
//   (1/t) E[(W_t - W)(W_t - W)^T | W]    -> T
// Per start: average over noise paths, extrapolate t -> 0 linearly over the
// grid; the first-order estimator uses the martingale control variate.
inline IncrementLimitsReport verify_increment_limits(
    const EnsembleParams& params, int d, std::vector<double> t_grid, int m,
    int noise_paths = 2048, int steps_per_t = 16, const McmcConfig& mcfg = {},
    int workers = 0) {
  if (d < 1) throw std::invalid_argument("verify_increment_limits: d >= 1");
  if (t_grid.size() < 2)
    throw std::invalid_argument("verify_increment_limits: >= 2 grid points");
  std::sort(t_grid.begin(), t_grid.end());

  IncrementLimitsReport rep;
  rep.d = d;
  rep.starts = m;
  rep.noise_paths = noise_paths;
  rep.t_grid = t_grid;

  const std::vector<Configuration> starts = mcmc_sample(params, m, mcfg).configs;
  const std::vector<double> weights = detail::intercept_weights(t_grid);
  const int nt = static_cast<int>(t_grid.size());
  const int pairs = std::max(1, noise_paths / 2);

  // per start: |est - target|, |target|, and noise sd for each entry;
  // entry layout: [0, d) first-order, then d*d mixed, then d*d plain
  const int entries = d + 2 * d * d;
  std::vector<std::vector<double>> err(m), ref(m), noise_sd(m);

  parallel_for(m, workers, [&](std::size_t i) {
    const Configuration& x0 = starts[i];
    const SteinData sd = stein_data(x0, d, params.beta);
    const PowerSumVector base = power_sum_vector(x0, d);

    std::vector<std::vector<cplx>> est(nt, std::vector<cplx>(entries));
    std::vector<std::vector<double>> var(nt, std::vector<double>(entries));

    std::vector<cplx> acc(entries), pair_val(entries), delta(d);
    std::vector<double> sq(entries);
    for (int ti = 0; ti < nt; ++ti) {
      const double t = t_grid[ti];
      std::fill(acc.begin(), acc.end(), cplx{0, 0});
      std::fill(sq.begin(), sq.end(), 0.0);
      for (int p = 0; p < pairs; ++p) {
        std::fill(pair_val.begin(), pair_val.end(), cplx{0, 0});
        for (double sign : {1.0, -1.0}) {
          Rng rng(derive_seed(params.seed, 0x57e1u ^ i, ti, p));
          auto path = detail::evolve_increment_path(x0, params.beta, t,
                                                    steps_per_t, d, rng, sign);
          for (int k = 1; k <= d; ++k)
            delta[k - 1] = path.end.p(k) - base.p(k);
          for (int k = 0; k < d; ++k)
            pair_val[k] += (delta[k] - path.martingale[k]) / t;
          for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
              pair_val[d + j * d + k] += delta[j] * std::conj(delta[k]) / t;
              pair_val[d + d * d + j * d + k] += delta[j] * delta[k] / t;
            }
          }
        }
        for (int e = 0; e < entries; ++e) {
          pair_val[e] *= 0.5;
          acc[e] += pair_val[e];
          sq[e] += std::norm(pair_val[e]);
        }
      }
      for (int e = 0; e < entries; ++e) {
        est[ti][e] = acc[e] / double(pairs);
        var[ti][e] =
            std::max(0.0, sq[e] / pairs - std::norm(est[ti][e])) / pairs;
      }
    }

    err[i].resize(entries);
    ref[i].resize(entries);
    noise_sd[i].resize(entries);
    std::vector<cplx> target(entries);
    for (int k = 0; k < d; ++k)
      target[k] = -sd.lambda_diag[k] * base.p(k + 1) + sd.r[k];
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < d; ++k) {
        target[d + j * d + k] =
            (j == k ? cplx{2.0 * sd.lambda_diag[j] * sd.sigma_diag[j], 0.0}
                    : cplx{0.0, 0.0}) +
            sd.s[j][k];
        target[d + d * d + j * d + k] = sd.t[j][k];
      }
    }
    for (int e = 0; e < entries; ++e) {
      cplx a{0.0, 0.0};
      double v = 0.0;
      for (int ti = 0; ti < nt; ++ti) {
        a += weights[ti] * est[ti][e];
        v += weights[ti] * weights[ti] * var[ti][e];
      }
      err[i][e] = std::abs(a - target[e]);
      ref[i][e] = std::abs(target[e]);
      noise_sd[i][e] = std::sqrt(v);
    }
  });

  double max_noise_fraction = 0.0;
  auto aggregate = [&](int e) {
    double num = 0.0, den = 0.0, noise = 0.0;
    for (int i = 0; i < m; ++i) {
      num += err[i][e];
      den += ref[i][e];
      noise += 0.886 * noise_sd[i][e];
    }
    if (den > 0.0)
      max_noise_fraction = std::max(max_noise_fraction, noise / den);
    return den > 0.0 ? num / den : 0.0;
  };

  rep.first_order.resize(d);
  for (int k = 0; k < d; ++k) {
    rep.first_order[k] = aggregate(k);
    rep.max_rel_error = std::max(rep.max_rel_error, rep.first_order[k]);
  }
  rep.mixed.assign(d, std::vector<double>(d));
  rep.plain.assign(d, std::vector<double>(d));
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      rep.mixed[j][k] = aggregate(d + j * d + k);
      rep.plain[j][k] = aggregate(d + d * d + j * d + k);
      rep.max_rel_error = std::max(
          {rep.max_rel_error, rep.mixed[j][k], rep.plain[j][k]});
    }
  }
  rep.inconclusive = max_noise_fraction > 0.05;
  return rep;
}

struct CubicScalingReport {
  std::vector<double> t_grid;
  std::vector<double> third_moment;  // E|W_t - W|^3 per t
  std::vector<double> second_moment; // E|W_t - W|^2 per t
  double slope_third = 0.0;          // log-log fit, expected 3/2
  double slope_second = 0.0;         // expected 1
  bool degenerate = false;
};

namespace detail {

inline double loglog_slope(const std::vector<double>& xs,
                           const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double det = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / det;
}

}  // namespace detail

// Fits the small-t scaling exponents of E|W_t - W|^3 and E|W_t - W|^2 over
// a t-grid spanning at least one decade (one fresh path per start and t).
inline CubicScalingReport cubic_increment_scaling(const EnsembleParams& params,
                                                  int d,
                                                  std::vector<double> t_grid,
                                                  int m, int steps_per_t = 32,
                                                  const McmcConfig& mcfg = {},
                                                  int workers = 0) {
  std::sort(t_grid.begin(), t_grid.end());
  if (t_grid.size() < 2 || t_grid.back() / t_grid.front() < 10.0 ||
      !(t_grid.front() > 0.0))
    throw std::invalid_argument(
        "cubic_increment_scaling: t_grid must span at least a decade of t > 0");

  const std::vector<Configuration> starts = mcmc_sample(params, m, mcfg).configs;
  const int nt = static_cast<int>(t_grid.size());

  std::vector<std::vector<double>> m3(nt, std::vector<double>(m));
  std::vector<std::vector<double>> m2(nt, std::vector<double>(m));
  parallel_for(m, workers, [&](std::size_t i) {
    const PowerSumVector base = power_sum_vector(starts[i], d);
    for (int ti = 0; ti < nt; ++ti) {
      Rng rng(derive_seed(params.seed, 0xcb1cu ^ i, ti));
      auto path = detail::evolve_increment_path(starts[i], params.beta,
                                                t_grid[ti], steps_per_t, d,
                                                rng, 1.0);
      double sq = 0.0;
      for (int k = 1; k <= d; ++k) sq += std::norm(path.end.p(k) - base.p(k));
      m2[ti][i] = sq;
      m3[ti][i] = sq * std::sqrt(sq);
    }
  });

  CubicScalingReport rep;
  rep.t_grid = t_grid;
  for (int ti = 0; ti < nt; ++ti) {
    double s2 = 0.0, s3 = 0.0;
    for (int i = 0; i < m; ++i) {
      s2 += m2[ti][i];
      s3 += m3[ti][i];
    }
    rep.second_moment.push_back(s2 / m);
    rep.third_moment.push_back(s3 / m);
  }
  rep.degenerate = std::any_of(rep.third_moment.begin(), rep.third_moment.end(),
                               [](double v) { return !(v > 0.0); });
  if (!rep.degenerate) {
    rep.slope_third = detail::loglog_slope(t_grid, rep.third_moment);
    rep.slope_second = detail::loglog_slope(t_grid, rep.second_moment);
  }
  return rep;
}

struct WassersteinBoundEstimate {
  int d = 0;
  int n = 0;
  double beta = 0.0;
  double bound = 0.0;  // ||Lambda^-1|| (E|R| + (1/2pi)||Sigma^-1/2|| E(||S|| + ||T||))
  double se = 0.0;
  double mean_r = 0.0;       // E|R|
  double mean_s_hs = 0.0;    // E||S||_HS
  double mean_t_hs = 0.0;    // E||T||_HS
  double se_r = 0.0, se_s = 0.0, se_t = 0.0;
};

// Sample-mean estimate of the abstract Wasserstein-1 upper bound at the
// batch's (n, beta). Lambda and Sigma are diagonal, so the operator norms
// are closed forms: ||Lambda^-1|| = (2/beta)/n, ||Sigma^-1/2|| = sqrt(beta/2).
inline WassersteinBoundEstimate wasserstein_bound_mc(const SampleBatch& batch,
                                                     int d) {
  const int m = batch.m();
  if (m < 2) throw std::invalid_argument("wasserstein_bound_mc: m >= 2");
  WassersteinBoundEstimate est;
  est.d = d;
  est.n = batch.params.n;
  est.beta = batch.params.beta;

  std::vector<double> rn(m), sn(m), tn(m), bn(m);
  const double lam_inv = 2.0 / batch.params.beta / batch.params.n;
  const double sig_inv_sqrt = std::sqrt(batch.params.beta / 2.0);
  for (int i = 0; i < m; ++i) {
    const SteinData sdat = stein_data(batch.configs[i], d, batch.params.beta);
    rn[i] = sdat.r_norm();
    sn[i] = sdat.s_hs_norm();
    tn[i] = sdat.t_hs_norm();
    bn[i] = lam_inv * (rn[i] + (0.5 / std::numbers::pi) * sig_inv_sqrt *
                                   (sn[i] + tn[i]));
  }
  auto mean_of = [&](const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s += v;
    return s / m;
  };
  est.mean_r = mean_of(rn);
  est.mean_s_hs = mean_of(sn);
  est.mean_t_hs = mean_of(tn);
  est.bound = mean_of(bn);
  est.se_r = detail::batch_means_se(rn);
  est.se_s = detail::batch_means_se(sn);
  est.se_t = detail::batch_means_se(tn);
  est.se = detail::batch_means_se(bn);
  return est;
}

struct ScalingAuditRow {
  int d = 0;
  int n = 0;
  double mean_r = 0.0, se_r = 0.0;
  double mean_s = 0.0, se_s = 0.0;
  double mean_t = 0.0, se_t = 0.0;
  double bound = 0.0, se_bound = 0.0;
};

struct ScalingAuditReport {
  double beta = 0.0;
  int samples = 0;
  std::vector<ScalingAuditRow> rows;       // d-scan at n_fit
  std::vector<ScalingAuditRow> n_rows;     // n-scan at d_fit
  int n_fit = 0;
  int d_fit = 0;
  double slope_r = 0.0;      // fitted exponent of E|R| vs d
  double slope_s = 0.0;      // of E||S||_HS vs d
  double slope_t = 0.0;      // of E||T||_HS vs d
  double slope_bound_n = 0.0;  // of the bound vs n at fixed d
  double ratio_min = 0.0, ratio_max = 0.0;  // bound / (d^{7/2}/n) over grid
  bool under_resolved = false;
};

// Exponent audit: fits log E|R|, log E||S||_HS, log E||T||_HS against log d
// at the largest n, and the full bound against log n at the smallest d.
// Only exponents are audited; the unspecified constant is never asserted.
inline ScalingAuditReport scaling_audit(double beta, std::vector<int> d_grid,
                                        std::vector<int> n_grid, int m,
                                        std::uint64_t seed,
                                        const McmcConfig& mcfg = {}) {
  if (d_grid.size() < 2 || n_grid.size() < 1)
    throw std::invalid_argument("scaling_audit: need >= 2 d and >= 1 n values");
  std::sort(d_grid.begin(), d_grid.end());
  std::sort(n_grid.begin(), n_grid.end());
  ScalingAuditReport rep;
  rep.beta = beta;
  rep.samples = m;
  rep.n_fit = n_grid.back();
  rep.d_fit = d_grid.front();
  if (d_grid.back() * d_grid.back() > rep.n_fit) rep.under_resolved = true;

  std::vector<SampleBatch> batches(n_grid.size());
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    EnsembleParams p{n_grid[i], beta, derive_seed(seed, 0x5ca1u, n_grid[i])};
    batches[i] = mcmc_sample(p, m, mcfg);
  }

  auto audit_row = [&](const SampleBatch& b, int d) {
    const WassersteinBoundEstimate e = wasserstein_bound_mc(b, d);
    ScalingAuditRow row;
    row.d = d;
    row.n = b.params.n;
    row.mean_r = e.mean_r;
    row.se_r = e.se_r;
    row.mean_s = e.mean_s_hs;
    row.se_s = e.se_s;
    row.mean_t = e.mean_t_hs;
    row.se_t = e.se_t;
    row.bound = e.bound;
    row.se_bound = e.se;
    return row;
  };

  const SampleBatch& top = batches.back();
  std::vector<double> ds, rs, ss, ts;
  for (int d : d_grid) {
    const ScalingAuditRow row = audit_row(top, d);
    rep.rows.push_back(row);
    ds.push_back(d);
    if (row.mean_r > 0.0) rs.push_back(row.mean_r);
    ss.push_back(row.mean_s);
    ts.push_back(row.mean_t);
  }
  // R vanishes identically at beta = 2, d = 1; only positive means enter
  std::vector<double> ds_r;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (rep.rows[i].mean_r > 0.0) ds_r.push_back(ds[i]);
  rep.slope_r =
      ds_r.size() >= 2 ? detail::loglog_slope(ds_r, rs) : 0.0;
  rep.slope_s = detail::loglog_slope(ds, ss);
  rep.slope_t = detail::loglog_slope(ds, ts);

  std::vector<double> ns, bs;
  rep.ratio_min = std::numeric_limits<double>::infinity();
  rep.ratio_max = 0.0;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const ScalingAuditRow row = audit_row(batches[i], rep.d_fit);
    rep.n_rows.push_back(row);
    ns.push_back(n_grid[i]);
    bs.push_back(row.bound);
  }
  if (ns.size() >= 2) rep.slope_bound_n = detail::loglog_slope(ns, bs);
  for (const auto& row : rep.rows) {
    const double ref = std::pow(double(row.d), 3.5) / row.n;
    const double ratio = row.bound / ref;
    rep.ratio_min = std::min(rep.ratio_min, ratio);
    rep.ratio_max = std::max(rep.ratio_max, ratio);
  }
  for (const auto& row : rep.n_rows) {
    const double ref = std::pow(double(row.d), 3.5) / row.n;
    const double ratio = row.bound / ref;
    rep.ratio_min = std::min(rep.ratio_min, ratio);
    rep.ratio_max = std::max(rep.ratio_max, ratio);
  }
  return rep;
}

}  // namespace cbe
