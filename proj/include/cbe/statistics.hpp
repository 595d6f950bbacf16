#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cbe/ensemble.hpp"
#include "cbe/rng.hpp"

namespace cbe {

using cplx = std::complex<double>;

// p_k(x) = sum_j e^{i k x_j}; p_0 = n, p_{-k} = conj(p_k) by construction.
inline cplx power_sum(const Configuration& config, long k) {
  if (k == 0) return {static_cast<double>(config.n()), 0.0};
  if (k < 0) return std::conj(power_sum(config, -k));
  cplx sum{0.0, 0.0};
  for (double x : config.angles) {
    const double kx = static_cast<double>(k) * x;
    sum += cplx{std::cos(kx), std::sin(kx)};
  }
  return sum;
}

// T_d = (p_1, ..., p_d); values[k-1] = p_k.
struct PowerSumVector {
  int d = 0;
  int n = 0;
  std::vector<cplx> values;

  const cplx& p(int k) const { return values[k - 1]; }
};

// One pass over the configuration, iterated multiplication of e^{ix_j}.
inline PowerSumVector power_sum_vector(const Configuration& config, int d) {
  if (d < 1) throw std::invalid_argument("power_sum_vector: d >= 1");
  PowerSumVector out;
  out.d = d;
  out.n = config.n();
  out.values.assign(d, cplx{0.0, 0.0});
  for (double x : config.angles) {
    const cplx w{std::cos(x), std::sin(x)};
    cplx acc{1.0, 0.0};
    for (int k = 0; k < d; ++k) {
      acc *= w;
      out.values[k] += acc;
    }
  }
  return out;
}

// Signed lookup into a PowerSumVector: p_k for |k| <= d, p_0 = n.
inline cplx signed_power(const PowerSumVector& ps, int k) {
  if (k == 0) return {static_cast<double>(ps.n), 0.0};
  return k > 0 ? ps.values[k - 1] : std::conj(ps.values[-k - 1]);
}

// G_d = (sqrt((2/beta) j) Z_j)_{j=1}^d with Z_j i.i.d. standard complex
// Gaussians.
struct GaussianTarget {
  int d = 1;
  double beta = 2.0;
};

inline std::vector<cplx> sample_gaussian_vector(const GaussianTarget& target,
                                                Rng& rng) {
  std::vector<cplx> g(target.d);
  for (int j = 1; j <= target.d; ++j)
    g[j - 1] = std::sqrt(2.0 / target.beta * j) * rng.complex_gaussian();
  return g;
}

inline std::vector<std::vector<cplx>> sample_gaussian_target(
    const GaussianTarget& target, int m, Rng& rng) {
  if (target.d < 1) throw std::invalid_argument("GaussianTarget: d >= 1");
  if (!(target.beta > 0.0))
    throw std::invalid_argument("GaussianTarget: beta > 0");
  if (m < 1) throw std::invalid_argument("sample_gaussian_target: m >= 1");
  std::vector<std::vector<cplx>> out(m);
  for (auto& v : out) v = sample_gaussian_vector(target, rng);
  return out;
}

struct JmSecondBound {
  double A = 1.0;
  double B = 1.0;
  double bound = 0.0;  // B * (2/beta) * m
};

// Second-moment bound on E|p_m|^2 for 0 <= m <= n.
inline JmSecondBound jm_second_moment_bound(int m, int n, double beta) {
  if (m < 0 || m > n)
    throw std::invalid_argument("jm_second_moment_bound: need 0 <= m <= n");
  if (!(beta > 0.0))
    throw std::invalid_argument("jm_second_moment_bound: beta > 0");
  const double q = std::fabs(2.0 / beta - 1.0) / (n - m + 2.0 / beta);
  JmSecondBound out;
  out.A = beta <= 2.0 ? std::pow(1.0 - q, m) : 1.0;
  out.B = beta > 2.0 ? std::pow(1.0 + q, m) : 1.0;
  out.bound = out.B * (2.0 / beta) * m;
  return out;
}

// Fourth-moment bound on |E(p_j p_{m-j} p_{-k} p_{k-m})| for 0 <= j,k <= m.
// The two-regime split is by partition equality {j, m-j} = {k, m-k},
// i.e. k == j or k == m - j; the off-partition bound degenerates to zero
// at beta = 2 while same-partition moments stay of size j(m-j).
inline double jm_fourth_moment_bound(int j, int k, int m, int n, double beta) {
  if (m < 0 || m > n || j < 0 || j > m || k < 0 || k > m)
    throw std::invalid_argument(
        "jm_fourth_moment_bound: need 0 <= j,k <= m <= n");
  const JmSecondBound sb = jm_second_moment_bound(m, n, beta);
  const double c = 2.0 / beta;
  if (k == j || k == m - j)
    return sb.B * c * c * 2.0 * j * (m - j);
  const double dev = std::max(std::fabs(sb.A - 1.0), std::fabs(sb.B - 1.0));
  return dev * c * c * 2.0 *
         std::sqrt(static_cast<double>(j) * (m - j) * k * (m - k));
}

struct SecondMomentEntry {
  int m = 0;
  double estimate = 0.0;
  double se = 0.0;
  double bound = 0.0;
  bool ok = true;  // estimate <= bound + 3 se
};

struct FourthMomentEntry {
  int m = 0, j = 0, k = 0;
  cplx estimate{0.0, 0.0};
  double se = 0.0;
  double bound = 0.0;
  bool ok = true;  // |estimate| <= bound + 3 se
};

struct MomentReport {
  int d = 0;
  int n = 0;
  double beta = 0.0;
  int samples = 0;
  bool reliable = true;
  std::vector<SecondMomentEntry> second;
  std::vector<FourthMomentEntry> fourth;
  bool all_ok = true;
};

namespace detail {

// Batch-means standard error of the mean of y (chain-ordered samples).
inline double batch_means_se(const std::vector<double>& y, int batches = 50) {
  const int n = static_cast<int>(y.size());
  if (n < 2 * batches) batches = std::max(2, n / 2);
  const int len = n / batches;
  double grand = 0.0;
  std::vector<double> bm(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (int i = b * len; i < (b + 1) * len; ++i) s += y[i];
    bm[b] = s / len;
    grand += bm[b];
  }
  grand /= batches;
  double var = 0.0;
  for (double v : bm) var += (v - grand) * (v - grand);
  var /= (batches - 1);
  return std::sqrt(var / batches);
}

}  // namespace detail

// Monte Carlo moment estimates with their bound checks. Fourth moments are
// evaluated on the interior grid 1 <= j,k <= m-1, the index range the
// remainder-term estimates actually consume (the endpoints j or k in {0, m}
// carry a factor p_0 = n and are not fluctuation moments).
inline MomentReport moment_report(const SampleBatch& batch, int d) {
  MomentReport rep;
  rep.d = d;
  rep.n = batch.params.n;
  rep.beta = batch.params.beta;
  rep.samples = batch.m();
  if (rep.samples < 500) rep.reliable = false;
  if (d < 1) throw std::invalid_argument("moment_report: d >= 1");
  if (d > rep.n)
    throw std::invalid_argument("moment_report: d must be <= n (Theorem "
                                "hypothesis m <= n)");

  const int m = rep.samples;
  std::vector<PowerSumVector> ps(m);
  for (int i = 0; i < m; ++i) ps[i] = power_sum_vector(batch.configs[i], d);

  for (int mm = 1; mm <= d; ++mm) {
    SecondMomentEntry e;
    e.m = mm;
    std::vector<double> y(m);
    for (int i = 0; i < m; ++i) y[i] = std::norm(ps[i].p(mm));
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= m;
    e.estimate = mean;
    e.se = detail::batch_means_se(y);
    e.bound = jm_second_moment_bound(mm, rep.n, rep.beta).bound;
    e.ok = e.estimate <= e.bound + 3.0 * e.se;
    rep.all_ok = rep.all_ok && e.ok;
    rep.second.push_back(e);
  }

  std::vector<double> yr(m), yi(m);
  for (int mm = 2; mm <= d; ++mm) {
    for (int j = 1; j <= mm - 1; ++j) {
      for (int k = 1; k <= mm - 1; ++k) {
        FourthMomentEntry e;
        e.m = mm;
        e.j = j;
        e.k = k;
        for (int i = 0; i < m; ++i) {
          const cplx v = ps[i].p(j) * ps[i].p(mm - j) *
                         std::conj(ps[i].p(k) * ps[i].p(mm - k));
          yr[i] = v.real();
          yi[i] = v.imag();
        }
        double mr = 0.0, mi = 0.0;
        for (int i = 0; i < m; ++i) {
          mr += yr[i];
          mi += yi[i];
        }
        e.estimate = cplx{mr / m, mi / m};
        const double ser = detail::batch_means_se(yr);
        const double sei = detail::batch_means_se(yi);
        e.se = std::sqrt(ser * ser + sei * sei);
        e.bound = jm_fourth_moment_bound(j, k, mm, rep.n, rep.beta);
        e.ok = std::abs(e.estimate) <= e.bound + 3.0 * e.se;
        rep.all_ok = rep.all_ok && e.ok;
        rep.fourth.push_back(e);
      }
    }
  }
  return rep;
}

}  // namespace cbe
