#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cbe/ensemble.hpp"
#include "cbe/parallel.hpp"
#include "cbe/rng.hpp"
#include "cbe/statistics.hpp"

namespace cbe {

// Truncated Fourier coefficients indexed -J..J; coefficient of e^{ik theta}
// sits at index k. Real fields carry exact Hermitian symmetry
// f_{-k} = conj(f_k); the complex log field is one-sided instead.
struct FourierField {
  int J = 0;
  std::vector<cplx> coeffs;  // size 2J+1, frequency k at coeffs[k + J]

  explicit FourierField(int truncation = 0)
      : J(truncation), coeffs(2 * truncation + 1, cplx{0.0, 0.0}) {}

  cplx& at(int k) { return coeffs[k + J]; }
  const cplx& at(int k) const { return coeffs[k + J]; }

  bool is_hermitian(double tol = 0.0) const {
    for (int k = 0; k <= J; ++k) {
      const cplx diff = at(-k) - std::conj(at(k));
      if (std::abs(diff) > tol) return false;
    }
    return true;
  }
};

// Coefficients of log P_n = -sum_{j>=1} (1/j) p_j e^{-ij theta}, truncated:
// frequency -j carries -p_j/j, positive frequencies carry 0 and f_0 = 0.
// Computed from power sums directly; no branch of log is ever selected.
inline FourierField log_char_poly_coeffs(const Configuration& config, int J) {
  if (J < 1) throw std::invalid_argument("log_char_poly_coeffs: J >= 1");
  FourierField f(J);
  const PowerSumVector ps = power_sum_vector(config, J);
  for (int j = 1; j <= J; ++j) f.at(-j) = -ps.p(j) / double(j);
  return f;
}

// The real and imaginary parts of the truncated log characteristic
// polynomial as Hermitian coefficient fields:
//   X_n: frequency -j carries -p_j/(2j);  Y_n: frequency -j carries -p_j/(2ij).
// X_n + i Y_n reproduces log_char_poly_coeffs exactly.
inline std::pair<FourierField, FourierField> xn_yn_fields(
    const Configuration& config, int J) {
  if (J < 1) throw std::invalid_argument("xn_yn_fields: J >= 1");
  FourierField x(J), y(J);
  const PowerSumVector ps = power_sum_vector(config, J);
  const cplx ii{0.0, 1.0};
  for (int j = 1; j <= J; ++j) {
    const cplx c = -ps.p(j) / (2.0 * j);
    x.at(-j) = c;
    x.at(j) = std::conj(c);
    const cplx cy = c / ii;  // -p_j / (2 i j)
    y.at(-j) = cy;
    y.at(j) = std::conj(cy);
  }
  return {std::move(x), std::move(y)};
}

// ||f||_s^2 = sum_{|k| <= J} (1 + k^2)^s |f_k|^2
inline double sobolev_norm_sq(const FourierField& f, double s) {
  double total = 0.0;
  for (int k = -f.J; k <= f.J; ++k)
    total += std::pow(1.0 + double(k) * k, s) * std::norm(f.at(k));
  return total;
}

// Evaluate sum_k f_k e^{ik theta} on a uniform M-point grid.
inline std::vector<cplx> evaluate_on_grid(const FourierField& f, int M) {
  std::vector<cplx> out(M);
  for (int i = 0; i < M; ++i) {
    const double theta = two_pi * i / M;
    cplx v{0.0, 0.0};
    for (int k = -f.J; k <= f.J; ++k)
      v += f.at(k) * cplx{std::cos(k * theta), std::sin(k * theta)};
    out[i] = v;
  }
  return out;
}

// One truncated draw of the limiting pair scaled by sqrt(2/beta):
//   X: frequency -j carries Z_j/(2 sqrt j);  Y: frequency -j carries
//   -i Z_j/(2 sqrt j); both fields share the same draw (Z_j).
inline std::pair<FourierField, FourierField> sample_limiting_field(
    int J, double beta, Rng& rng) {
  if (J < 1) throw std::invalid_argument("sample_limiting_field: J >= 1");
  if (!(beta > 0.0))
    throw std::invalid_argument("sample_limiting_field: beta > 0");
  FourierField x(J), y(J);
  const double scale = std::sqrt(2.0 / beta);
  const cplx mi{0.0, -1.0};
  for (int j = 1; j <= J; ++j) {
    const cplx z = rng.complex_gaussian();
    const cplx cx = scale * z / (2.0 * std::sqrt(double(j)));
    x.at(-j) = cx;
    x.at(j) = std::conj(cx);
    const cplx cy = mi * cx;
    y.at(-j) = cy;
    y.at(j) = std::conj(cy);
  }
  return {std::move(x), std::move(y)};
}

struct TightnessRow {
  int n = 0;
  int J = 0;
  double mc_estimate = 0.0;   // mean ||X_n||^2_{-s'} over samples
  double mc_se = 0.0;
  double surrogate_emp = 0.0;    // (1/2) sum (1+j^2)^{-s'} j^{-2} E^|p_j|^2
  double surrogate_closed = 0.0; // beta=2 only: with min(j, n) for E|p_j|^2
};

struct TightnessReport {
  double beta = 0.0;
  double s_prime = 0.0;
  int samples = 0;
  std::vector<TightnessRow> rows;
  bool bounded = true;       // no growth in n beyond 4 combined SE
  bool under_sampled = false;
};

// Monte Carlo check that E||X_n||^2_{-s'} stays bounded along an n-grid,
// against the coefficient-level surrogate and (for beta = 2) the closed
// surrogate with E|p_j|^2 = min(j, n).
inline TightnessReport tightness_report(double beta, std::uint64_t seed,
                                        double s_prime,
                                        const std::vector<int>& n_grid, int m,
                                        const McmcConfig& mcfg = {},
                                        int truncation = 0) {
  if (!(s_prime > 0.5 && s_prime < 1.0))
    throw std::invalid_argument("tightness_report: s' must lie in (1/2, 1)");
  TightnessReport rep;
  rep.beta = beta;
  rep.s_prime = s_prime;
  rep.samples = m;
  rep.under_sampled = m < 500;

  for (int n : n_grid) {
    const int J = truncation > 0 ? truncation : n;
    if (J < n)
      throw std::invalid_argument("tightness_report: J >= n required");
    EnsembleParams params{n, beta, derive_seed(seed, 0x7164u, n)};
    const SampleBatch batch = mcmc_sample(params, m, mcfg);

    std::vector<double> norms(m);
    std::vector<double> mean_pj_sq(J, 0.0);
    for (int i = 0; i < m; ++i) {
      const auto [x, y] = xn_yn_fields(batch.configs[i], J);
      norms[i] = sobolev_norm_sq(x, -s_prime);
      const PowerSumVector ps = power_sum_vector(batch.configs[i], J);
      for (int j = 1; j <= J; ++j) mean_pj_sq[j - 1] += std::norm(ps.p(j));
    }
    TightnessRow row;
    row.n = n;
    row.J = J;
    double mean = 0.0;
    for (double v : norms) mean += v;
    row.mc_estimate = mean / m;
    row.mc_se = detail::batch_means_se(norms);
    for (int j = 1; j <= J; ++j) {
      const double w = std::pow(1.0 + double(j) * j, -s_prime) / (double(j) * j);
      row.surrogate_emp += 0.5 * w * (mean_pj_sq[j - 1] / m);
      row.surrogate_closed += 0.5 * w * std::min(j, n);
    }
    rep.rows.push_back(row);
  }

  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const TightnessRow& a = rep.rows[i - 1];
    const TightnessRow& b = rep.rows[i];
    const double se = std::sqrt(a.mc_se * a.mc_se + b.mc_se * b.mc_se);
    if (b.mc_estimate > a.mc_estimate + 4.0 * se) rep.bounded = false;
  }
  return rep;
}

}  // namespace cbe
