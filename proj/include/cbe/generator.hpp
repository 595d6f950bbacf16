#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "cbe/statistics.hpp"

namespace cbe {

struct CollisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// sum_{l=1}^{k-1} p_l p_{k-l} from a precomputed vector (k >= 1).
inline cplx interaction_sum(const PowerSumVector& ps, int k) {
  cplx sum{0.0, 0.0};
  for (int l = 1; l <= k - 1; ++l) sum += ps.p(l) * ps.p(k - l);
  return sum;
}

// sum_{l != j} cot((x_j - x_l)/2) for every j; exact pairwise antisymmetry.
inline std::vector<double> cot_sums(const Configuration& config) {
  const auto& x = config.angles;
  const int n = config.n();
  std::vector<double> c(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double s = std::sin(0.5 * (x[i] - x[j]));
      if (s == 0.0)
        throw CollisionError("coinciding angles in cot sum");
      const double t = std::cos(0.5 * (x[i] - x[j])) / s;
      c[i] += t;
      c[j] -= t;
    }
  }
  return c;
}

}  // namespace detail

// Closed form of the generator acting on p_k:
//   L_beta p_k = -n (beta/2)|k| p_k - (1 - beta/2) k^2 p_k
//                - (beta/2)|k| sum_{l=1}^{|k|-1} p_{sgn(k)l} p_{sgn(k)(|k|-l)}
inline cplx apply_generator_pk(const Configuration& config, long k,
                               double beta) {
  if (k == 0) return {0.0, 0.0};
  const int ak = static_cast<int>(k < 0 ? -k : k);
  const PowerSumVector ps = power_sum_vector(config, ak);
  cplx pk = ps.p(ak);
  cplx inter = detail::interaction_sum(ps, ak);
  if (k < 0) {
    pk = std::conj(pk);
    inter = std::conj(inter);
  }
  const double k2 = static_cast<double>(k) * static_cast<double>(k);
  return -config.n() * (beta / 2.0) * ak * pk - (1.0 - beta / 2.0) * k2 * pk -
         (beta / 2.0) * ak * inter;
}

// Direct evaluation of the generator from its differential form, using
// explicit cot sums and the analytic derivatives of p_k. Independent route
// used as the oracle for apply_generator_pk.
inline cplx apply_generator_numeric(const Configuration& config, long k,
                                    double beta) {
  if (k == 0) return {0.0, 0.0};
  const std::vector<double> cots = detail::cot_sums(config);
  const auto& x = config.angles;
  const int n = config.n();
  const double kd = static_cast<double>(k);
  cplx first{0.0, 0.0}, second{0.0, 0.0};
  for (int j = 0; j < n; ++j) {
    const double kx = kd * x[j];
    const cplx e{std::cos(kx), std::sin(kx)};
    first += cots[j] * cplx{0.0, kd} * e;  // cot sum * dp_k/dx_j
    second += -kd * kd * e;                // d^2 p_k / dx_j^2
  }
  return (beta / 2.0) * first + second;
}

// L_beta (p_k p_l) = p_k L_beta p_l + p_l L_beta p_k - 2 k l p_{k+l}
inline cplx apply_generator_product(const Configuration& config, long k,
                                    long l, double beta) {
  const cplx pk = power_sum(config, k);
  const cplx pl = power_sum(config, l);
  return pk * apply_generator_pk(config, l, beta) +
         pl * apply_generator_pk(config, k, beta) -
         2.0 * static_cast<double>(k) * static_cast<double>(l) *
             power_sum(config, k + l);
}

// The matrices and remainder terms of the exchangeable-pair decomposition,
// evaluated at one configuration:
//   Lambda_{k,k} = n k beta/2          Sigma_{k,k} = (2/beta) k
//   R_k   = (beta/2 - 1) k^2 p_k - (beta/2) k sum_{l=1}^{k-1} p_l p_{k-l}
//   S_{k,l} = (1 - delta_{k,l}) 2 k l p_{k-l}
//   T_{j,k} = -2 j k p_{j+k}
// R is fixed so that -Lambda W + R = (L_beta p_1, ..., L_beta p_d) holds
// identically (the first-order conditional-increment limit).
struct SteinData {
  int d = 0;
  int n = 0;
  double beta = 2.0;
  std::vector<double> lambda_diag;  // Lambda_{k,k}
  std::vector<double> sigma_diag;   // Sigma_{k,k}
  std::vector<cplx> r;              // R_k, k = 1..d
  std::vector<std::vector<cplx>> s; // S_{k,l}
  std::vector<std::vector<cplx>> t; // T_{j,k}

  double lambda_inv_op_norm() const { return 2.0 / beta / n; }
  double sigma_inv_sqrt_op_norm() const { return std::sqrt(beta / 2.0); }

  double r_norm() const {
    double s2 = 0.0;
    for (const cplx& v : r) s2 += std::norm(v);
    return std::sqrt(s2);
  }
  double s_hs_norm() const {
    double s2 = 0.0;
    for (const auto& row : s)
      for (const cplx& v : row) s2 += std::norm(v);
    return std::sqrt(s2);
  }
  double t_hs_norm() const {
    double s2 = 0.0;
    for (const auto& row : t)
      for (const cplx& v : row) s2 += std::norm(v);
    return std::sqrt(s2);
  }
};

inline SteinData stein_data(const Configuration& config, int d, double beta) {
  if (d < 1) throw std::invalid_argument("stein_data: d >= 1");
  SteinData out;
  out.d = d;
  out.n = config.n();
  out.beta = beta;
  const PowerSumVector ps = power_sum_vector(config, 2 * d);

  out.lambda_diag.resize(d);
  out.sigma_diag.resize(d);
  out.r.resize(d);
  out.s.assign(d, std::vector<cplx>(d, cplx{0.0, 0.0}));
  out.t.assign(d, std::vector<cplx>(d, cplx{0.0, 0.0}));

  for (int k = 1; k <= d; ++k) {
    out.lambda_diag[k - 1] = out.n * (beta / 2.0) * k;
    out.sigma_diag[k - 1] = 2.0 / beta * k;
    const cplx inter = detail::interaction_sum(ps, k);
    const double k2 = static_cast<double>(k) * static_cast<double>(k);
    out.r[k - 1] =
        (beta / 2.0 - 1.0) * k2 * ps.p(k) - (beta / 2.0) * k * inter;
  }
  for (int k = 1; k <= d; ++k) {
    for (int l = 1; l <= d; ++l) {
      if (l != k)
        out.s[k - 1][l - 1] = 2.0 * k * l * signed_power(ps, k - l);
      out.t[k - 1][l - 1] = -2.0 * k * l * ps.p(k + l);
    }
  }
  return out;
}

}  // namespace cbe
