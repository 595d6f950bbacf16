#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbe/ensemble.hpp"
#include "cbe/generator.hpp"
#include "cbe/parallel.hpp"
#include "cbe/rng.hpp"
#include "cbe/statistics.hpp"

namespace cbe {

enum class CollisionPolicy { reject_and_halve, drift_cap };

struct DbmConfig {
  double dt = 0.0;  // base step; 0 -> 1e-3 / n^2
  CollisionPolicy collision_policy = CollisionPolicy::reject_and_halve;
  double drift_cap = 0.25;  // max |drift|*dt displacement under drift_cap
  double max_move = 0.5;    // reject-and-halve trigger, radians
  int max_halvings = 40;
  int workers = 0;

  double step_for(int n) const { return dt > 0.0 ? dt : 1e-3 / (double(n) * n); }
};

struct Trajectory {
  std::vector<double> times;           // strictly increasing, starts at 0
  std::vector<Configuration> states;   // one per time
};

// drift_j = (beta/2) sum_{i != j} cot((x_j - x_i)/2)
// Throws CollisionError on coinciding angles.
inline std::vector<double> drift(const Configuration& config, double beta) {
  std::vector<double> d = detail::cot_sums(config);
  for (double& v : d) v *= beta / 2.0;
  return d;
}

// One Euler-Maruyama update with supplied noise:
//   x_j <- x_j + drift_j dt + sqrt(2 dt) noise_j, wrapped and re-sorted.
inline Configuration dbm_step(const Configuration& config, double beta,
                              double dt, const std::vector<double>& noise) {
  if (!(dt > 0.0)) throw std::invalid_argument("dbm_step: dt > 0");
  if (static_cast<int>(noise.size()) != config.n())
    throw std::invalid_argument("dbm_step: noise size mismatch");
  const std::vector<double> d = drift(config, beta);
  const double sd = std::sqrt(2.0 * dt);
  std::vector<double> x = config.angles;
  for (int j = 0; j < config.n(); ++j) x[j] += d[j] * dt + sd * noise[j];
  return Configuration::sorted(std::move(x));
}

namespace detail {

inline bool has_coincidence(const Configuration& c) {
  const int n = c.n();
  for (int j = 0; j + 1 < n; ++j)
    if (c.angles[j] == c.angles[j + 1]) return true;
  return false;
}

// One adaptive step of size h. Under reject-and-halve a step whose drift
// displacement is too large (or which lands on a coincidence) is replaced
// by two half steps with fresh noise; under drift_cap the displacement is
// clamped instead.
inline Configuration dbm_adaptive_step(const Configuration& config,
                                       double beta, double h,
                                       const DbmConfig& cfg, Rng& rng,
                                       int depth) {
  if (depth > cfg.max_halvings || h < 1e-12)
    throw std::runtime_error(
        "dbm_evolve: step size underflow (dt < 1e-12 after " +
        std::to_string(depth) + " halvings)");
  const int n = config.n();
  const std::vector<double> d = drift(config, beta);
  double dmax = 0.0;
  for (double v : d) dmax = std::max(dmax, std::fabs(v));

  if (cfg.collision_policy == CollisionPolicy::reject_and_halve &&
      dmax * h > cfg.max_move) {
    Configuration half = dbm_adaptive_step(config, beta, h / 2, cfg, rng,
                                           depth + 1);
    return dbm_adaptive_step(half, beta, h / 2, cfg, rng, depth + 1);
  }

  const double sd = std::sqrt(2.0 * h);
  std::vector<double> x = config.angles;
  for (int j = 0; j < n; ++j) {
    double move = d[j] * h;
    if (cfg.collision_policy == CollisionPolicy::drift_cap)
      move = std::clamp(move, -cfg.drift_cap, cfg.drift_cap);
    x[j] += move + sd * rng.gaussian();
  }
  Configuration next = Configuration::sorted(std::move(x));
  if (has_coincidence(next) && n > 1) {
    if (cfg.collision_policy == CollisionPolicy::reject_and_halve) {
      Configuration half = dbm_adaptive_step(config, beta, h / 2, cfg, rng,
                                             depth + 1);
      return dbm_adaptive_step(half, beta, h / 2, cfg, rng, depth + 1);
    }
    throw CollisionError("dbm step produced coinciding angles");
  }
  return next;
}

}  // namespace detail

// Integrates to total time t, recording the state at each checkpoint
// (and always at 0 and t; the last step toward each checkpoint is
// shortened so checkpoint times are hit exactly).
inline Trajectory dbm_evolve(const Configuration& config, double beta,
                             double t, const DbmConfig& cfg, Rng& rng,
                             std::vector<double> checkpoints = {}) {
  if (!(t > 0.0)) throw std::invalid_argument("dbm_evolve: t > 0");
  checkpoints.push_back(t);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()),
                    checkpoints.end());

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(config);

  const double h0 = cfg.step_for(config.n());
  Configuration state = config;
  double now = 0.0;
  for (double target : checkpoints) {
    if (target <= 0.0 || target > t) continue;
    while (now < target) {
      const double h = std::min(h0, target - now);
      state = detail::dbm_adaptive_step(state, beta, h, cfg, rng, 0);
      now += h;
    }
    traj.times.push_back(target);
    traj.states.push_back(state);
  }
  return traj;
}

enum class StartMode { ensemble, equal_spaced };

struct StationarityEntry {
  int k = 0;
  double moment_start = 0.0;  // mean |p_k|^2 at time 0
  double moment_end = 0.0;    // mean |p_k|^2 at time t
  double z = 0.0;             // paired z-score of the drift
};

struct StationarityReport {
  double t = 0.0;
  int paths = 0;
  std::vector<StationarityEntry> entries;
  bool stationary = true;  // all |z| <= 3
};

// Starts m paths (from CbetaE samples, or a deterministic equal-spaced
// configuration for the negative control) and z-tests the drift of
// E|p_k|^2 between times 0 and t, using paired per-path differences.
inline StationarityReport stationarity_test(const EnsembleParams& params,
                                            double t, int m,
                                            const DbmConfig& cfg,
                                            int k_max = 3,
                                            const McmcConfig& mcfg = {},
                                            StartMode start = StartMode::ensemble) {
  if (m < 500)
    throw std::invalid_argument("stationarity_test: m >= 500 required");
  std::vector<Configuration> starts;
  if (start == StartMode::ensemble) {
    starts = mcmc_sample(params, m, mcfg).configs;
  } else {
    std::vector<double> x(params.n);
    for (int i = 0; i < params.n; ++i) x[i] = two_pi * i / params.n;
    starts.assign(m, Configuration{x});
  }

  std::vector<std::vector<double>> diff(k_max, std::vector<double>(m));
  std::vector<std::vector<double>> at0(k_max, std::vector<double>(m));
  std::vector<std::vector<double>> att(k_max, std::vector<double>(m));
  parallel_for(m, cfg.workers, [&](std::size_t i) {
    Rng rng(derive_seed(params.seed, 0xdb30u, i));
    const Trajectory traj = dbm_evolve(starts[i], params.beta, t, cfg, rng);
    const PowerSumVector p0 = power_sum_vector(traj.states.front(), k_max);
    const PowerSumVector pt = power_sum_vector(traj.states.back(), k_max);
    for (int k = 1; k <= k_max; ++k) {
      at0[k - 1][i] = std::norm(p0.p(k));
      att[k - 1][i] = std::norm(pt.p(k));
      diff[k - 1][i] = att[k - 1][i] - at0[k - 1][i];
    }
  });

  StationarityReport rep;
  rep.t = t;
  rep.paths = m;
  for (int k = 1; k <= k_max; ++k) {
    StationarityEntry e;
    e.k = k;
    double m0 = 0.0, mt = 0.0, md = 0.0;
    for (int i = 0; i < m; ++i) {
      m0 += at0[k - 1][i];
      mt += att[k - 1][i];
      md += diff[k - 1][i];
    }
    m0 /= m;
    mt /= m;
    md /= m;
    double var = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = diff[k - 1][i] - md;
      var += d * d;
    }
    var /= (m - 1);
    const double se = std::sqrt(var / m);
    e.moment_start = m0;
    e.moment_end = mt;
    e.z = se > 0.0 ? md / se : 0.0;
    rep.stationary = rep.stationary && std::fabs(e.z) <= 3.0;
    rep.entries.push_back(e);
  }
  return rep;
}

struct ExchangeabilityReport {
  double t = 0.0;
  int paths = 0;
  double statistic = 0.0;  // mean of u v (u - v), u = Re p_1(0), v = Re p_1(t)
  double z = 0.0;
  bool symmetric = true;  // |z| <= 3
};

// Tests (u, v) =d= (v, u) through the antisymmetric statistic u v (u - v),
// whose mean is zero exactly under exchangeability.
inline ExchangeabilityReport exchangeability_test(const EnsembleParams& params,
                                                  double t, int m,
                                                  const DbmConfig& cfg = {},
                                                  const McmcConfig& mcfg = {}) {
  if (m < 500)
    throw std::invalid_argument("exchangeability_test: m >= 500 required");
  const std::vector<Configuration> starts = mcmc_sample(params, m, mcfg).configs;

  std::vector<double> stat(m);
  parallel_for(m, cfg.workers, [&](std::size_t i) {
    Rng rng(derive_seed(params.seed, 0xe8c4u, i));
    const Trajectory traj = dbm_evolve(starts[i], params.beta, t, cfg, rng);
    const double u = power_sum(traj.states.front(), 1).real();
    const double v = power_sum(traj.states.back(), 1).real();
    stat[i] = u * v * (u - v);
  });

  ExchangeabilityReport rep;
  rep.t = t;
  rep.paths = m;
  double mean = 0.0;
  for (double s : stat) mean += s;
  mean /= m;
  double var = 0.0;
  for (double s : stat) var += (s - mean) * (s - mean);
  var /= (m - 1);
  const double se = std::sqrt(var / m);
  rep.statistic = mean;
  rep.z = se > 0.0 ? mean / se : 0.0;
  rep.symmetric = std::fabs(rep.z) <= 3.0;
  return rep;
}

namespace detail {

// Fixed-substep Euler walk used by the conditional-increment estimators.
// Advances K steps of size t/K and accumulates, for k = 1..k_max, the
// discretized martingale integral
//   mart_k = sum_steps sqrt(2 dt) sum_j i k e^{i k x_j} xi_j
// evaluated at the step's start; its conditional mean is exactly zero, so
// it serves as a control variate for the first-order increment.
struct IncrementPath {
  PowerSumVector end;                 // power sums at time t
  std::vector<cplx> martingale;       // mart_k, k = 1..k_max
};

inline IncrementPath evolve_increment_path(const Configuration& start,
                                           double beta, double t, int steps,
                                           int k_max, Rng& rng,
                                           double noise_sign) {
  const int n = start.n();
  const double dt = t / steps;
  const double sd = std::sqrt(2.0 * dt);
  std::vector<double> x = start.angles;
  std::vector<cplx> mart(k_max, cplx{0.0, 0.0});
  Configuration state{x};
  std::vector<double> xi(n);
  for (int s = 0; s < steps; ++s) {
    const std::vector<double> d = cot_sums(state);
    for (int j = 0; j < n; ++j) xi[j] = noise_sign * rng.gaussian();
    // martingale accumulation at the pre-step state
    for (int j = 0; j < n; ++j) {
      const double xj = state.angles[j];
      cplx e{std::cos(xj), std::sin(xj)};
      cplx acc{1.0, 0.0};
      for (int k = 1; k <= k_max; ++k) {
        acc *= e;
        mart[k - 1] += sd * xi[j] * cplx{0.0, double(k)} * acc;
      }
    }
    std::vector<double>& a = state.angles;
    for (int j = 0; j < n; ++j)
      a[j] += (beta / 2.0) * d[j] * dt + sd * xi[j];
    state = Configuration::sorted(std::move(state.angles));
  }
  IncrementPath out;
  out.end = power_sum_vector(state, k_max);
  out.martingale = std::move(mart);
  return out;
}

// Weights w_i with intercept = sum_i w_i y_i for the least-squares line
// a + b t through (t_i, y_i).
inline std::vector<double> intercept_weights(const std::vector<double>& ts) {
  const int n = static_cast<int>(ts.size());
  double st = 0.0, st2 = 0.0;
  for (double t : ts) {
    st += t;
    st2 += t * t;
  }
  const double det = n * st2 - st * st;
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = (st2 - ts[i] * st) / det;
  return w;
}

// Least-squares line a + b t through (t_i, y_i); returns the intercept a.
inline double extrapolate_to_zero(const std::vector<double>& ts,
                                  const std::vector<double>& ys) {
  const std::vector<double> w = intercept_weights(ts);
  double a = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) a += w[i] * ys[i];
  return a;
}

inline cplx extrapolate_to_zero(const std::vector<double>& ts,
                                const std::vector<cplx>& ys) {
  std::vector<double> re(ys.size()), im(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    re[i] = ys[i].real();
    im[i] = ys[i].imag();
  }
  return {extrapolate_to_zero(ts, re), extrapolate_to_zero(ts, im)};
}

}  // namespace detail

struct DriftLimitReport {
  int k = 0;
  int starts = 0;
  int noise_paths = 0;
  std::vector<double> t_grid;
  double rel_l1_error = 0.0;   // sum_i |est_i - L p_k(x_i)| / sum_i |L p_k(x_i)|
  double noise_fraction = 0.0; // estimated MC noise contribution to the metric
  bool inconclusive = false;
  int recommended_noise_paths = 0;
};

// Estimates (1/t) E[p_k(x(t)) - p_k(x) | x] per start by common-start
// averaging (antithetic pairs, martingale control variate), extrapolates
// t -> 0 linearly over the grid, and compares with the closed form
// L_beta p_k in L^1 over the starts.
inline DriftLimitReport estimate_drift_limit(const EnsembleParams& params,
                                             int k,
                                             std::vector<double> t_grid,
                                             int m, int noise_paths = 64,
                                             int steps_per_t = 32,
                                             const McmcConfig& mcfg = {},
                                             int workers = 0) {
  if (t_grid.size() < 2)
    throw std::invalid_argument("estimate_drift_limit: need >= 2 grid points");
  std::sort(t_grid.begin(), t_grid.end());
  DriftLimitReport rep;
  rep.k = k;
  rep.starts = m;
  rep.noise_paths = noise_paths;
  rep.t_grid = t_grid;
  if (k == 0) return rep;  // p_0 constant: zero discrepancy identically

  const int ak = std::abs(k);
  const std::vector<Configuration> starts = mcmc_sample(params, m, mcfg).configs;
  const int pairs = std::max(1, noise_paths / 2);

  const std::vector<double> weights = detail::intercept_weights(t_grid);
  std::vector<double> abs_err(m), abs_ref(m), var_i(m);
  parallel_for(m, workers, [&](std::size_t i) {
    const cplx target = apply_generator_pk(starts[i], k, params.beta);
    const cplx base = power_sum(starts[i], k);
    std::vector<cplx> est_t(t_grid.size());
    double var_est = 0.0;  // variance of the extrapolated estimate
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
      const double t = t_grid[ti];
      cplx acc{0.0, 0.0};
      double sq = 0.0;
      for (int p = 0; p < pairs; ++p) {
        cplx pair_acc{0.0, 0.0};
        for (double sign : {1.0, -1.0}) {
          Rng rng(derive_seed(params.seed, 0xd217u ^ i, ti, p));
          auto path = detail::evolve_increment_path(
              starts[i], params.beta, t, steps_per_t, ak, rng, sign);
          cplx inc = path.end.p(ak);
          cplx mart = path.martingale[ak - 1];
          if (k < 0) {
            inc = std::conj(inc);
            mart = std::conj(mart);
          }
          pair_acc += (inc - base - mart) / t;
        }
        pair_acc *= 0.5;
        acc += pair_acc;
        sq += std::norm(pair_acc);
      }
      est_t[ti] = acc / double(pairs);
      const double var_t =
          std::max(0.0, sq / pairs - std::norm(est_t[ti])) / pairs;
      var_est += weights[ti] * weights[ti] * var_t;
    }
    const cplx est = detail::extrapolate_to_zero(t_grid, est_t);
    abs_err[i] = std::abs(est - target);
    abs_ref[i] = std::abs(target);
    var_i[i] = var_est;
  });

  double num = 0.0, den = 0.0, noise = 0.0;
  for (int i = 0; i < m; ++i) {
    num += abs_err[i];
    den += abs_ref[i];
    noise += 0.886 * std::sqrt(var_i[i]);  // E|Z| for complex Gaussian noise
  }
  rep.rel_l1_error = den > 0.0 ? num / den : 0.0;
  rep.noise_fraction = den > 0.0 ? noise / den : 0.0;
  // inconclusive when the expected noise contribution alone exceeds the
  // 5% verification target
  rep.inconclusive = rep.noise_fraction > 0.05;
  if (rep.inconclusive)
    rep.recommended_noise_paths =
        static_cast<int>(noise_paths * std::pow(rep.noise_fraction / 0.05, 2)) +
        1;
  return rep;
}

}  // namespace cbe
