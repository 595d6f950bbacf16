#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cbe/parallel.hpp"
#include "cbe/rng.hpp"

namespace cbe {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Reduce an angle into [0, 2*pi).
inline double wrap_angle(double x) {
  x = std::fmod(x, two_pi);
  if (x < 0.0) x += two_pi;
  if (x >= two_pi) x = 0.0;  // fmod can round up to 2*pi
  return x;
}

struct EnsembleParams {
  int n = 1;
  double beta = 2.0;
  std::uint64_t seed = 0;
};

// An ordered point of the simplex: n angles in [0, 2*pi), nondecreasing.
struct Configuration {
  std::vector<double> angles;

  int n() const { return static_cast<int>(angles.size()); }

  static Configuration sorted(std::vector<double> a) {
    for (auto& x : a) x = wrap_angle(x);
    std::sort(a.begin(), a.end());
    return Configuration{std::move(a)};
  }
};

inline void validate(const EnsembleParams& p) {
  if (p.n < 1) throw std::invalid_argument("EnsembleParams: n must be >= 1");
  if (!(p.beta > 0.0))
    throw std::invalid_argument("EnsembleParams: beta must be > 0");
}

// log Z_{n,beta} = log Gamma(1 + n*beta/2) - n*log Gamma(1 + beta/2)
inline double selberg_log_constant(int n, double beta) {
  if (n < 1) throw std::invalid_argument("selberg_log_constant: n >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("selberg_log_constant: beta > 0");
  return std::lgamma(1.0 + 0.5 * n * beta) - n * std::lgamma(1.0 + 0.5 * beta);
}

inline double selberg_constant(int n, double beta) {
  const double lz = selberg_log_constant(n, beta);
  const double z = std::exp(lz);
  if (!std::isfinite(z))
    throw std::range_error(
        "selberg_constant: exp overflow at n=" + std::to_string(n) +
        ", beta=" + std::to_string(beta) + "; use selberg_log_constant");
  return z;
}

// beta * sum_{j<k} log|e^{ix_j} - e^{ix_k}|; -inf when two angles coincide.
// |e^{ix} - e^{iy}| = 2|sin((x-y)/2)|.
inline double log_density_unnormalized(const Configuration& config, double beta) {
  const auto& x = config.angles;
  const int n = config.n();
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const double s = std::fabs(std::sin(0.5 * (x[j] - x[k])));
      if (s == 0.0) return -std::numeric_limits<double>::infinity();
      sum += std::log(2.0 * s);
    }
  }
  return beta * sum;
}

// log pi(x with site j moved to x_new) - log pi(x). The pair terms not
// involving site j cancel, so only 2(n-1) sine factors are needed.
inline double mcmc_log_accept_ratio(const std::vector<double>& x, int j,
                                    double x_new, double beta) {
  const int n = static_cast<int>(x.size());
  double num = 1.0, den = 1.0, acc = 0.0;
  for (int k = 0; k < n; ++k) {
    if (k == j) continue;
    num *= std::fabs(std::sin(0.5 * (x_new - x[k])));
    den *= std::fabs(std::sin(0.5 * (x[j] - x[k])));
    if (num == 0.0) return -std::numeric_limits<double>::infinity();
    if (num < 1e-140 || num > 1e140 || den < 1e-140 || den > 1e140) {
      if (den == 0.0) return std::numeric_limits<double>::infinity();
      acc += std::log(num) - std::log(den);
      num = den = 1.0;
    }
  }
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return beta * (acc + std::log(num) - std::log(den));
}

enum class ProposalKind { wrapped_uniform, wrapped_gaussian };

struct McmcConfig {
  double proposal_scale = 0.0;  // half-width in radians; 0 -> 2*pi/n
  // fraction of proposals that relocate the site uniformly on the circle;
  // local moves alone leave p_1 with an O(n)-sweep autocorrelation time
  double relocation_prob = 0.1;
  int burn_in = 200;  // sweeps discarded before retaining
  int thinning = 4;   // sweeps between retained configurations
  int chains = 1;
  ProposalKind proposal = ProposalKind::wrapped_uniform;
  int workers = 0;  // 0 -> default_workers()
};

struct Provenance {
  std::string sampler = "metropolis-single-site";
  double proposal_scale = 0.0;
  int burn_in = 0;
  int thinning = 0;
  int chains = 1;
  std::uint64_t seed = 0;
  double acceptance_rate = 0.0;
};

struct SampleBatch {
  std::vector<Configuration> configs;  // chain-major order
  EnsembleParams params;
  Provenance provenance;

  int m() const { return static_cast<int>(configs.size()); }
};

namespace detail {

// Move element j of a sorted vector to its place after changing its value.
inline void resort_single(std::vector<double>& x, int j) {
  const double v = x[j];
  int i = j;
  while (i > 0 && x[i - 1] > v) {
    x[i] = x[i - 1];
    --i;
  }
  while (i + 1 < static_cast<int>(x.size()) && x[i + 1] < v) {
    x[i] = x[i + 1];
    ++i;
  }
  x[i] = v;
}

struct ChainResult {
  std::vector<Configuration> configs;
  long proposals = 0;
  long accepted = 0;
};

inline ChainResult run_chain(const EnsembleParams& params, int m_chain,
                             const McmcConfig& cfg, double scale,
                             std::uint64_t chain_seed) {
  const int n = params.n;
  const double beta = params.beta;
  Rng rng(chain_seed);

  // equally spaced start: the log-gas ground state, distinct by construction
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = two_pi * i / n;

  ChainResult out;
  out.configs.reserve(m_chain);

  auto sweep = [&] {
    for (int j = 0; j < n; ++j) {
      const bool relocate =
          cfg.relocation_prob > 0.0 && rng.uniform() < cfg.relocation_prob;
      const double off = cfg.proposal == ProposalKind::wrapped_uniform
                             ? scale * (2.0 * rng.uniform() - 1.0)
                             : scale * rng.gaussian();
      const double x_new =
          relocate ? rng.uniform(0.0, two_pi) : wrap_angle(x[j] + off);
      const double dlp =
          n == 1 ? 0.0 : mcmc_log_accept_ratio(x, j, x_new, beta);
      const double u = rng.uniform();
      ++out.proposals;
      if (std::log(u) < dlp) {
        x[j] = x_new;
        resort_single(x, j);
        ++out.accepted;
      }
    }
  };

  for (int s = 0; s < cfg.burn_in; ++s) sweep();
  for (int r = 0; r < m_chain; ++r) {
    for (int s = 0; s < cfg.thinning; ++s) sweep();
    out.configs.push_back(Configuration{x});
  }
  return out;
}

}  // namespace detail

// Metropolis-Hastings sampler targeting the CbetaE(n, beta) law. The chain
// count and all tunables live in cfg; the result is deterministic given
// (params.seed, cfg) for any worker count.
inline SampleBatch mcmc_sample(const EnsembleParams& params, int m,
                               const McmcConfig& cfg = {}) {
  validate(params);
  if (m < 1) throw std::invalid_argument("mcmc_sample: m must be >= 1");
  const int chains = std::max(1, cfg.chains);
  const double scale =
      cfg.proposal_scale > 0.0 ? cfg.proposal_scale : two_pi / params.n;

  std::vector<detail::ChainResult> results(chains);
  parallel_for(chains, cfg.workers, [&](std::size_t c) {
    const int m_chain = m / chains + (static_cast<int>(c) < m % chains ? 1 : 0);
    results[c] = detail::run_chain(params, m_chain, cfg, scale,
                                   derive_seed(params.seed, 0xc4a1u, c));
  });

  SampleBatch batch;
  batch.params = params;
  long proposals = 0, accepted = 0;
  for (auto& r : results) {
    proposals += r.proposals;
    accepted += r.accepted;
    for (auto& c : r.configs) batch.configs.push_back(std::move(c));
  }
  batch.provenance.proposal_scale = scale;
  batch.provenance.burn_in = cfg.burn_in;
  batch.provenance.thinning = cfg.thinning;
  batch.provenance.chains = chains;
  batch.provenance.seed = params.seed;
  batch.provenance.acceptance_rate =
      proposals > 0 ? static_cast<double>(accepted) / proposals : 0.0;
  return batch;
}

struct McmcDiagnostics {
  double acceptance_rate = 0.0;
  double autocorrelation_time = 0.5;  // of Re p_1, in retained samples
  bool reliable = true;
  std::string note;
};

namespace detail {

// Integrated autocorrelation time 1/2 + sum rho_s with Sokal's adaptive
// window (smallest W with W >= 6 tau(W)).
inline double integrated_autocorrelation_time(const std::vector<double>& y) {
  const int n = static_cast<int>(y.size());
  if (n < 4) return 0.5;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  double c0 = 0.0;
  for (double v : y) c0 += (v - mean) * (v - mean);
  c0 /= n;
  if (c0 <= 0.0) return 0.5;
  double tau = 0.5;
  for (int s = 1; s < n / 2; ++s) {
    double cs = 0.0;
    for (int i = 0; i + s < n; ++i) cs += (y[i] - mean) * (y[i + s] - mean);
    cs /= n;
    tau += cs / c0;
    if (s >= 6.0 * tau) break;
  }
  return std::max(tau, 0.5);
}

}  // namespace detail

inline McmcDiagnostics mcmc_diagnostics(const SampleBatch& batch) {
  McmcDiagnostics diag;
  diag.acceptance_rate = batch.provenance.acceptance_rate;
  const int m = batch.m();
  if (m < 50) {
    diag.reliable = false;
    diag.note = "fewer than 50 retained samples; diagnostics unreliable";
  }
  const int chains = std::max(1, batch.provenance.chains);
  double tau_sum = 0.0;
  int chains_used = 0;
  int offset = 0;
  for (int c = 0; c < chains; ++c) {
    const int m_chain = m / chains + (c < m % chains ? 1 : 0);
    std::vector<double> re_p1(m_chain);
    for (int i = 0; i < m_chain; ++i) {
      double s = 0.0;
      for (double a : batch.configs[offset + i].angles) s += std::cos(a);
      re_p1[i] = s;
    }
    offset += m_chain;
    if (m_chain >= 4) {
      tau_sum += detail::integrated_autocorrelation_time(re_p1);
      ++chains_used;
    }
  }
  diag.autocorrelation_time = chains_used > 0 ? tau_sum / chains_used : 0.5;
  return diag;
}

}  // namespace cbe
