#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cbe/ensemble.hpp"
#include "cbe/parallel.hpp"
#include "cbe/rng.hpp"
#include "cbe/statistics.hpp"

namespace cbe {

// Uniformly weighted empirical measure on R^dim.
struct PointCloud {
  int dim = 0;
  std::vector<std::vector<double>> points;

  int size() const { return static_cast<int>(points.size()); }
};

inline PointCloud make_cloud(std::vector<std::vector<double>> pts) {
  if (pts.empty()) throw std::invalid_argument("PointCloud: empty");
  PointCloud c;
  c.dim = static_cast<int>(pts.front().size());
  for (const auto& p : pts)
    if (static_cast<int>(p.size()) != c.dim)
      throw std::invalid_argument("PointCloud: inconsistent dimensions");
  c.points = std::move(pts);
  return c;
}

// Complex d-vectors flattened to real 2d-space.
inline PointCloud cloud_from_complex(const std::vector<std::vector<cplx>>& v) {
  std::vector<std::vector<double>> pts;
  pts.reserve(v.size());
  for (const auto& z : v) {
    std::vector<double> p;
    p.reserve(2 * z.size());
    for (const cplx& c : z) {
      p.push_back(c.real());
      p.push_back(c.imag());
    }
    pts.push_back(std::move(p));
  }
  return make_cloud(std::move(pts));
}

inline double euclidean(const std::vector<double>& a,
                        const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Minimum-cost perfect matching on a square cost matrix by shortest
// augmenting paths with potentials (the classic O(m^3) assignment
// algorithm). Returns the column matched to each row.
inline std::vector<int> solve_assignment(
    const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(n);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) match[p[j] - 1] = j - 1;
  return match;
}

enum class W1Method { exact, sliced };

inline constexpr int kExactSolverCap = 2000;

namespace detail {

// 1-d W1 between empirical measures with (possibly) unequal sizes:
// integral of |F_a^{-1} - F_b^{-1}| over the merged quantile breakpoints.
inline double w1_sorted_1d(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const int na = static_cast<int>(a.size());
  const int nb = static_cast<int>(b.size());
  if (na == nb) {
    double s = 0.0;
    for (int i = 0; i < na; ++i) s += std::fabs(a[i] - b[i]);
    return s / na;
  }
  double total = 0.0, q = 0.0;
  int ia = 0, ib = 0;
  while (ia < na && ib < nb) {
    const double qa = static_cast<double>(ia + 1) / na;
    const double qb = static_cast<double>(ib + 1) / nb;
    const double next = std::min(qa, qb);
    total += (next - q) * std::fabs(a[ia] - b[ib]);
    q = next;
    if (qa <= qb) ++ia;
    if (qb <= qa) ++ib;
  }
  return total;
}

}  // namespace detail

// Empirical Wasserstein-1 distance between two point clouds. `exact`
// solves the balanced assignment problem on the Euclidean cost matrix and
// returns the mean matched distance; `sliced` averages 1-d distances over
// fixed-seed random projection directions.
inline double empirical_w1(const PointCloud& a, const PointCloud& b,
                           W1Method method = W1Method::exact,
                           int sliced_directions = 128, int workers = 0) {
  if (a.size() == 0 || b.size() == 0)
    throw std::invalid_argument("empirical_w1: empty cloud");
  if (a.dim != b.dim) throw std::invalid_argument("empirical_w1: dim mismatch");

  if (method == W1Method::exact) {
    const int m = a.size();
    if (b.size() != m)
      throw std::invalid_argument("empirical_w1: exact needs equal sizes");
    if (m > kExactSolverCap)
      throw std::invalid_argument(
          "empirical_w1: exact solver capped at m = 2000; use sliced");
    std::vector<std::vector<double>> cost(m, std::vector<double>(m));
    parallel_for(m, workers, [&](std::size_t i) {
      for (int j = 0; j < m; ++j)
        cost[i][j] = euclidean(a.points[i], b.points[j]);
    });
    const std::vector<int> match = solve_assignment(cost);
    double total = 0.0;
    for (int i = 0; i < m; ++i) total += cost[i][match[i]];
    return total / m;
  }

  // sliced: deterministic direction set, independent of the inputs
  Rng dir_rng(0x511ced01ULL);
  double sum = 0.0;
  std::vector<double> pa(a.size()), pb(b.size());
  for (int p = 0; p < sliced_directions; ++p) {
    std::vector<double> dir(a.dim);
    double norm = 0.0;
    for (double& c : dir) {
      c = dir_rng.gaussian();
      norm += c * c;
    }
    norm = std::sqrt(norm);
    for (double& c : dir) c /= norm;
    for (int i = 0; i < a.size(); ++i) {
      double s = 0.0;
      for (int c = 0; c < a.dim; ++c) s += dir[c] * a.points[i][c];
      pa[i] = s;
    }
    for (int i = 0; i < b.size(); ++i) {
      double s = 0.0;
      for (int c = 0; c < b.dim; ++c) s += dir[c] * b.points[i][c];
      pb[i] = s;
    }
    sum += detail::w1_sorted_1d(pa, pb);
  }
  return sum / sliced_directions;
}

struct W1Row {
  int n = 0;
  int d = 0;
  double beta = 0.0;
  double w1 = 0.0;
  double se = 0.0;
  double floor = 0.0;     // same-law resolution limit: W1 of two G_d batches
  double floor_se = 0.0;
  int m = 0;
  int repeats = 0;
  W1Method method = W1Method::exact;
};

struct W1Experiment {
  std::vector<W1Row> rows;
};

// For each n, estimates W1(T_d cloud, G_d cloud) with m points per cloud,
// averaged over independent replicates; the same-law floor (two fresh G_d
// batches) is reported alongside so a plateau is never mistaken for
// convergence.
inline W1Experiment w1_convergence_experiment(double beta, int d,
                                              const std::vector<int>& n_grid,
                                              int m, std::uint64_t seed,
                                              const McmcConfig& mcfg = {},
                                              int repeats = 5,
                                              W1Method method = W1Method::exact,
                                              int workers = 0) {
  if (m < 1 || repeats < 2)
    throw std::invalid_argument("w1_convergence_experiment: m >= 1, repeats >= 2");
  W1Experiment out;
  for (int n : n_grid) {
    std::vector<double> w1s(repeats), floors(repeats);
    for (int r = 0; r < repeats; ++r) {
      EnsembleParams p{n, beta, derive_seed(seed, 0x3a11u, n, r)};
      const SampleBatch batch = mcmc_sample(p, m, mcfg);
      std::vector<std::vector<cplx>> td(m);
      for (int i = 0; i < m; ++i)
        td[i] = power_sum_vector(batch.configs[i], d).values;
      Rng grng(derive_seed(seed, 0x6a55u, n, r));
      const GaussianTarget target{d, beta};
      const auto g1 = sample_gaussian_target(target, m, grng);
      const auto g2 = sample_gaussian_target(target, m, grng);
      const auto g3 = sample_gaussian_target(target, m, grng);
      w1s[r] = empirical_w1(cloud_from_complex(td), cloud_from_complex(g1),
                            method, 128, workers);
      floors[r] = empirical_w1(cloud_from_complex(g2), cloud_from_complex(g3),
                               method, 128, workers);
    }
    W1Row row;
    row.n = n;
    row.d = d;
    row.beta = beta;
    row.m = m;
    row.repeats = repeats;
    row.method = method;
    double mw = 0.0, mf = 0.0;
    for (int r = 0; r < repeats; ++r) {
      mw += w1s[r];
      mf += floors[r];
    }
    mw /= repeats;
    mf /= repeats;
    double vw = 0.0, vf = 0.0;
    for (int r = 0; r < repeats; ++r) {
      vw += (w1s[r] - mw) * (w1s[r] - mw);
      vf += (floors[r] - mf) * (floors[r] - mf);
    }
    row.w1 = mw;
    row.se = std::sqrt(vw / (repeats - 1) / repeats);
    row.floor = mf;
    row.floor_se = std::sqrt(vf / (repeats - 1) / repeats);
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace cbe
