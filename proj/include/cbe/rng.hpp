#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace cbe {

// SplitMix64 step; used for seeding and for deriving substream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic substream seed from a master seed and up to three tags.
// Every parallel task derives its own stream this way, so results do not
// depend on scheduling or worker count.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = seed;
  s ^= splitmix64(s) + 0x632be59bd9b4e019ULL * (a + 1);
  s ^= splitmix64(s) + 0x9e3779b97f4a7c15ULL * (b + 1);
  s ^= splitmix64(s) + 0xc2b2ae3d27d4eb4fULL * (c + 1);
  return splitmix64(s);
}

// xoshiro256++ with explicit transforms for doubles and Gaussians, so the
// produced streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal, Marsaglia polar method
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, q;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      q = u * u + v * v;
    } while (q >= 1.0 || q == 0.0);
    const double f = std::sqrt(-2.0 * std::log(q) / q);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // standard complex Gaussian: E Z = 0, E|Z|^2 = 1, E Z^2 = 0
  // (real and imaginary parts independent N(0, 1/2))
  std::complex<double> complex_gaussian() {
    constexpr double half = 0.70710678118654752440;  // 1/sqrt(2)
    const double re = gaussian();
    const double im = gaussian();
    return {half * re, half * im};
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cbe
