#pragma once

#include <cmath>
#include <cstdint>

// Counter-based deterministic generator.  The whole toolkit routes every random
// draw through this so that a seed pins the entire experiment byte-for-byte on
// any platform with IEEE-754 doubles.
//
// Algorithm (fixed, do not change without bumping file formats):
//   out_i = fin(seed + (i+1) * 0x9E3779B97F4A7C15)          [splitmix64]
//   fin(z): z ^= z>>30; z *= 0xBF58476D1CE4E5B9;
//           z ^= z>>27; z *= 0x94D049BB133111EB; z ^= z>>31
// uniform01  : (out >> 11) * 2^-53                      -> [0,1)
// uniform    : ((out >> 11) + 0.5) * 2^-53              -> (0,1), log-safe
// normal_pair: Marsaglia polar method on uniform01 pairs (no cached state; the
//              stream position depends only on the number of draws made)
// laplace    : inverse CDF on uniform

namespace relureg {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform on [0,1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0,1); safe to pass through log()
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // two independent standard normals (polar method)
  void normal_pair(double& g0, double& g1) {
    for (;;) {
      const double u = 2.0 * uniform01() - 1.0;
      const double v = 2.0 * uniform01() - 1.0;
      const double s = u * u + v * v;
      if (s >= 1.0 || s == 0.0) continue;
      const double f = std::sqrt(-2.0 * std::log(s) / s);
      g0 = u * f;
      g1 = v * f;
      return;
    }
  }

  // single standard normal (partner draw discarded)
  double normal() {
    double a, b;
    normal_pair(a, b);
    return a;
  }

  // Laplace(0, scale) via inverse CDF
  double laplace(double scale) {
    const double u = uniform_open01() - 0.5;
    const double sign = u < 0.0 ? -1.0 : 1.0;
    return -scale * sign * std::log(1.0 - 2.0 * std::abs(u));
  }

  // Independent child stream; used to decouple label corruption from marginal
  // draws.  Fixed derivation: re-finalize the seed xored with a mixed index.
  Rng substream(std::uint64_t idx) const {
    Rng mixer(idx);
    const std::uint64_t m = mixer.next_u64();
    Rng child(0);
    child.seed_ = seed_ ^ m ^ 0x632BE59BD9B4E019ull;
    return child;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace relureg
