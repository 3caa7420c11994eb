#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dudemec {

/// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream `stream` of a run keyed by `master`. Collision-free for
/// practical purposes and stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream + 0x9e3779b97f4a7c15ULL));
}

/// Random source with hand-rolled samplers. std::mt19937_64 output is fixed
/// by the standard and the samplers below avoid libstdc++/libc++ distribution
/// differences, so a seed reproduces the same draws everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Box-Muller, one variate per call (the sine half is discarded so the
  /// draw count per sample is fixed).
  double normal(double mean, double stddev) {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Unit-mean exponential unless scaled; this is the Rayleigh power fading
  /// factor.
  double exponential(double mean = 1.0) { return -mean * std::log1p(-uniform()); }

  /// Integer in [0, n). The modulo bias is irrelevant at the n used here.
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace dudemec
