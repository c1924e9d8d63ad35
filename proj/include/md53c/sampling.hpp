#pragma once

#include <cstdint>
#include <random>

namespace md53c {

/// Per-sample random stream. Stream k of a seed depends only on (seed, tag, k),
/// so batch results do not depend on evaluation order.
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index)
      : engine_(mix(mix(seed ^ mix(tag)) + index)) {}

  /// Uniform double in [lo, hi), built from 53 engine bits so results agree
  /// across standard library implementations.
  double uniform(double lo, double hi) {
    const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  /// +1 or -1 with equal probability.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

  /// Magnitude in [lo, hi) with a random sign.
  double signed_magnitude(double lo, double hi) { return sign() * uniform(lo, hi); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace md53c
