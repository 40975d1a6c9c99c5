#pragma once

#include <cstdint>

namespace nullot {

/// SplitMix64; used everywhere instead of std:: distributions so that
/// seeded runs are bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

 private:
  std::uint64_t state_;
};

/// Sub-seed for trial i of a seeded run. Trials stay independent and
/// reproducible regardless of evaluation order.
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t trial) {
  Rng mix(seed ^ (0xD1B54A32D192ED03ull * (trial + 1)));
  return mix.next_u64();
}

}  // namespace nullot
