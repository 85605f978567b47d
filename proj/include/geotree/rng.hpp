#pragma once

#include <cmath>
#include <cstdint>

namespace geotree {

/// SplitMix64 finalizer. Used both as the generator output function and as
/// the seed-derivation hash, so every stream is a pure function of its seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// Seed of sub-stream `index` of `seed`. Replication i of a campaign uses
/// derive_seed(base, i), so results do not depend on execution order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(seed ^ mix64(index + kGolden));
}

/// Counter-based generator: output k is mix64(seed + k * golden).
class Rng {
public:
  explicit constexpr Rng(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next_u64() {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Exponential with rate 1.
  double exponential() { return -std::log1p(-uniform()); }

  /// Poisson(mean) by inversion on chunks of mean at most 16; additivity keeps it exact.
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 0.0) {
      const double m = mean > 16.0 ? 16.0 : mean;
      mean -= m;
      total += poisson_small(m);
    }
    return total;
  }

private:
  std::uint64_t poisson_small(double m) {
    double u = uniform();
    double p = std::exp(-m);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf) {
      ++k;
      p *= m / static_cast<double>(k);
      const double next = cdf + p;
      if (next == cdf) break;  // tail below double resolution
      cdf = next;
    }
    return k;
  }

  std::uint64_t state_;
};

} // namespace geotree
