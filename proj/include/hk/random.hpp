#pragma once

#include <cstdint>
#include <cmath>

namespace hk {

/// SplitMix64 generator. Tiny, seedable, and stable across platforms, which
/// keeps every seeded run byte-reproducible.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  /// Uniform integer in [lo, hi], both ends inclusive.
  std::int64_t uniformInt(std::int64_t lo, std::int64_t hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }

  /// Standard normal via Box-Muller.
  double gaussian() {
    double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }
};

/// Derives an independent stream seed from a base seed and a stream index.
inline std::uint64_t mixSeed(std::uint64_t base, std::uint64_t stream) {
  SplitMix64 g(base ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
  return g.next();
}

}  // namespace hk
