#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace badge {

/// SplitMix64 finalizer; spreads nearby seeds across the state space.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

/// Seeded random stream. All draws are implemented here rather than through
/// <random> distributions so results are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform integer on [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// Standard normal via Box-Muller (no cached second variate).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace badge
