// rng.hpp -- deterministic random number generation.
//
// xoshiro256** seeded through splitmix64. All draws are implemented here
// rather than with std::uniform_real_distribution so that a (seed, call
// sequence) pair produces identical bits on every platform; dataset
// manifests and training runs rely on that.
#pragma once

#include <array>
#include <cstdint>

namespace reverbkit {

uint64_t splitmix64(uint64_t& state);

/// Derives an independent stream seed from (master seed, index), used to
/// make per-item generation order-independent.
uint64_t derive_seed(uint64_t master, uint64_t index);

class Rng {
 public:
  explicit Rng(uint64_t seed = 0);

  uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform01();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n). n must be > 0.
  uint64_t next_below(uint64_t n);

  /// Standard normal via Box-Muller (one spare cached).
  double normal();

 private:
  std::array<uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace reverbkit
