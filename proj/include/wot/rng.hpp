#pragma once

#include <array>
#include <cstdint>

namespace wot {

/// SplitMix64 step. Used to expand a 64-bit seed into generator state and to
/// derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministically derives a child seed from (seed, stream). Distinct
/// streams give statistically independent sequences.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// xoshiro256** generator with standard normal variates from the basic
/// Box-Muller transform. The second variate of each pair is cached, so the
/// stream of normals is a fixed function of the seed regardless of how the
/// caller groups its draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace wot
