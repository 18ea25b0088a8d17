#pragma once

#include <array>
#include <cstdint>

namespace bayeshead {

/// Seeded pseudo-random generator (xoshiro256** state initialised by SplitMix64).
///
/// Every transform from raw bits to uniforms and normals is implemented here so
/// a given seed yields the same stream on every platform. `split` derives an
/// independent child stream, which is how chains, warmup and data shuffles get
/// their own generators from a single user seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Unbiased integer in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via the Box-Muller transform (second variate cached).
  double normal();

  /// Child generator for stream `stream`; does not advance this generator.
  Rng split(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

/// One SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace bayeshead
