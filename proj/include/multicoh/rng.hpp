#pragma once

#include <array>
#include <cstdint>

namespace multicoh {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3"). Pure: maps a 128-bit counter and 64-bit key to 128
// random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// Purpose tags keep the streams of different consumers disjoint even when
// they share a seed and node indices.
enum class StreamTag : std::uint32_t {
  latents = 1,
  joint_table = 2,
  mixture = 3,
  modulation = 4,
  thinning = 5,
  monte_carlo = 6,
  seed_derivation = 7,
  categorical = 8,
};

// A keyed counter-based stream. The key is the master seed; the counter
// carries (i, j, extra, tag) plus an internal block index, so every
// (seed, tag, i, j, extra) tuple addresses its own independent sequence.
// Edge draws therefore do not depend on iteration order or scheduling.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, StreamTag tag, std::uint32_t i,
               std::uint32_t j = 0, std::uint32_t extra = 0);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter base_;
  std::uint32_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
};

// Child seed for replicate / sub-experiment `index` of a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace multicoh
