#pragma once

#include <cstdint>

#include "pairmix/gauss.hpp"

namespace pairmix {

// splitmix64 finalizer; also used to hash (seed, stream) pairs.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// splitmix64 stream, used only to expand seeds into xoshiro state.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

 private:
  std::uint64_t state_;
};

// xoshiro256++ with splitmix64 seeding.  Fully specified bit-for-bit so that
// draws are reproducible across platforms and independent of the C++
// standard library's distribution implementations.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  // Decorrelated generator for one unit of a simulated draw: the stream
  // index is folded into the seed through an injective affine map plus the
  // splitmix finalizer, so row i's draws do not depend on how many draws
  // earlier rows consumed.
  static Xoshiro256pp substream(std::uint64_t seed, std::uint64_t stream) {
    const std::uint64_t key =
        mix64(mix64(seed) + (stream + 1) * 0xD2B74407B1CE6E93ULL);
    return Xoshiro256pp(key);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform draw strictly inside (0, 1): 53 random bits shifted to cell
  // midpoints, so the normal quantile below never sees 0 or 1.
  double uniform() { return ((next() >> 11) + 0.5) * 0x1.0p-53; }

  // Standard normal via the inverse distribution function (one uniform per
  // draw; no rejection, so consumption per variate is fixed).
  double normal() { return std_normal_quantile(uniform()); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace pairmix
