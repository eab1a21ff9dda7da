#pragma once

#include <cstdint>
#include <limits>

namespace roughlab {

// Every random stream is derived from (seed, replica, purpose). The key is a
// chained splitmix64 finalizer over the three words, so stream i of a batch
// never depends on how many other streams were drawn or on thread layout.
enum class StreamPurpose : std::uint64_t {
  fast_orbit = 1,
  brownian = 2,
  walk = 3,
  ou = 4,
  sde = 5,
  calibration = 6,
  pilot = 7,
  auxiliary = 8,
};

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t replica,
                                StreamPurpose purpose) {
  constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
  std::uint64_t k = mix64(seed + golden);
  k = mix64(k ^ (replica + 2 * golden));
  k = mix64(k ^ (static_cast<std::uint64_t>(purpose) + 3 * golden));
  return k;
}

/// xoshiro256++ seeded through splitmix64. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key) {
    std::uint64_t sm = key;
    for (auto& word : state_) {
      sm += 0x9E3779B97F4A7C15ULL;
      word = mix64(sm);
    }
  }

  Rng(std::uint64_t seed, std::uint64_t replica, StreamPurpose purpose)
      : Rng(stream_key(seed, replica, purpose)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // 53-bit uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace roughlab
