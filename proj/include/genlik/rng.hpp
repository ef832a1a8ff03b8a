#pragma once

#include <cstdint>

namespace genlik {

// Deterministic stream of pseudo-random numbers, addressed by a
// (seed, stream_id) pair. Identical pairs reproduce identical draws on
// every platform and under any thread count, so experiments can hand
// one stream per work item and stay bit-reproducible. xoshiro256++
// core, state expanded from the pair with splitmix64.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t x = seed ^ (stream_id * 0x9e3779b97f4a7c15ULL);
    for (auto& word : state_) word = splitmix64(x);
    // all-zero state is invalid for xoshiro
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next() {
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

  // uniform on [0,1), 53-bit resolution
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform on (0,1]; used where strictly positive weights are drawn
  double uniform_positive() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
};

}  // namespace genlik
