#pragma once

#include <cstdint>

namespace auction {

// SplitMix64 counter generator. The state walks a Weyl sequence and every
// output is a bijective hash of it, so a stream is fully determined by
// (seed, stream) and substreams keyed by e.g. an auction index never
// overlap in practice. Cheap enough to construct one per auction, which is
// what makes parallel simulation reproducible.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(seed + 0x9E3779B97F4A7C15ull * (mix(stream) | 1ull))) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix(state_);
  }

  // uniform on the open interval (0,1)
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  // uniform integer in [0,n); modulo bias is negligible for n << 2^64
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // stable substream key for nested indices (dataset -> market -> auction)
  static std::uint64_t substream(std::uint64_t a, std::uint64_t b) {
    return mix(a + 0xD1B54A32D192ED03ull) ^ mix(b + 0x8CB92BA72F3D8DD7ull);
  }

 private:
  std::uint64_t state_;
};

}  // namespace auction
