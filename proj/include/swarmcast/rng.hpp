#pragma once

#include <cstdint>

namespace swarmcast {

/// splitmix64 finalizer. Used both as a sequential PRNG step and as the
/// mixing function of the counter-based streams below.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

/// Small deterministic PRNG. All simulator and engine entropy flows
/// through this so replays are bit-identical; std distributions are
/// avoided because their mappings are implementation-defined.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  std::uint32_t next_u32() { return static_cast<std::uint32_t>(next_u64() >> 32); }

  /// Uniform in [0, bound). bound must be > 0.
  std::uint32_t next_below(std::uint32_t bound) {
    // Lemire's multiply-shift; bias negligible and fully deterministic.
    return static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(next_u32()) * bound) >> 32);
  }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  void fill(std::uint8_t* out, std::size_t len) {
    std::size_t i = 0;
    while (i < len) {
      std::uint64_t v = next_u64();
      for (int b = 0; b < 8 && i < len; ++b, ++i) {
        out[i] = static_cast<std::uint8_t>(v >> (8 * b));
      }
    }
  }

 private:
  std::uint64_t state_;
};

/// Counter-based uniform draw in [0,1) keyed by (seed, a, b, c).
/// Order-independent: the same key always yields the same draw, no matter
/// how many other draws happened before it.
inline double keyed_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) {
  std::uint64_t h = seed;
  h = mix64(h ^ (a * 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (b * 0xc2b2ae3d27d4eb4fULL));
  h = mix64(h ^ (c * 0x165667b19e3779f9ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                               std::uint64_t c) {
  std::uint64_t h = seed;
  h = mix64(h ^ (a * 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (b * 0xc2b2ae3d27d4eb4fULL));
  h = mix64(h ^ (c * 0x165667b19e3779f9ULL));
  return h;
}

}  // namespace swarmcast
