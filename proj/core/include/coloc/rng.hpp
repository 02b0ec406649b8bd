#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace coloc {

/// Counter-based deterministic noise source. Every draw is a pure function of
/// (seed, stream, sequence, draw index), so measurements can be generated in
/// any order, on any thread, and still reproduce bit-identically.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Raw 64-bit word for the given counter coordinates.
  std::uint64_t word_at(std::uint64_t stream, std::uint64_t sequence, std::uint64_t draw) const {
    std::uint64_t state = mix(seed_ ^ 0x9e3779b97f4a7c15ULL);
    state = mix(state ^ mix(stream));
    state = mix(state ^ mix(sequence));
    state = mix(state ^ mix(draw));
    return state;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform_at(std::uint64_t stream, std::uint64_t sequence, std::uint64_t draw) const {
    return static_cast<double>(word_at(stream, sequence, draw) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller. Consumes draws `draw` and `draw + 1`.
  double normal_at(std::uint64_t stream, std::uint64_t sequence, std::uint64_t draw) const {
    // Shift u1 away from zero so the log stays finite.
    const double u1 =
        (static_cast<double>(word_at(stream, sequence, draw) >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = uniform_at(stream, sequence, draw + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  // splitmix64 finalizer.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
};

/// Stream identifier for a ranging pair: tag in the high half, anchor low.
inline std::uint64_t pair_stream(std::uint16_t tag, std::uint16_t anchor) {
  return (static_cast<std::uint64_t>(tag) << 32) | anchor;
}

}  // namespace coloc
