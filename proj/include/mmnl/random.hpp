#pragma once

#include <cstdint>
#include <random>

namespace mmnl {

/// Seedable generator with portable output. The engine is std::mt19937_64,
/// whose sequence is fixed by the standard; the distributions are written out
/// here because the standard library ones differ between implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); bound must be positive. Rejection
  /// sampling keeps it exactly uniform.
  std::uint64_t uniform_index(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % bound;
  }

  /// Standard normal via Box-Muller; one variate per call.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace mmnl
