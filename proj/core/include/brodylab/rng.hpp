#pragma once

#include <cstdint>

#include "brodylab/common.hpp"

namespace brodylab {

/// Counter-based splittable generator. A stream is keyed by an arbitrary
/// tuple of 64-bit labels (seed, sample index, lattice coordinates, ...),
/// so per-coefficient draws are order-independent and parallel-safe.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : state_(mix(key + 0x9e3779b97f4a7c15ULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on the closed unit disk, by rejection from the square.
  cplx unit_disk() {
    for (;;) {
      double x = uniform(-1.0, 1.0);
      double y = uniform(-1.0, 1.0);
      if (x * x + y * y <= 1.0) return {x, y};
    }
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Combines labels into a stream key.
inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t a,
                                std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t k = Rng::mix(seed ^ 0x2545f4914f6cdd1dULL);
  k = Rng::mix(k ^ a);
  k = Rng::mix(k ^ b);
  k = Rng::mix(k ^ c);
  return k;
}

}  // namespace brodylab
