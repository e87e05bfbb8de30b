#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "vssc/types.hpp"

namespace vssc {

// Deterministic random source. The engine is std::mt19937_64, whose output
// sequence is pinned by the standard; every derived draw below is hand-rolled
// on top of the raw 64-bit stream because the std distribution templates are
// implementation-defined and would break cross-toolchain reproducibility.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1): top 53 bits of the stream.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1], safe as a log argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, n) by rejection sampling.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw ValidationError("uniform_index needs n >= 1");
    const std::uint64_t bound = n;
    const std::uint64_t reject_above =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x < reject_above) return static_cast<std::size_t>(x % bound);
    }
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Independent sub-seed for a pipeline stage: one splitmix64 step over the
// base seed offset by the stream id. Stages seeded this way do not share
// stream prefixes even when the base seed is small.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace vssc
