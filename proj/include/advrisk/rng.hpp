#pragma once

#include <cstdint>

#include "advrisk/extreal.hpp"

namespace advrisk {

/// SplitMix64.  State update: state += 0x9E3779B97F4A7C15; output mixing
/// z ^= z >> 30, z *= 0xBF58476D1CE4E5B9; z ^= z >> 27,
/// z *= 0x94D049BB133111EB; z ^= z >> 31.  Pinned so reports produced from a
/// --seed are reproducible across implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Documented random classifier value: draw u in [0,1); u < 1/16 gives -inf,
/// u >= 15/16 gives +inf, otherwise 4 * (u - 1/2).
inline ExtReal random_classifier_value(SplitMix64& gen) {
  double u = gen.next_unit();
  if (u < 0.0625) return ExtReal::neg_inf();
  if (u >= 0.9375) return ExtReal::inf();
  return ExtReal(4.0 * (u - 0.5));
}

}  // namespace advrisk
