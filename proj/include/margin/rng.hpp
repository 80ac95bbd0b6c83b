#pragma once

#include <cstdint>
#include <random>

#include "margin/types.hpp"

namespace margin {

/// Seeded generator with platform-independent draws. std::mt19937_64 is
/// fully specified by the standard; the distributions in <random> are not,
/// so the conversions below are done by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). bound must be positive.
  Index below(Index bound);

  /// Standard normal variate (Box-Muller, one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace margin
