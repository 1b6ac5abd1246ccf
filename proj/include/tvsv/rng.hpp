#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tvsv {

/// Portable seeded random source. The engine (mt19937_64) and std::seed_seq
/// are fully specified by the standard; the uniform and Gaussian transforms
/// are implemented here rather than through std::*_distribution, whose
/// algorithms are implementation-defined. Streams with different ids drawn
/// from the same seed are independent sequences.
class NoiseRng {
 public:
  enum Stream : std::uint32_t { kGaussian = 1, kCorruption = 2, kImpulseValue = 3 };

  NoiseRng(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32), stream};
    engine_.seed(seq);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller, caching the second variate.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double probability) { return uniform() < probability; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tvsv
