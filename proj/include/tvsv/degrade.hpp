#pragma once

#include "tvsv/blur.hpp"
#include "tvsv/image.hpp"
#include "tvsv/rng.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>

namespace tvsv {

enum class NoiseKind { kAwgn, kSaltPepper };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kAwgn;
  std::optional<double> sigma;        // AWGN standard deviation, intensity units
  std::optional<double> target_bsnr;  // AWGN level given as BSNR in dB
  std::optional<double> gamma;        // SPN corruption probability
  std::uint64_t seed = 0;

  static NoiseSpec awgn_sigma(double sigma, std::uint64_t seed) {
    return {NoiseKind::kAwgn, sigma, std::nullopt, std::nullopt, seed};
  }
  static NoiseSpec awgn_bsnr(double bsnr_db, std::uint64_t seed) {
    return {NoiseKind::kAwgn, std::nullopt, bsnr_db, std::nullopt, seed};
  }
  static NoiseSpec salt_pepper(double gamma, std::uint64_t seed) {
    return {NoiseKind::kSaltPepper, std::nullopt, std::nullopt, gamma, seed};
  }

  void validate() const {
    if (kind == NoiseKind::kAwgn) {
      if (sigma.has_value() == target_bsnr.has_value())
        throw std::invalid_argument("AWGN noise needs exactly one of sigma / target BSNR");
      if (gamma) throw std::invalid_argument("AWGN noise does not take gamma");
      if (sigma && !(*sigma >= 0.0)) throw std::invalid_argument("AWGN sigma must be >= 0");
      if (target_bsnr && !std::isfinite(*target_bsnr))
        throw std::invalid_argument("target BSNR must be finite");
    } else {
      if (!gamma || !(*gamma >= 0.0 && *gamma <= 1.0))
        throw std::invalid_argument("SPN gamma must be in [0, 1]");
      if (sigma || target_bsnr) throw std::invalid_argument("SPN noise takes only gamma");
    }
  }
};

template <typename Scalar>
struct DegradationRecord {
  Image<Scalar> g;
  Mask mask;  // corrupted pixels (all false for AWGN)
  double sigma = 0.0;
  double gamma = 0.0;
  double bsnr = 0.0;  // realized, dB; +inf when g == Ku
  std::uint64_t seed = 0;
};

/// 10 log10 ||Ku - mean(Ku)||^2 / ||g - Ku||^2, given the blurred image Ku.
template <typename Scalar>
double bsnr_from_blurred(const Image<Scalar>& g, const Image<Scalar>& ku) {
  require_same_shape(g, ku.rows(), ku.cols(), "bsnr");
  const double noise = double((g - ku).matrix().squaredNorm());
  if (noise == 0.0) return std::numeric_limits<double>::infinity();
  const double signal = double((ku - ku.mean()).matrix().squaredNorm());
  return 10.0 * std::log10(signal / noise);
}

/// Blurred signal-to-noise ratio of observation g for clean image u, in dB.
template <typename Scalar>
double bsnr(const Image<Scalar>& g, const Image<Scalar>& u, const BlurOperator<Scalar>& k) {
  return bsnr_from_blurred<Scalar>(g, k.apply(u));
}

/// Improvement in SNR of restoration u_star over observation g, in dB.
template <typename Scalar>
double isnr(const Image<Scalar>& g, const Image<Scalar>& u, const Image<Scalar>& u_star) {
  require_same_shape(g, u.rows(), u.cols(), "isnr observation");
  require_same_shape(u_star, u.rows(), u.cols(), "isnr restoration");
  const double err = double((u_star - u).matrix().squaredNorm());
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(double((g - u).matrix().squaredNorm()) / err);
}

/// Noise standard deviation giving the requested BSNR (in expectation) for blurred image ku.
template <typename Scalar>
double sigma_for_bsnr(const Image<Scalar>& ku, double bsnr_db) {
  const double spread = double((ku - ku.mean()).matrix().norm());
  return spread / (std::sqrt(double(ku.size())) * std::pow(10.0, bsnr_db / 20.0));
}

/// g = Ku + n with n i.i.d. N(0, sigma^2), drawn in row-major pixel order.
template <typename Scalar>
DegradationRecord<Scalar> degrade_awgn(const Image<Scalar>& u, const BlurOperator<Scalar>& k,
                                       const NoiseSpec& spec) {
  spec.validate();
  if (spec.kind != NoiseKind::kAwgn) throw std::invalid_argument("degrade_awgn: spec is not AWGN");
  const Image<Scalar> ku = k.apply(u);
  DegradationRecord<Scalar> rec;
  rec.seed = spec.seed;
  rec.sigma = spec.sigma ? *spec.sigma : sigma_for_bsnr(ku, *spec.target_bsnr);
  rec.mask = Mask::Constant(u.rows(), u.cols(), false);
  rec.g = ku;
  if (rec.sigma > 0.0) {
    NoiseRng rng(spec.seed, NoiseRng::kGaussian);
    for (Index i = 0; i < rec.g.size(); ++i)
      rec.g.data()[i] += Scalar(rec.sigma * rng.gaussian());
  }
  rec.bsnr = bsnr_from_blurred<Scalar>(rec.g, ku);
  return rec;
}

/// Salt-and-pepper corruption of Ku: each pixel is hit with probability
/// gamma and then set to 0 or 1 with equal probability.
template <typename Scalar>
DegradationRecord<Scalar> degrade_spn(const Image<Scalar>& u, const BlurOperator<Scalar>& k,
                                      const NoiseSpec& spec) {
  spec.validate();
  if (spec.kind != NoiseKind::kSaltPepper)
    throw std::invalid_argument("degrade_spn: spec is not salt-and-pepper");
  const Image<Scalar> ku = k.apply(u);
  DegradationRecord<Scalar> rec;
  rec.seed = spec.seed;
  rec.gamma = *spec.gamma;
  rec.g = ku;
  rec.mask = Mask::Constant(u.rows(), u.cols(), false);
  NoiseRng hit(spec.seed, NoiseRng::kCorruption);
  NoiseRng value(spec.seed, NoiseRng::kImpulseValue);
  for (Index i = 0; i < rec.g.size(); ++i) {
    if (!hit.bernoulli(rec.gamma)) continue;
    rec.mask.data()[i] = true;
    rec.g.data()[i] = value.bernoulli(0.5) ? Scalar(1) : Scalar(0);
  }
  rec.bsnr = bsnr_from_blurred<Scalar>(rec.g, ku);
  return rec;
}

template <typename Scalar>
DegradationRecord<Scalar> degrade(const Image<Scalar>& u, const BlurOperator<Scalar>& k,
                                  const NoiseSpec& spec) {
  return spec.kind == NoiseKind::kAwgn ? degrade_awgn(u, k, spec) : degrade_spn(u, k, spec);
}

}  // namespace tvsv
