#pragma once

#include "tvsv/image.hpp"
#include "tvsv/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace tvsv {

/// Gaussian point-spread function truncated to a band x band window and
/// normalized to unit sum.
template <typename Scalar>
Image<Scalar> gaussian_kernel(int band, Scalar sigma) {
  if (band < 1 || band % 2 == 0)
    throw std::invalid_argument("gaussian_kernel: band must be a positive odd integer");
  if (!(sigma > Scalar(0)))
    throw std::invalid_argument("gaussian_kernel: sigma must be > 0");
  const int half = band / 2;
  Image<Scalar> k(band, band);
  for (int y = -half; y <= half; ++y)
    for (int x = -half; x <= half; ++x)
      k(y + half, x + half) = std::exp(-Scalar(x * x + y * y) / (Scalar(2) * sigma * sigma));
  k /= k.sum();
  return k;
}

/// Periodic 2-D convolution with a Gaussian PSF, applied through the DFT.
/// The spectral multiplier is computed once for the grid the operator is
/// built for; applying it to an image of another shape is an error.
template <typename Scalar>
class BlurOperator {
 public:
  BlurOperator(int band, Scalar sigma, Index rows, Index cols)
      : band_(band), sigma_(sigma), kernel_(gaussian_kernel(band, sigma)) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("BlurOperator: empty grid");
    multiplier_ = fft2(embed_kernel(rows, cols));
  }

  /// Identity operator (band 1) on a rows x cols grid.
  static BlurOperator identity(Index rows, Index cols) { return BlurOperator(1, Scalar(1), rows, cols); }

  int band() const { return band_; }
  Scalar sigma() const { return sigma_; }
  const Image<Scalar>& kernel() const { return kernel_; }
  Index rows() const { return multiplier_.rows(); }
  Index cols() const { return multiplier_.cols(); }
  const ComplexGrid<Scalar>& multiplier() const { return multiplier_; }

  Image<Scalar> apply(const Image<Scalar>& u) const {
    check(u);
    return ifft2_real<Scalar>(multiplier_ * fft2(u));
  }

  /// Convolution with the flipped kernel (conjugate multiplier).
  Image<Scalar> adjoint(const Image<Scalar>& v) const {
    check(v);
    return ifft2_real<Scalar>(multiplier_.conjugate() * fft2(v));
  }

  /// Kernel placed on the periodic grid with its center at pixel (0, 0).
  /// Offsets that exceed the grid wrap and accumulate.
  Image<Scalar> embed_kernel(Index rows, Index cols) const {
    Image<Scalar> psf = Image<Scalar>::Zero(rows, cols);
    const int half = band_ / 2;
    for (int y = -half; y <= half; ++y)
      for (int x = -half; x <= half; ++x) {
        const Index r = ((y % rows) + rows) % rows;
        const Index c = ((x % cols) + cols) % cols;
        psf(r, c) += kernel_(y + half, x + half);
      }
    return psf;
  }

 private:
  void check(const Image<Scalar>& u) const {
    if (u.rows() != rows() || u.cols() != cols())
      throw std::invalid_argument("BlurOperator: built for " + std::to_string(rows()) + "x" +
                                  std::to_string(cols()) + ", image is " +
                                  std::to_string(u.rows()) + "x" + std::to_string(u.cols()));
  }

  int band_;
  Scalar sigma_;
  Image<Scalar> kernel_;
  ComplexGrid<Scalar> multiplier_;
};

template <typename Scalar>
Image<Scalar> blur_apply(const BlurOperator<Scalar>& k, const Image<Scalar>& u) {
  return k.apply(u);
}

template <typename Scalar>
Image<Scalar> blur_adjoint(const BlurOperator<Scalar>& k, const Image<Scalar>& v) {
  return k.adjoint(v);
}

/// Multipliers of K, D_h and D_v on a rows x cols grid.
template <typename Scalar>
SpectralMultipliers<Scalar> spectral_multipliers(const BlurOperator<Scalar>& k, Index rows,
                                                 Index cols) {
  SpectralMultipliers<Scalar> m;
  m.blur = (rows == k.rows() && cols == k.cols()) ? k.multiplier()
                                                   : fft2(k.embed_kernel(rows, cols));
  difference_symbols(rows, cols, m.dh, m.dv);
  return m;
}

}  // namespace tvsv
