#pragma once

#include "tvsv/image.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <numbers>
#include <vector>

namespace tvsv {

template <typename Scalar>
using ComplexGrid =
    Eigen::Array<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

// Eigen::FFT caches plans internally and is not safe to share between threads.
template <typename Scalar>
Eigen::FFT<Scalar>& thread_fft() {
  thread_local Eigen::FFT<Scalar> fft;
  return fft;
}

template <typename Scalar>
void fft2_inplace(ComplexGrid<Scalar>& x, bool inverse) {
  using Complex = std::complex<Scalar>;
  auto& fft = thread_fft<Scalar>();
  const Index rows = x.rows(), cols = x.cols();

  std::vector<Complex> in(static_cast<size_t>(std::max(rows, cols)));
  std::vector<Complex> out(in.size());

  // kissfft mishandles length 1; that transform is the identity anyway.
  for (Index r = 0; cols > 1 && r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) in[c] = x(r, c);
    if (inverse)
      fft.inv(out.data(), in.data(), cols);
    else
      fft.fwd(out.data(), in.data(), cols);
    for (Index c = 0; c < cols; ++c) x(r, c) = out[c];
  }
  for (Index c = 0; rows > 1 && c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) in[r] = x(r, c);
    if (inverse)
      fft.inv(out.data(), in.data(), rows);
    else
      fft.fwd(out.data(), in.data(), rows);
    for (Index r = 0; r < rows; ++r) x(r, c) = out[r];
  }
}

}  // namespace detail

/// Unnormalized 2-D DFT: X(k, l) = sum_{r,c} x(r, c) exp(-2 pi i (k r / rows + l c / cols)).
template <typename Scalar>
ComplexGrid<Scalar> fft2(const Image<Scalar>& x) {
  ComplexGrid<Scalar> out = x.template cast<std::complex<Scalar>>();
  detail::fft2_inplace(out, false);
  return out;
}

/// Inverse of fft2 (includes the 1/n scaling); returns the real part.
template <typename Scalar>
Image<Scalar> ifft2_real(ComplexGrid<Scalar> x) {
  detail::fft2_inplace(x, true);
  return x.real();
}

/// Eigenvalues of the periodic blur and forward-difference operators on a
/// rows x cols grid. All three are diagonal in the same 2-D DFT basis.
template <typename Scalar>
struct SpectralMultipliers {
  ComplexGrid<Scalar> blur;
  ComplexGrid<Scalar> dh;
  ComplexGrid<Scalar> dv;

  Index rows() const { return blur.rows(); }
  Index cols() const { return blur.cols(); }

  /// |D_h|^2 + |D_v|^2, the symbol of D^T D (the periodic 5-point Laplacian).
  Image<Scalar> laplacian_symbol() const { return dh.abs2() + dv.abs2(); }
};

/// Symbols of the periodic forward differences: shift-by-one minus identity.
template <typename Scalar>
void difference_symbols(Index rows, Index cols, ComplexGrid<Scalar>& dh, ComplexGrid<Scalar>& dv) {
  using Complex = std::complex<Scalar>;
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  dh.resize(rows, cols);
  dv.resize(rows, cols);
  for (Index k = 0; k < rows; ++k) {
    const Complex ev = std::polar(Scalar(1), two_pi * Scalar(k) / Scalar(rows)) - Scalar(1);
    for (Index l = 0; l < cols; ++l) {
      const Complex eh = std::polar(Scalar(1), two_pi * Scalar(l) / Scalar(cols)) - Scalar(1);
      dh(k, l) = eh;
      dv(k, l) = ev;
    }
  }
}

}  // namespace tvsv
