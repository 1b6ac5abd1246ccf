#pragma once

#include "tvsv/image.hpp"

namespace tvsv {

// Forward differences with periodic wrap-around, unit grid spacing:
//   (D_h u)(r, c) = u(r, c+1) - u(r, c)
//   (D_v u)(r, c) = u(r+1, c) - u(r, c)

template <typename Scalar>
GradientField<Scalar> gradient(const Image<Scalar>& u) {
  const Index rows = u.rows(), cols = u.cols();
  GradientField<Scalar> g(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Index rn = (r + 1 == rows) ? 0 : r + 1;
    for (Index c = 0; c < cols; ++c) {
      const Index cn = (c + 1 == cols) ? 0 : c + 1;
      g.h(r, c) = u(r, cn) - u(r, c);
      g.v(r, c) = u(rn, c) - u(r, c);
    }
  }
  return g;
}

/// Adjoint of gradient(): returns D^T t = D_h^T t_h + D_v^T t_v, i.e. the
/// negative discrete divergence, so that <gradient(u), t> == <u, divergence(t)>.
template <typename Scalar>
Image<Scalar> divergence(const GradientField<Scalar>& t) {
  const Index rows = t.rows(), cols = t.cols();
  Image<Scalar> out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Index rp = (r == 0) ? rows - 1 : r - 1;
    for (Index c = 0; c < cols; ++c) {
      const Index cp = (c == 0) ? cols - 1 : c - 1;
      out(r, c) = (t.h(r, cp) - t.h(r, c)) + (t.v(rp, c) - t.v(r, c));
    }
  }
  return out;
}

/// Isotropic total variation: sum of per-pixel gradient magnitudes.
template <typename Scalar>
Scalar total_variation(const GradientField<Scalar>& du) {
  return du.magnitude().sum();
}

/// Space-variant TV_p: sum over pixels of |grad u|_i ^ p_i.
template <typename Scalar>
Scalar total_variation_p(const GradientField<Scalar>& du, const Image<Scalar>& p) {
  require_same_shape(p, du.rows(), du.cols(), "total_variation_p");
  return du.magnitude().pow(p).sum();
}

}  // namespace tvsv
