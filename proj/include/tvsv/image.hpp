#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace tvsv {

using Index = Eigen::Index;

/// Grayscale image: rows = height (d1), cols = width (d2), row-major storage so
/// that data()[row * width + col] is pixel (row, col).
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-pixel boolean indicator (e.g. the set of impulse-corrupted pixels).
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ImageD = Image<double>;

/// Horizontal and vertical first-order differences of an image.
template <typename Scalar>
struct GradientField {
  Image<Scalar> h;
  Image<Scalar> v;

  GradientField() = default;
  GradientField(Index rows, Index cols)
      : h(Image<Scalar>::Zero(rows, cols)), v(Image<Scalar>::Zero(rows, cols)) {}
  GradientField(Image<Scalar> horizontal, Image<Scalar> vertical)
      : h(std::move(horizontal)), v(std::move(vertical)) {
    if (h.rows() != v.rows() || h.cols() != v.cols())
      throw std::invalid_argument("GradientField: component shapes differ");
  }

  Index rows() const { return h.rows(); }
  Index cols() const { return h.cols(); }

  /// Pixel-wise Euclidean norm of the (h, v) pairs.
  Image<Scalar> magnitude() const { return (h.square() + v.square()).sqrt(); }

  Scalar squaredNorm() const { return h.matrix().squaredNorm() + v.matrix().squaredNorm(); }
  Scalar norm() const { return std::sqrt(squaredNorm()); }

  bool allFinite() const { return h.allFinite() && v.allFinite(); }

  GradientField& operator+=(const GradientField& o) { h += o.h; v += o.v; return *this; }
  GradientField& operator-=(const GradientField& o) { h -= o.h; v -= o.v; return *this; }
  GradientField& operator*=(Scalar s) { h *= s; v *= s; return *this; }

  friend GradientField operator+(GradientField a, const GradientField& b) { return a += b; }
  friend GradientField operator-(GradientField a, const GradientField& b) { return a -= b; }
  friend GradientField operator*(Scalar s, GradientField a) { return a *= s; }
};

template <typename Scalar>
Scalar inner(const GradientField<Scalar>& a, const GradientField<Scalar>& b) {
  return (a.h * b.h).sum() + (a.v * b.v).sum();
}

template <typename Scalar>
Scalar inner(const Image<Scalar>& a, const Image<Scalar>& b) {
  return (a * b).sum();
}

template <typename Derived>
void require_same_shape(const Eigen::ArrayBase<Derived>& a, Index rows, Index cols,
                        const char* what) {
  if (a.rows() != rows || a.cols() != cols)
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(rows) +
                                "x" + std::to_string(cols) + ", got " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

}  // namespace tvsv
