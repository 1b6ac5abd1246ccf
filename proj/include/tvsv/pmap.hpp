#pragma once

#include "tvsv/differences.hpp"
#include "tvsv/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tvsv {

/// Per-pixel shape exponents p_i in (0, 2].
template <typename Scalar>
class PMap {
 public:
  explicit PMap(Image<Scalar> values) : values_(std::move(values)) {
    if (!((values_ > Scalar(0)) && (values_ <= Scalar(2))).all())
      throw std::invalid_argument("PMap: exponents must lie in (0, 2]");
  }

  static PMap constant(Index rows, Index cols, Scalar p) {
    return PMap(Image<Scalar>::Constant(rows, cols, p));
  }

  const Image<Scalar>& values() const { return values_; }
  Scalar operator()(Index r, Index c) const { return values_(r, c); }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

 private:
  Image<Scalar> values_;
};

/// Generalized Gaussian ratio h(z) = Gamma(1/z) Gamma(3/z) / Gamma(2/z)^2,
/// evaluated in log space.
template <typename Scalar>
Scalar ggd_ratio(Scalar z) {
  if (!(z > Scalar(0))) throw std::domain_error("ggd_ratio: argument must be > 0");
  using std::exp;
  using std::lgamma;
  return exp(lgamma(Scalar(1) / z) + lgamma(Scalar(3) / z) - Scalar(2) * lgamma(Scalar(2) / z));
}

/// Tabulated h(p) on a uniform grid over [p_min, 2]; inverted by bisection on
/// the table plus linear interpolation in p.
template <typename Scalar>
class RatioLookup {
 public:
  explicit RatioLookup(Scalar p_min = Scalar(0.05), int resolution = 4096)
      : p_min_(p_min), p_(resolution), h_(resolution) {
    if (!(p_min > Scalar(0) && p_min < Scalar(2)))
      throw std::invalid_argument("RatioLookup: p_min must be in (0, 2)");
    if (resolution < 2) throw std::invalid_argument("RatioLookup: resolution must be >= 2");
    const Scalar step = (Scalar(2) - p_min) / Scalar(resolution - 1);
    for (int i = 0; i < resolution; ++i) {
      p_[i] = (i + 1 == resolution) ? Scalar(2) : p_min + step * Scalar(i);
      h_[i] = ggd_ratio(p_[i]);
    }
  }

  Scalar p_min() const { return p_min_; }
  int resolution() const { return static_cast<int>(p_.size()); }
  const std::vector<Scalar>& p_grid() const { return p_; }
  const std::vector<Scalar>& h_grid() const { return h_; }

  /// h^{-1}(rho), clamped to [p_min, 2].
  Scalar inverse(Scalar rho) const {
    if (std::isnan(rho)) throw std::invalid_argument("RatioLookup: rho is NaN");
    if (rho <= h_.back()) return Scalar(2);
    if (rho >= h_.front()) return p_min_;
    // h_ is strictly decreasing: find the first sample with h <= rho.
    auto it = std::lower_bound(h_.begin(), h_.end(), rho,
                               [](Scalar h, Scalar value) { return h > value; });
    const auto hi = static_cast<size_t>(it - h_.begin());
    const size_t lo = hi - 1;
    const Scalar w = (h_[lo] - rho) / (h_[lo] - h_[hi]);
    return p_[lo] + w * (p_[hi] - p_[lo]);
  }

 private:
  Scalar p_min_;
  std::vector<Scalar> p_;
  std::vector<Scalar> h_;
};

template <typename Scalar>
Scalar ratio_inverse(Scalar rho, const RatioLookup<Scalar>& lut) {
  return lut.inverse(rho);
}

template <typename Scalar>
Image<Scalar> gradient_magnitudes(const Image<Scalar>& u) {
  return gradient(u).magnitude();
}

/// Sum over the s x s window centered at each pixel, periodic at the borders.
template <typename Scalar>
Image<Scalar> periodic_box_sum(const Image<Scalar>& x, int s) {
  const Index rows = x.rows(), cols = x.cols();
  const int half = s / 2;
  auto wrap = [](Index i, Index n) { return ((i % n) + n) % n; };
  Image<Scalar> horiz(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      Scalar acc = 0;
      for (int d = -half; d <= half; ++d) acc += x(r, wrap(c + d, cols));
      horiz(r, c) = acc;
    }
  Image<Scalar> out(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      Scalar acc = 0;
      for (int d = -half; d <= half; ++d) acc += horiz(wrap(r + d, rows), c);
      out(r, c) = acc;
    }
  return out;
}

/// Local moment ratio rho_i = card(N) * sum(m^2) / (sum |m|)^2 over s x s
/// windows. Windows with zero magnitude sum yield NaN.
template <typename Scalar>
Image<Scalar> local_moment_ratio(const Image<Scalar>& magnitudes, int s) {
  if (s < 3 || s % 2 == 0) throw std::invalid_argument("window size must be odd and >= 3");
  const Image<Scalar> sum_sq = periodic_box_sum<Scalar>(magnitudes.square(), s);
  const Image<Scalar> sum_abs = periodic_box_sum<Scalar>(magnitudes.abs(), s);
  const Scalar card = Scalar(s) * Scalar(s);
  Image<Scalar> rho(magnitudes.rows(), magnitudes.cols());
  for (Index i = 0; i < rho.size(); ++i) {
    const Scalar a = sum_abs.data()[i];
    rho.data()[i] = a > Scalar(0) ? card * sum_sq.data()[i] / (a * a)
                                  : std::numeric_limits<Scalar>::quiet_NaN();
  }
  return rho;
}

/// Local shape exponents from s x s windows of gradient magnitudes. Windows
/// with no gradient at all get p = 2.
template <typename Scalar>
PMap<Scalar> estimate_pmap(const Image<Scalar>& u, int s, const RatioLookup<Scalar>& lut) {
  const Image<Scalar> rho = local_moment_ratio<Scalar>(gradient_magnitudes(u), s);
  Image<Scalar> p(u.rows(), u.cols());
  for (Index i = 0; i < p.size(); ++i) {
    const Scalar value = rho.data()[i];
    p.data()[i] = std::isnan(value) ? Scalar(2) : lut.inverse(value);
  }
  return PMap<Scalar>(std::move(p));
}

/// Adaptive mean filter for impulse-corrupted pixels. Each masked pixel is
/// replaced by the mean of the unmasked pixels in the smallest centered odd
/// window (3, 5, 7, ...) holding at least one clean pixel and at least
/// `min_clean_fraction` of the window. Windows wrap periodically and stop
/// growing once they span the grid; unmasked pixels are copied unchanged.
template <typename Scalar>
Image<Scalar> spn_prefilter(const Image<Scalar>& g, const Mask& mask,
                            double min_clean_fraction = 0.1) {
  require_same_shape(mask, g.rows(), g.cols(), "spn_prefilter mask");
  if (mask.size() > 0 && mask.all())
    throw std::invalid_argument("spn_prefilter: every pixel is corrupted");
  const Index rows = g.rows(), cols = g.cols();
  auto wrap = [](Index i, Index n) { return ((i % n) + n) % n; };
  const Index max_half_r = (rows - 1) / 2, max_half_c = (cols - 1) / 2;

  Image<Scalar> out = g;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      if (!mask(r, c)) continue;
      bool done = false;
      for (Index half = 1; !done; ++half) {
        const Index hr = std::min(half, max_half_r), hc = std::min(half, max_half_c);
        const bool spans_grid = hr == max_half_r && hc == max_half_c;
        Scalar sum = 0;
        Index clean = 0;
        for (Index dr = -hr; dr <= hr; ++dr)
          for (Index dc = -hc; dc <= hc; ++dc) {
            const Index rr = wrap(r + dr, rows), cc = wrap(c + dc, cols);
            if (!mask(rr, cc)) {
              sum += g(rr, cc);
              ++clean;
            }
          }
        const double area = double((2 * hr + 1) * (2 * hc + 1));
        if (clean >= 1 && (double(clean) >= min_clean_fraction * area || spans_grid)) {
          out(r, c) = sum / Scalar(clean);
          done = true;
        } else if (spans_grid) {
          // Even-sized grids leave one row/column outside the widest centered
          // window; fall back to every clean pixel.
          Scalar all = 0;
          Index n_clean = 0;
          for (Index i = 0; i < g.size(); ++i)
            if (!mask.data()[i]) {
              all += g.data()[i];
              ++n_clean;
            }
          out(r, c) = all / Scalar(n_clean);
          done = true;
        }
      }
    }
  return out;
}

}  // namespace tvsv
