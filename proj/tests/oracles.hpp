#pragma once

// Independent reference computations for the tests: dense operators assembled
// pixel by pixel, direct loops, grid searches, and a slow primal-dual solver.

#include "tvsv/image.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using tvsv::ImageD;
using tvsv::Index;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Arbitrary-precision values of Gamma(1/z) Gamma(3/z) / Gamma(2/z)^2 (mpmath, 40 digits).
struct RatioValue {
  double z, h;
};
inline constexpr RatioValue kRatioTable[] = {
    {0.05, 40546.0047168756846176201},
    {0.1, 216.8266253869969040247678},
    {0.3, 6.661052616671669489361803},
    {0.5, 10.0 / 3.0},
    {0.7, 2.484640412727999646695757},
    {1.5, 1.698140041089479101349012},
};

inline Vec flatten(const ImageD& u) { return Eigen::Map<const Vec>(u.data(), u.size()); }

inline ImageD unflatten(const Vec& v, Index rows, Index cols) {
  ImageD u(rows, cols);
  Eigen::Map<Vec>(u.data(), u.size()) = v;
  return u;
}

inline Index wrap(Index i, Index n) { return ((i % n) + n) % n; }

// Forward differences with wrap-around, one row per pixel.
inline Mat dense_dh(Index rows, Index cols) {
  Mat d = Mat::Zero(rows * cols, rows * cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      d(r * cols + c, r * cols + c) -= 1.0;
      d(r * cols + c, r * cols + wrap(c + 1, cols)) += 1.0;
    }
  return d;
}

inline Mat dense_dv(Index rows, Index cols) {
  Mat d = Mat::Zero(rows * cols, rows * cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      d(r * cols + c, r * cols + c) -= 1.0;
      d(r * cols + c, wrap(r + 1, rows) * cols + c) += 1.0;
    }
  return d;
}

// Stacked [Dh; Dv].
inline Mat dense_d(Index rows, Index cols) {
  Mat d(2 * rows * cols, rows * cols);
  d << dense_dh(rows, cols), dense_dv(rows, cols);
  return d;
}

// Unit-sum Gaussian weights on the band x band window, indexed [dy + h][dx + h].
inline std::vector<std::vector<double>> gaussian_weights(int band, double sigma) {
  const int h = band / 2;
  std::vector<std::vector<double>> w(band, std::vector<double>(band));
  double total = 0.0;
  for (int dy = -h; dy <= h; ++dy)
    for (int dx = -h; dx <= h; ++dx) total += w[dy + h][dx + h] = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
  for (auto& row : w)
    for (double& x : row) x /= total;
  return w;
}

// (Ku)(r, c) = sum over offsets of w(dy, dx) u(r - dy, c - dx), periodic.
inline ImageD direct_convolution(const ImageD& u, int band, double sigma) {
  const auto w = gaussian_weights(band, sigma);
  const int h = band / 2;
  ImageD out = ImageD::Zero(u.rows(), u.cols());
  for (Index r = 0; r < u.rows(); ++r)
    for (Index c = 0; c < u.cols(); ++c)
      for (int dy = -h; dy <= h; ++dy)
        for (int dx = -h; dx <= h; ++dx)
          out(r, c) += w[dy + h][dx + h] * u(wrap(r - dy, u.rows()), wrap(c - dx, u.cols()));
  return out;
}

inline Mat dense_blur(Index rows, Index cols, int band, double sigma) {
  const auto w = gaussian_weights(band, sigma);
  const int h = band / 2;
  Mat k = Mat::Zero(rows * cols, rows * cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      for (int dy = -h; dy <= h; ++dy)
        for (int dx = -h; dx <= h; ++dx)
          k(r * cols + c, wrap(r - dy, rows) * cols + wrap(c - dx, cols)) += w[dy + h][dx + h];
  return k;
}

// Minimum of xi^p + beta/2 (xi - a)^2 over an n-point uniform grid on [0, a].
inline double prox_grid_min(double a, double p, double beta, int n = 1000000) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double xi = a * double(i) / double(n - 1);
    best = std::min(best, std::pow(xi, p) + 0.5 * beta * (xi - a) * (xi - a));
  }
  return best;
}

// argmin over a grid on [-|v| - 1, |v| + 1] of lambda |r| + (r - v)^2 / 2.
inline double soft_threshold_grid(double v, double lambda, int n = 2000001) {
  const double lim = std::abs(v) + 1.0;
  double best = std::numeric_limits<double>::infinity(), arg = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = -lim + 2.0 * lim * double(i) / double(n - 1);
    const double f = lambda * std::abs(r) + 0.5 * (r - v) * (r - v);
    if (f < best) {
      best = f;
      arg = r;
    }
  }
  return arg;
}

// sum_i |(Du)_i| + mu/2 ||Ku - g||^2 with dense operators.
inline double tv_l2_objective(const Vec& u, const Vec& g, const Mat& d, const Mat& k, double mu) {
  const Index n = u.size();
  const Vec du = d * u;
  double tv = 0.0;
  for (Index i = 0; i < n; ++i) tv += std::hypot(du(i), du(n + i));
  return tv + 0.5 * mu * (k * u - g).squaredNorm();
}

// Primal-dual (Chambolle-Pock) iteration for the isotropic TV-L2 problem,
// with both D and K handled through the dual so every prox is explicit.
inline Vec tv_l2_reference(const Vec& g, const Mat& d, const Mat& k, double mu, int iterations) {
  const Index n = g.size();
  Mat a(d.rows() + k.rows(), n);
  a << d, k;
  const double norm_a = Eigen::JacobiSVD<Mat>(a).singularValues()(0);
  const double tau = 0.99 / norm_a, sigma = 0.99 / norm_a;
  Vec u = g, u_bar = g, y = Vec::Zero(a.rows());
  for (int it = 0; it < iterations; ++it) {
    y += sigma * (a * u_bar);
    for (Index i = 0; i < n; ++i) {
      const double m = std::hypot(y(i), y(n + i));
      if (m > 1.0) {
        y(i) /= m;
        y(n + i) /= m;
      }
    }
    auto yk = y.tail(n);
    yk = (yk - sigma * g) / (1.0 + sigma / mu);
    const Vec u_next = u - tau * (a.transpose() * y);
    u_bar = 2.0 * u_next - u;
    u = u_next;
  }
  return u;
}

// Mean of unmasked pixels in the smallest centered odd window holding at
// least one clean pixel and at least `fraction` of the window (grid assumed
// larger than any window used).
inline ImageD windowed_clean_mean(const ImageD& g, const tvsv::Mask& mask, double fraction = 0.1) {
  ImageD out = g;
  for (Index r = 0; r < g.rows(); ++r)
    for (Index c = 0; c < g.cols(); ++c) {
      if (!mask(r, c)) continue;
      for (Index half = 1;; ++half) {
        double sum = 0.0;
        int clean = 0;
        for (Index y = r - half; y <= r + half; ++y)
          for (Index x = c - half; x <= c + half; ++x)
            if (!mask(wrap(y, g.rows()), wrap(x, g.cols()))) {
              sum += g(wrap(y, g.rows()), wrap(x, g.cols()));
              ++clean;
            }
        const double area = double((2 * half + 1) * (2 * half + 1));
        if (clean >= 1 && clean >= fraction * area) {
          out(r, c) = sum / clean;
          break;
        }
      }
    }
  return out;
}

// |x| for x drawn from the density proportional to exp(-|x|^p).
inline double ggd_magnitude(std::mt19937_64& rng, double p) {
  std::gamma_distribution<double> gamma(1.0 / p, 1.0);
  return std::pow(gamma(rng), 1.0 / p);
}

inline ImageD random_image(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ImageD u(rows, cols);
  for (Index i = 0; i < u.size(); ++i) u.data()[i] = unif(rng);
  return u;
}

}  // namespace oracle
