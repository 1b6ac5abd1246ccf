#include "tvsv/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tvsv {

ImageD geometric_phantom(Index rows, Index cols) {
  ImageD img(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      // Normalized pixel-center coordinates in [0, 1).
      const double y = (double(r) + 0.5) / double(rows);
      const double x = (double(c) + 0.5) / double(cols);
      auto in_disk = [&](double cx, double cy, double rad) {
        return (x - cx) * (x - cx) + (y - cy) * (y - cy) < rad * rad;
      };
      auto in_rect = [&](double x0, double x1, double y0, double y1) {
        return x > x0 && x < x1 && y > y0 && y < y1;
      };

      double v = 0.15;
      if (in_rect(0.05, 0.42, 0.06, 0.38)) v = 0.75;
      if (in_rect(0.22, 0.55, 0.26, 0.5)) v = 0.45;
      if (in_disk(0.74, 0.24, 0.18)) v = 0.9;
      if (in_disk(0.74, 0.24, 0.08)) v = 0.35;
      // Diamond.
      if (std::abs(x - 0.78) + std::abs(y - 0.68) < 0.14) v = 0.6;
      // Right triangle with legs along x = 0.08 and y = 0.92.
      if (x > 0.08 && y < 0.92 && (x - 0.08) / 0.34 + (0.92 - y) / 0.34 < 1.0) v = 0.65;
      // Thin bars.
      if (in_rect(0.48, 0.94, 0.86, 0.9)) v = 0.0;
      if (in_rect(0.52, 0.56, 0.45, 0.8)) v = 1.0;
      // Small dots.
      if (in_disk(0.5, 0.64, 0.035)) v = 0.95;
      if (in_disk(0.62, 0.58, 0.03)) v = 0.05;
      if (in_disk(0.3, 0.18, 0.04)) v = 0.3;
      if (in_disk(0.9, 0.5, 0.03)) v = 0.55;
      img(r, c) = v;
    }
  }
  return img;
}

ImageD texture_phantom(Index rows, Index cols) {
  ImageD img(rows, cols);
  const double two_pi = 2.0 * std::numbers::pi;
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      const double y = (double(r) + 0.5) / double(rows);
      const double x = (double(c) + 0.5) / double(cols);
      double value = 0.3 + 0.3 * x;
      if (x < 0.5 && y < 0.5) value += 0.2 * std::sin(two_pi * 12.0 * x);
      if (x >= 0.5 && y < 0.5) value += 0.2 * std::sin(two_pi * 9.0 * (x + y));
      if (x < 0.5 && y >= 0.5) value += 0.15 * std::sin(two_pi * 6.0 * y) * std::sin(two_pi * 6.0 * x);
      if (x >= 0.5 && y >= 0.5) value += 0.1 * std::cos(two_pi * 3.0 * (x - 2.0 * y));
      img(r, c) = std::clamp(value, 0.0, 1.0);
    }
  }
  return img;
}

ImageD make_phantom(const std::string& name, Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("phantom: empty grid");
  if (name == "geometric") return geometric_phantom(rows, cols);
  if (name == "texture") return texture_phantom(rows, cols);
  throw std::invalid_argument("unknown phantom '" + name + "' (expected geometric or texture)");
}

}  // namespace tvsv
