#pragma once

#include "tvsv/image.hpp"

#include <string>

namespace tvsv {

/// Piecewise-constant test image: background plus overlapping rectangles,
/// disks, and a triangle at several intensity levels. Shapes scale with the
/// grid so the phantom looks the same at any size.
ImageD geometric_phantom(Index rows, Index cols);

/// Smooth-plus-texture test image: a slow ramp with sinusoidal gratings of
/// different orientations and frequencies in its quadrants.
ImageD texture_phantom(Index rows, Index cols);

/// Looks up a phantom by name ("geometric" or "texture").
ImageD make_phantom(const std::string& name, Index rows, Index cols);

}  // namespace tvsv
