#pragma once

#include "tvsv/image.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace tvsv {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PgmEncoding { kAscii, kBinary };

/// Reads a P2/P5 graymap with maxval up to 65535, scaled to [0, 1].
ImageD read_pgm(const std::filesystem::path& path);

/// Writes u clipped to [0, 1] and quantized to maxval levels (255 or 65535 typical).
void write_pgm(const std::filesystem::path& path, const ImageD& u, int maxval = 65535,
               PgmEncoding encoding = PgmEncoding::kBinary);

/// Reads a P1/P4 bitmap (1 = set) or a P2/P5 graymap (nonzero = set).
Mask read_mask(const std::filesystem::path& path);

/// Writes a P4 bitmap.
void write_mask(const std::filesystem::path& path, const Mask& m);

/// Comma-separated grid, one image row per line, shortest round-trip decimal form.
ImageD read_csv_grid(const std::filesystem::path& path);
void write_csv_grid(const std::filesystem::path& path, const ImageD& u);

/// Dispatches on extension: .pgm/.pnm, .csv.
ImageD read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageD& u);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tvsv
