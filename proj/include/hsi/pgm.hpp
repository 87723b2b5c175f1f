#pragma once

#include "hsi/types.hpp"

#include <string>

namespace hsi {

/// Writes a 16-bit binary PGM (P5, maxval 65535, big-endian samples).
/// `values` holds one scalar per pixel in raster order (pixel k at grid
/// position (k % width, k / width)); values are clamped to [0, 1] and scaled
/// so 0 maps to black and 1 to white.
void write_pgm(const std::string& path, const Vector& values, int width, int height);

}  // namespace hsi
