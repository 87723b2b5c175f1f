#include "hsi/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace hsi {

void write_pgm(const std::string& path, const Vector& values, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ConfigError("write_pgm: image size must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  }
  const auto pixels = static_cast<Eigen::Index>(width) * height;
  if (values.size() != pixels) {
    throw DataError("write_pgm: expected " + std::to_string(pixels) +
                    " values for a " + std::to_string(width) + "x" +
                    std::to_string(height) + " image, got " +
                    std::to_string(values.size()));
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("write_pgm: cannot open " + path + " for writing");
  }
  out << "P5\n" << width << " " << height << "\n65535\n";

  std::vector<unsigned char> bytes(static_cast<std::size_t>(pixels) * 2);
  for (Eigen::Index k = 0; k < pixels; ++k) {
    double v = values[k];
    v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    const auto sample = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    bytes[static_cast<std::size_t>(k) * 2] = static_cast<unsigned char>(sample >> 8);
    bytes[static_cast<std::size_t>(k) * 2 + 1] = static_cast<unsigned char>(sample & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw DataError("write_pgm: short write to " + path);
  }
}

}  // namespace hsi
