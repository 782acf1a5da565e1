#include "amcontrast/ply.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace amc {

std::uint8_t ambiguity_gray(double a) {
  const double v = std::clamp(1.0 - a, 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::lround(v));
}

void write_ambiguity_ply(const PointCloud& cloud, std::span<const double> ambiguity,
                         std::ostream& out) {
  if (ambiguity.size() != cloud.size()) throw std::invalid_argument("ambiguity size mismatch");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "comment per-point ambiguity, white = 0, black = 1\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    char rec[15];
    for (int c = 0; c < 3; ++c) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(cloud.positions(i, c)));
      for (int b = 0; b < 4; ++b) rec[4 * c + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
    const char g = static_cast<char>(ambiguity_gray(ambiguity[i]));
    rec[12] = rec[13] = rec[14] = g;
    out.write(rec, sizeof(rec));
  }
}

void save_ambiguity_ply(const PointCloud& cloud, std::span<const double> ambiguity,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_ambiguity_ply(cloud, ambiguity, out);
}

}  // namespace amc
