#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>

#include "amcontrast/cloud.hpp"

namespace amc {

/// Gray level for an ambiguity value: white (255) at 0, black (0) at 1.
std::uint8_t ambiguity_gray(double a);

/// Binary little-endian PLY, one vertex per point: float x, y, z and uchar
/// red, green, blue set to ambiguity_gray(a).
void write_ambiguity_ply(const PointCloud& cloud, std::span<const double> ambiguity,
                         std::ostream& out);
void save_ambiguity_ply(const PointCloud& cloud, std::span<const double> ambiguity,
                        const std::filesystem::path& path);

}  // namespace amc
