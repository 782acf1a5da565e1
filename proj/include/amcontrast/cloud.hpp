#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amcontrast/types.hpp"

namespace amc {

/// Labeled point cloud. positions is n x 3, features n x D (D may be 0).
struct PointCloud {
  Mat positions;
  Mat features;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t feature_dims() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws DataError if any invariant is broken.
  void validate() const;

  /// Point cloud holding the rows listed in `rows`, in that order.
  PointCloud select(const std::vector<std::size_t>& rows) const;
};

bool operator==(const PointCloud& a, const PointCloud& b);

// ASCII interchange format:
//   points <n> feature_dims <D> classes <C>
//   x y z f_1 ... f_D label        (n rows, '#' lines are comments)
PointCloud read_ascii(std::istream& in);
void write_ascii(const PointCloud& cloud, std::ostream& out);
PointCloud load_ascii(const std::filesystem::path& path);
void save_ascii(const PointCloud& cloud, const std::filesystem::path& path);

enum class SceneKind { TwoPlane, Checkerboard, Clusters };

SceneKind parse_scene_kind(std::string_view name);
std::string_view to_string(SceneKind kind);

struct ClusterSpec {
  std::array<double, 3> center{};
  int label = 0;
  double spread = 0.25;  // per-axis standard deviation
};

/// Synthetic scene description.
///
/// two-plane and checkerboard place points on a planar lattice (z = 0) with
/// `rows` points along y and ceil(n / rows) columns along x; point i sits at
/// column i / rows, row i % rows. Labels come from the lattice position
/// before jitter, so noise moves points across the class boundary without
/// relabeling them.
struct SceneSpec {
  SceneKind kind = SceneKind::TwoPlane;
  std::size_t n = 2048;
  double noise = 0.0;
  std::uint64_t seed = 0;

  double spacing = 0.05;
  std::size_t rows = 0;             // 0: round(sqrt(n))
  std::optional<double> boundary;   // two-plane, scene units; default mid-lattice
  std::size_t cell = 0;             // checkerboard cell edge in lattice steps; 0: columns / 4
  std::vector<ClusterSpec> clusters;  // empty: three default blobs

  void validate() const;
  int num_classes() const;
};

PointCloud generate_scene(const SceneSpec& spec);

struct Downsampled {
  PointCloud cloud;
  std::vector<std::size_t> parent_index;
};

/// Greedy farthest-point sampling from `start`; ties go to the smaller index.
/// The selected points are returned in ascending source order.
Downsampled fps_downsample(const PointCloud& cloud, std::size_t target, std::size_t start = 0);

/// Selection order of farthest-point sampling (before sorting).
std::vector<std::size_t> fps_order(const Mat& positions, std::size_t target, std::size_t start = 0);

struct Layer {
  PointCloud cloud;
  std::vector<std::size_t> parent_index;  // empty for layer 0
};

/// Layer 0 is the input cloud; each later layer is a subset of the previous.
struct LayerStack {
  std::vector<Layer> layers;

  std::size_t size() const { return layers.size(); }
  const PointCloud& cloud(std::size_t s) const { return layers.at(s).cloud; }
  void validate() const;
};

}  // namespace amc
