#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "amcontrast/types.hpp"

namespace amc {

struct Neighbor {
  std::size_t index = 0;
  double sq_dist = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Strict (squared distance, index) order used for every kNN tie.
inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  return a.sq_dist < b.sq_dist || (a.sq_dist == b.sq_dist && a.index < b.index);
}

/// Exact kNN over 3D positions, backed by a kd-tree.
///
/// Results match a brute-force scan bit for bit: distances are computed with
/// the same expression and candidates are ranked by (squared distance, index).
class NeighborIndex {
 public:
  static constexpr std::size_t kNoExclude = std::numeric_limits<std::size_t>::max();

  explicit NeighborIndex(const Mat& positions);

  std::size_t size() const { return static_cast<std::size_t>(positions_.rows()); }
  const Mat& positions() const { return positions_; }

  /// K nearest points to an arbitrary location, skipping `exclude`.
  std::vector<Neighbor> nearest(const double* query, std::size_t k,
                                std::size_t exclude = kNoExclude) const;

  /// K neighbors of a stored point. The anchor is always entry 0 (distance
  /// 0); the remaining K-1 follow in (distance, index) order.
  std::vector<Neighbor> knn(std::size_t anchor, std::size_t k) const;

 private:
  struct Node {
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t left = 0, right = 0;
    std::size_t begin = 0, end = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const double* q, std::size_t k, std::size_t exclude,
              std::vector<Neighbor>& heap) const;

  Mat positions_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

NeighborIndex build_index(const Mat& positions);
std::vector<Neighbor> knn(const NeighborIndex& index, std::size_t anchor, std::size_t k);

/// Squared Euclidean distance between a query and row `i` of `positions`.
inline double squared_distance(const double* q, const Mat& positions, std::size_t i) {
  const double dx = q[0] - positions(i, 0);
  const double dy = q[1] - positions(i, 1);
  const double dz = q[2] - positions(i, 2);
  return dx * dx + dy * dy + dz * dz;
}

/// Anchor neighborhood split by label. intra holds the anchor itself.
struct NeighborPartition {
  std::size_t anchor = 0;
  std::vector<std::size_t> intra;
  std::vector<std::size_t> inter;
  double d_plus = 0.0;
  double d_minus = 0.0;

  std::size_t k() const { return intra.size() + inter.size(); }
};

NeighborPartition partition(std::span<const Neighbor> neighbors, std::span<const int> labels,
                            std::size_t anchor);

/// Partitions of every point with K clamped to the cloud size.
std::vector<NeighborPartition> partition_all(const NeighborIndex& index,
                                             std::span<const int> labels, std::size_t k);

}  // namespace amc
