#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "amcontrast/cloud.hpp"
#include "amcontrast/knn.hpp"

namespace amc {

struct AmbiguityConfig {
  double beta = 0.04;
  std::size_t k = 24;
  double epsilon = 1e-12;  // floor on squared-distance sums

  void validate() const;
};

/// Per-point ambiguity in [0, 1] at one layer of the stack.
struct AmbiguityMap {
  std::vector<double> values;
  std::size_t layer = 0;
};

/// count / max(dist_sum, epsilon); used for both the intra and inter sets.
double closeness(std::size_t count, double dist_sum, double epsilon = 1e-12);

/// 1 / (1 + exp(beta * (cc_plus - cc_minus))), saturating when |beta * delta| > 500.
double inverse_sigmoid(double cc_plus, double cc_minus, double beta);

/// Piecewise ambiguity: 0 when every neighbor shares the anchor's label, 1 when
/// the anchor is its only intra point, the inverse sigmoid of the two
/// closeness centralities otherwise. The neighborhood size is taken from the
/// partition, so a K clamped at coarse layers is the "full" count.
double ambiguity_point(const NeighborPartition& part, const AmbiguityConfig& cfg);

AmbiguityMap ambiguity_map(std::span<const NeighborPartition> parts, const AmbiguityConfig& cfg,
                           std::size_t layer = 0);
AmbiguityMap ambiguity_map(const PointCloud& cloud, const NeighborIndex& index,
                           const AmbiguityConfig& cfg, std::size_t layer = 0);

}  // namespace amc
