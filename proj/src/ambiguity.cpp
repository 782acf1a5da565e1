#include "amcontrast/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amc {

void AmbiguityConfig::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (k < 2) throw std::invalid_argument("K must be at least 2");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

double closeness(std::size_t count, double dist_sum, double epsilon) {
  return static_cast<double>(count) / std::max(dist_sum, epsilon);
}

double inverse_sigmoid(double cc_plus, double cc_minus, double beta) {
  const double z = beta * (cc_plus - cc_minus);
  if (z > 500.0) return 0.0;
  if (z < -500.0) return 1.0;
  return 1.0 / (1.0 + std::exp(z));
}

double ambiguity_point(const NeighborPartition& part, const AmbiguityConfig& cfg) {
  const std::size_t intra = part.intra.size();
  if (intra == part.k()) return 0.0;
  if (intra == 1) return 1.0;
  const double cc_plus = closeness(intra, part.d_plus, cfg.epsilon);
  const double cc_minus = closeness(part.inter.size(), part.d_minus, cfg.epsilon);
  return inverse_sigmoid(cc_plus, cc_minus, cfg.beta);
}

AmbiguityMap ambiguity_map(std::span<const NeighborPartition> parts, const AmbiguityConfig& cfg,
                           std::size_t layer) {
  AmbiguityMap map;
  map.layer = layer;
  map.values.reserve(parts.size());
  for (const auto& p : parts) map.values.push_back(ambiguity_point(p, cfg));
  return map;
}

AmbiguityMap ambiguity_map(const PointCloud& cloud, const NeighborIndex& index,
                           const AmbiguityConfig& cfg, std::size_t layer) {
  cfg.validate();
  if (index.size() != cloud.size()) throw std::invalid_argument("index does not match cloud");
  if (cfg.k > cloud.size())
    throw std::invalid_argument("K=" + std::to_string(cfg.k) + " exceeds point count " +
                                std::to_string(cloud.size()));
  const auto parts = partition_all(index, cloud.labels, cfg.k);
  return ambiguity_map(parts, cfg, layer);
}

}  // namespace amc
