#pragma once

#include <span>
#include <vector>

#include "amcontrast/knn.hpp"
#include "amcontrast/types.hpp"

namespace amc {

struct ContrastConfig {
  double tau = 0.3;
  double norm_epsilon = 1e-8;

  void validate() const;
};

/// u.v / (max(|u|, eps) max(|v|, eps)), clamped to [-1, 1].
double cosine_sim(std::span<const double> u, std::span<const double> v, double eps = 1e-8);

struct PairEmbeddings {
  std::vector<double> intra;  // exp((s - m) / tau)
  std::vector<double> inter;  // exp(s / tau)
};

PairEmbeddings pair_embeddings(std::span<const double> sims_intra,
                               std::span<const double> sims_inter, double m, double tau);

/// -log(sum intra / (sum intra + sum inter)) built from pair_embeddings.
double margin_contrastive_loss(std::span<const double> sims_intra,
                               std::span<const double> sims_inter, double m, double tau);

/// Plain supervised contrastive term (no margin), evaluated independently of
/// pair_embeddings. Equal to margin_contrastive_loss at m = 0.
double supervised_contrastive_loss(std::span<const double> sims_intra,
                                   std::span<const double> sims_inter, double tau);

/// d loss / d m for one anchor; always >= 0.
double margin_derivative(std::span<const double> sims_intra, std::span<const double> sims_inter,
                         double m, double tau);

struct PointLossInput {
  RowVec anchor_feature;
  std::vector<RowVec> intra_features;  // includes the anchor itself
  std::vector<RowVec> inter_features;
  double margin = 0.0;
};

double point_loss(const PointLossInput& input, const ContrastConfig& cfg);

/// Mean point loss over the points whose neighborhood holds at least one
/// inter point. `features` is row-aligned with `parts` and `margins`.
double layer_loss(const Mat& features, std::span<const NeighborPartition> parts,
                  std::span<const double> margins, const ContrastConfig& cfg);

struct LossAndGrad {
  double loss = 0.0;
  Mat grad;  // same shape as features
};

LossAndGrad layer_loss_grad(const Mat& features, std::span<const NeighborPartition> parts,
                            std::span<const double> margins, const ContrastConfig& cfg);

}  // namespace amc
