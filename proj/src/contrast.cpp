#include "amcontrast/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace amc {

void ContrastConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(norm_epsilon > 0.0)) throw std::invalid_argument("norm_epsilon must be positive");
}

double cosine_sim(std::span<const double> u, std::span<const double> v, double eps) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine_sim: length mismatch");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double s = dot / (std::max(std::sqrt(uu), eps) * std::max(std::sqrt(vv), eps));
  return std::clamp(s, -1.0, 1.0);
}

PairEmbeddings pair_embeddings(std::span<const double> sims_intra,
                               std::span<const double> sims_inter, double m, double tau) {
  PairEmbeddings out;
  out.intra.reserve(sims_intra.size());
  out.inter.reserve(sims_inter.size());
  bool large = false;
  for (double s : sims_intra) {
    const double z = (s - m) / tau;
    large = large || std::abs(z) > 700.0;
    out.intra.push_back(std::exp(z));
  }
  for (double s : sims_inter) {
    const double z = s / tau;
    large = large || std::abs(z) > 700.0;
    out.inter.push_back(std::exp(z));
  }
  if (large) std::cerr << "warning: contrastive exponent exceeds 700, exp may overflow\n";
  return out;
}

double margin_contrastive_loss(std::span<const double> sims_intra,
                               std::span<const double> sims_inter, double m, double tau) {
  const auto emb = pair_embeddings(sims_intra, sims_inter, m, tau);
  const double a = std::accumulate(emb.intra.begin(), emb.intra.end(), 0.0);
  const double b = std::accumulate(emb.inter.begin(), emb.inter.end(), 0.0);
  return -std::log(a / (a + b));
}

double supervised_contrastive_loss(std::span<const double> sims_intra,
                                   std::span<const double> sims_inter, double tau) {
  // log(sum_all) - log(sum_intra) via shifted log-sum-exp
  double hi = -std::numeric_limits<double>::infinity();
  for (double s : sims_intra) hi = std::max(hi, s / tau);
  for (double s : sims_inter) hi = std::max(hi, s / tau);
  long double pos = 0.0L, all = 0.0L;
  for (double s : sims_intra) pos += std::exp(static_cast<long double>(s / tau - hi));
  all = pos;
  for (double s : sims_inter) all += std::exp(static_cast<long double>(s / tau - hi));
  return static_cast<double>(std::log(all) - std::log(pos));
}

double margin_derivative(std::span<const double> sims_intra, std::span<const double> sims_inter,
                         double m, double tau) {
  const auto emb = pair_embeddings(sims_intra, sims_inter, m, tau);
  const double a = std::accumulate(emb.intra.begin(), emb.intra.end(), 0.0);
  const double b = std::accumulate(emb.inter.begin(), emb.inter.end(), 0.0);
  return b / (tau * (a + b));
}

double point_loss(const PointLossInput& input, const ContrastConfig& cfg) {
  cfg.validate();
  if (input.intra_features.empty()) throw std::invalid_argument("intra set must hold the anchor");
  auto span_of = [](const RowVec& v) { return std::span<const double>(v.data(), v.size()); };
  std::vector<double> si, sk;
  for (const auto& f : input.intra_features)
    si.push_back(cosine_sim(span_of(input.anchor_feature), span_of(f), cfg.norm_epsilon));
  for (const auto& f : input.inter_features)
    sk.push_back(cosine_sim(span_of(input.anchor_feature), span_of(f), cfg.norm_epsilon));
  return margin_contrastive_loss(si, sk, input.margin, cfg.tau);
}

namespace {

// Shared by layer_loss and layer_loss_grad so both return the same value.
double accumulate_layer(const Mat& f, std::span<const NeighborPartition> parts,
                        std::span<const double> margins, const ContrastConfig& cfg, Mat* grad) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(f.rows());
  if (parts.size() != n || margins.size() != n)
    throw std::invalid_argument("layer_loss: features, partitions and margins must align");

  const double eps = cfg.norm_epsilon;
  const double tau = cfg.tau;
  std::vector<double> norm(n), den(n);
  for (std::size_t r = 0; r < n; ++r) {
    norm[r] = f.row(r).norm();
    den[r] = std::max(norm[r], eps);
  }
  auto raw_sim = [&](std::size_t i, std::size_t j) {
    return f.row(i).dot(f.row(j)) / (den[i] * den[j]);
  };
  // d sim(i, j) scattered into grad rows i and j, scaled by c
  auto add_sim_grad = [&](std::size_t i, std::size_t j, double s, double c) {
    const double inv = c / (den[i] * den[j]);
    grad->row(i) += inv * f.row(j);
    grad->row(j) += inv * f.row(i);
    if (norm[i] > eps) grad->row(i) -= (c * s / (norm[i] * norm[i])) * f.row(i);
    if (norm[j] > eps) grad->row(j) -= (c * s / (norm[j] * norm[j])) * f.row(j);
  };

  std::size_t count = 0;
  for (const auto& p : parts) count += p.inter.empty() ? 0 : 1;
  if (grad) grad->setZero(f.rows(), f.cols());
  if (count == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(count);

  std::vector<double> s_intra, e_intra, s_inter, e_inter;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = parts[i];
    if (p.inter.empty()) continue;
    const double m = margins[i];
    s_intra.clear();
    e_intra.clear();
    s_inter.clear();
    e_inter.clear();
    double a = 0.0, b = 0.0;
    for (std::size_t j : p.intra) {
      const double s = j == i ? 1.0 : raw_sim(i, j);
      s_intra.push_back(s);
      e_intra.push_back(std::exp((std::clamp(s, -1.0, 1.0) - m) / tau));
      a += e_intra.back();
    }
    for (std::size_t k : p.inter) {
      const double s = raw_sim(i, k);
      s_inter.push_back(s);
      e_inter.push_back(std::exp(std::clamp(s, -1.0, 1.0) / tau));
      b += e_inter.back();
    }
    total += -std::log(a / (a + b));

    if (!grad) continue;
    const double ab = a + b;
    for (std::size_t t = 0; t < p.intra.size(); ++t) {
      const std::size_t j = p.intra[t];
      if (j == i || std::abs(s_intra[t]) > 1.0) continue;
      const double c = -scale * (e_intra[t] / tau) * b / (a * ab);
      add_sim_grad(i, j, s_intra[t], c);
    }
    for (std::size_t t = 0; t < p.inter.size(); ++t) {
      if (std::abs(s_inter[t]) > 1.0) continue;
      const double c = scale * (e_inter[t] / tau) / ab;
      add_sim_grad(i, p.inter[t], s_inter[t], c);
    }
  }
  return total * scale;
}

}  // namespace

double layer_loss(const Mat& features, std::span<const NeighborPartition> parts,
                  std::span<const double> margins, const ContrastConfig& cfg) {
  return accumulate_layer(features, parts, margins, cfg, nullptr);
}

LossAndGrad layer_loss_grad(const Mat& features, std::span<const NeighborPartition> parts,
                            std::span<const double> margins, const ContrastConfig& cfg) {
  LossAndGrad out;
  out.loss = accumulate_layer(features, parts, margins, cfg, &out.grad);
  return out;
}

}  // namespace amc
