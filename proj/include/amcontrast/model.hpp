#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "amcontrast/ambiguity.hpp"
#include "amcontrast/cloud.hpp"
#include "amcontrast/contrast.hpp"
#include "amcontrast/knn.hpp"
#include "amcontrast/margin.hpp"
#include "amcontrast/types.hpp"

namespace amc {

struct NetConfig {
  std::size_t stages = 2;
  std::vector<std::size_t> widths{32, 64};
  std::size_t downsample_ratio = 4;
  std::size_t aggregation_k = 8;
  std::size_t head_width = 32;
  /// Normalized positions span [-input_scale, input_scale] on the longest axis.
  double input_scale = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
  /// Output width of the decoder stage at layer s (s < stages).
  std::size_t decoder_width(std::size_t s) const;
};

struct TrainConfig {
  double lr = 0.01;
  std::size_t epochs = 100;
  double momentum = 0.9;
  double lambda = 0.1;
  ContrastConfig contrast;
  AmbiguityConfig ambiguity;
  MarginSpec margin;

  void validate() const;
};

/// Network weights. Tensor order: encoder stages 1..S as (W, b) pairs, then
/// decoder stages from layer S-1 down to layer 0, then the classifier head.
/// Biases are 1 x width matrices.
struct Params {
  NetConfig net;
  std::size_t in_dim = 0;
  std::size_t num_classes = 0;
  std::vector<Mat> tensors;

  std::size_t count() const;
  double& flat(std::size_t i);
  double flat(std::size_t i) const;

  std::size_t encoder_weight(std::size_t stage) const { return 2 * (stage - 1); }
  std::size_t decoder_weight(std::size_t layer) const {
    return 2 * net.stages + 2 * (net.stages - 1 - layer);
  }
  std::size_t head_weight() const { return 4 * net.stages; }
};

/// Glorot-uniform weights from net.seed, zero biases.
Params init_params(const NetConfig& net, std::size_t in_dim, std::size_t num_classes);
Params zero_params(const NetConfig& net, std::size_t in_dim, std::size_t num_classes);

void save_params(const Params& params, const std::filesystem::path& path);
Params load_params(const std::filesystem::path& path);

/// Layer 0 is the input; layer s is the farthest-point subsample of layer s-1
/// at 1/downsample_ratio of its size.
LayerStack build_layer_stack(const PointCloud& cloud, const NetConfig& net);

/// Position-only precomputation shared by every forward pass on one cloud.
struct Geometry {
  LayerStack stack;
  Mat input;  // normalized positions in [-1, 1], then features
  /// pool[s-1]: for each point of layer s, the aggregation neighbors of its
  /// parent inside layer s-1 (flattened, pool_k[s-1] per point).
  std::vector<std::vector<std::size_t>> pool;
  std::vector<std::size_t> pool_k;
  /// upsample[s]: nearest layer s+1 point for every point of layer s.
  std::vector<std::vector<std::size_t>> upsample;
};

Geometry build_geometry(const PointCloud& cloud, const NetConfig& net);

struct ForwardPass {
  std::vector<Mat> enc_pre;   // stage s at [s-1], pre-rectifier on layer s-1
  std::vector<Mat> enc_out;   // [s] = encoder feature at layer s; [0] is the input
  std::vector<std::vector<std::size_t>> pool_arg;  // [s-1]: winner row per (point, channel)
  std::vector<Mat> dec_in;    // [s] = concatenated decoder input at layer s
  std::vector<Mat> dec_pre;
  std::vector<Mat> dec_out;   // [s] = decoder feature at layer s, post-rectifier
  Mat logits;

  const Mat& decoder_features(std::size_t s) const { return dec_out.at(s); }
};

ForwardPass forward(const Geometry& geo, const Params& params);

/// Gradients w.r.t. every tensor given d loss / d logits and d loss / d
/// decoder features (entries may be empty for "no gradient").
Params backward(const Geometry& geo, const Params& params, const ForwardPass& fwd,
                const Mat& dlogits, const std::vector<Mat>& ddecoder);

/// Mean over points of -log softmax at the true class.
double cross_entropy(const Mat& logits, std::span<const int> labels);
LossAndGrad cross_entropy_grad(const Mat& logits, std::span<const int> labels);

/// lambda * ce + (1 - lambda) * sum(am).
double joint_loss(double ce, std::span<const double> am_per_layer, double lambda);

/// Argmax per row, ties to the smallest class.
std::vector<int> argmax_rows(const Mat& logits);

/// Ambiguities, partitions and margins of one decoder layer. Depends only on
/// positions and labels, so it is computed once per training run.
struct ContrastLayer {
  std::vector<NeighborPartition> partitions;
  AmbiguityMap ambiguity;
  std::vector<double> margins;
};

struct Objective {
  double ce = 0.0;
  std::vector<double> am;
  double am_sum = 0.0;
  double joint = 0.0;
  double oa = 0.0;
};

/// Joint objective over one cloud with all position-derived state cached.
class TrainingProblem {
 public:
  TrainingProblem(const PointCloud& cloud, const NetConfig& net, const TrainConfig& train);

  Objective evaluate(const Params& params, Params* grad = nullptr) const;

  const Geometry& geometry() const { return geo_; }
  const std::vector<ContrastLayer>& contrast_layers() const { return layers_; }
  const PointCloud& cloud() const { return geo_.stack.cloud(0); }

 private:
  Geometry geo_;
  NetConfig net_;
  TrainConfig train_;
  std::vector<ContrastLayer> layers_;
};

struct EpochLog {
  std::size_t epoch = 0;
  double l_ce = 0.0;
  double l_am_sum = 0.0;
  double l_joint = 0.0;
  double oa = 0.0;
};

struct TrainResult {
  Params params;
  std::vector<EpochLog> log;
};

/// Full-batch gradient descent with momentum. Throws NumericError on a
/// non-finite loss.
TrainResult train(const PointCloud& cloud, const NetConfig& net, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

struct Metrics {
  std::vector<std::vector<std::size_t>> confusion;  // [truth][prediction]
  double oa = 0.0;
  double macc = 0.0;
  double miou = 0.0;
  double boundary_band_acc = 0.0;  // NaN when no point has a > 0
  std::size_t band_points = 0;
};

Metrics metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion);
Metrics compute_metrics(std::span<const int> truth, std::span<const int> pred,
                        int num_classes, std::span<const double> ambiguity);

std::vector<int> predict(const Params& params, const PointCloud& cloud);
Metrics evaluate(const Params& params, const PointCloud& cloud, std::span<const double> ambiguity);

}  // namespace amc
