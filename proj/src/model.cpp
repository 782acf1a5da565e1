#include "amcontrast/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace amc {

void NetConfig::validate() const {
  if (stages < 1) throw std::invalid_argument("net needs at least one stage");
  if (widths.size() != stages) throw std::invalid_argument("widths must list one size per stage");
  for (auto w : widths)
    if (w == 0) throw std::invalid_argument("stage widths must be positive");
  if (downsample_ratio < 2) throw std::invalid_argument("downsample ratio must be >= 2");
  if (aggregation_k < 1) throw std::invalid_argument("aggregation_k must be >= 1");
  if (head_width == 0) throw std::invalid_argument("head width must be positive");
  if (!(input_scale > 0.0) || !std::isfinite(input_scale))
    throw std::invalid_argument("input scale must be positive and finite");
}

std::size_t NetConfig::decoder_width(std::size_t s) const {
  return s == 0 ? head_width : widths[s - 1];
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw std::invalid_argument("momentum must lie in [0, 1)");
  contrast.validate();
  ambiguity.validate();
  if (!std::isfinite(margin.mu) || !std::isfinite(margin.nu))
    throw std::invalid_argument("margin parameters must be finite");
}

std::size_t Params::count() const {
  std::size_t c = 0;
  for (const auto& t : tensors) c += static_cast<std::size_t>(t.size());
  return c;
}

double& Params::flat(std::size_t i) {
  for (auto& t : tensors) {
    const auto sz = static_cast<std::size_t>(t.size());
    if (i < sz) return t.data()[i];
    i -= sz;
  }
  throw std::out_of_range("parameter index out of range");
}

double Params::flat(std::size_t i) const { return const_cast<Params*>(this)->flat(i); }

namespace {

std::vector<std::pair<std::size_t, std::size_t>> tensor_shapes(const NetConfig& net,
                                                               std::size_t in_dim,
                                                               std::size_t classes) {
  std::vector<std::pair<std::size_t, std::size_t>> shapes;
  for (std::size_t s = 1; s <= net.stages; ++s) {
    const std::size_t c_in = s == 1 ? in_dim : net.widths[s - 2];
    shapes.emplace_back(c_in, net.widths[s - 1]);
    shapes.emplace_back(1, net.widths[s - 1]);
  }
  for (std::size_t s = net.stages; s-- > 0;) {
    const std::size_t c_up = s + 1 == net.stages ? net.widths.back() : net.decoder_width(s + 1);
    const std::size_t c_skip = s == 0 ? in_dim : net.widths[s - 1];
    shapes.emplace_back(c_up + c_skip, net.decoder_width(s));
    shapes.emplace_back(1, net.decoder_width(s));
  }
  shapes.emplace_back(net.head_width, classes);
  shapes.emplace_back(1, classes);
  return shapes;
}

Mat affine(const Mat& x, const Mat& w, const Mat& b) {
  Mat z = x * w;
  z.rowwise() += b.row(0);
  return z;
}

}  // namespace

Params zero_params(const NetConfig& net, std::size_t in_dim, std::size_t num_classes) {
  net.validate();
  Params p;
  p.net = net;
  p.in_dim = in_dim;
  p.num_classes = num_classes;
  for (auto [r, c] : tensor_shapes(net, in_dim, num_classes))
    p.tensors.push_back(Mat::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
  return p;
}

Params init_params(const NetConfig& net, std::size_t in_dim, std::size_t num_classes) {
  Params p = zero_params(net, in_dim, num_classes);
  std::mt19937_64 rng(net.seed);
  for (std::size_t t = 0; t < p.tensors.size(); t += 2) {
    Mat& w = p.tensors[t];
    const double limit = std::sqrt(6.0 / double(w.rows() + w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  }
  return p;
}

// Model blob: "AMC3DNET", u32 version, net/shape header, then f64 data, all
// little-endian.
namespace {

constexpr char kMagic[8] = {'A', 'M', 'C', '3', 'D', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    v = std::bit_cast<T>(bytes);
  }
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("truncated model file");
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    v = std::bit_cast<T>(bytes);
  }
  return v;
}

}  // namespace

void save_params(const Params& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  const auto& net = params.net;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.stages));
  for (auto w : net.widths) put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.downsample_ratio));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.aggregation_k));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.head_width));
  put<double>(out, net.input_scale);
  put<std::uint64_t>(out, net.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.in_dim));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.num_classes));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.tensors.size()));
  for (const auto& t : params.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.cols()));
  }
  for (const auto& t : params.tensors)
    for (Eigen::Index i = 0; i < t.size(); ++i) put<double>(out, t.data()[i]);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Params load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("not a model file: " + path.string());
  if (get<std::uint32_t>(in) != kVersion) throw DataError("unsupported model version");
  NetConfig net;
  net.stages = get<std::uint32_t>(in);
  if (net.stages == 0 || net.stages > 64) throw DataError("corrupt model header");
  net.widths.resize(net.stages);
  for (auto& w : net.widths) w = get<std::uint32_t>(in);
  net.downsample_ratio = get<std::uint32_t>(in);
  net.aggregation_k = get<std::uint32_t>(in);
  net.head_width = get<std::uint32_t>(in);
  net.input_scale = get<double>(in);
  net.seed = get<std::uint64_t>(in);
  const std::size_t in_dim = get<std::uint32_t>(in);
  const std::size_t classes = get<std::uint32_t>(in);
  try {
    net.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("corrupt model header: ") + e.what());
  }
  Params p = zero_params(net, in_dim, classes);
  if (get<std::uint32_t>(in) != p.tensors.size()) throw DataError("model tensor count mismatch");
  for (auto& t : p.tensors) {
    const auto r = get<std::uint32_t>(in);
    const auto c = get<std::uint32_t>(in);
    if (r != t.rows() || c != t.cols()) throw DataError("model tensor shape mismatch");
  }
  for (auto& t : p.tensors)
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = get<double>(in);
  return p;
}

LayerStack build_layer_stack(const PointCloud& cloud, const NetConfig& net) {
  net.validate();
  cloud.validate();
  LayerStack stack;
  stack.layers.push_back({cloud, {}});
  for (std::size_t s = 1; s <= net.stages; ++s) {
    const PointCloud& prev = stack.layers.back().cloud;
    const std::size_t target = prev.size() / net.downsample_ratio;
    if (target < net.aggregation_k + 1)
      throw std::invalid_argument("layer " + std::to_string(s) + " would hold " +
                                  std::to_string(target) + " points, fewer than aggregation_k+1");
    auto down = fps_downsample(prev, target, 0);
    stack.layers.push_back({std::move(down.cloud), std::move(down.parent_index)});
  }
  return stack;
}

Geometry build_geometry(const PointCloud& cloud, const NetConfig& net) {
  Geometry geo;
  geo.stack = build_layer_stack(cloud, net);

  const auto n = static_cast<Eigen::Index>(cloud.size());
  const auto dims = static_cast<Eigen::Index>(cloud.feature_dims());
  geo.input.resize(n, 3 + dims);
  const RowVec lo = cloud.positions.colwise().minCoeff();
  const RowVec hi = cloud.positions.colwise().maxCoeff();
  const RowVec center = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo).maxCoeff();
  if (!(half > 0.0)) half = 1.0;
  geo.input.leftCols(3) = (cloud.positions.rowwise() - center) * (net.input_scale / half);
  if (dims > 0) geo.input.rightCols(dims) = cloud.features;

  std::vector<NeighborIndex> indices;
  for (std::size_t s = 0; s < geo.stack.size(); ++s)
    indices.emplace_back(geo.stack.cloud(s).positions);

  for (std::size_t s = 1; s <= net.stages; ++s) {
    const auto& prev = indices[s - 1];
    const std::size_t k = std::min(net.aggregation_k, prev.size());
    const auto& parents = geo.stack.layers[s].parent_index;
    std::vector<std::size_t> flat;
    flat.reserve(parents.size() * k);
    for (std::size_t p : parents)
      for (const auto& nb : prev.knn(p, k)) flat.push_back(nb.index);
    geo.pool.push_back(std::move(flat));
    geo.pool_k.push_back(k);
  }
  for (std::size_t s = 0; s < net.stages; ++s) {
    const Mat& pos = geo.stack.cloud(s).positions;
    std::vector<std::size_t> up(static_cast<std::size_t>(pos.rows()));
    for (Eigen::Index i = 0; i < pos.rows(); ++i) {
      const double q[3] = {pos(i, 0), pos(i, 1), pos(i, 2)};
      up[i] = indices[s + 1].nearest(q, 1).front().index;
    }
    geo.upsample.push_back(std::move(up));
  }
  return geo;
}

ForwardPass forward(const Geometry& geo, const Params& params) {
  const NetConfig& net = params.net;
  const std::size_t S = net.stages;
  if (geo.stack.size() != S + 1) throw std::invalid_argument("geometry/net stage mismatch");
  if (static_cast<std::size_t>(geo.input.cols()) != params.in_dim)
    throw std::invalid_argument("input width " + std::to_string(geo.input.cols()) +
                                " does not match model input width " +
                                std::to_string(params.in_dim));

  ForwardPass f;
  f.enc_out.push_back(geo.input);
  for (std::size_t s = 1; s <= S; ++s) {
    const std::size_t wi = params.encoder_weight(s);
    Mat z = affine(f.enc_out[s - 1], params.tensors[wi], params.tensors[wi + 1]);
    const Mat h = z.cwiseMax(0.0);
    const std::size_t k = geo.pool_k[s - 1];
    const auto& nbrs = geo.pool[s - 1];
    const std::size_t m = nbrs.size() / k;
    const auto w = h.cols();
    Mat pooled(static_cast<Eigen::Index>(m), w);
    std::vector<std::size_t> arg(m * static_cast<std::size_t>(w));
    for (std::size_t i = 0; i < m; ++i) {
      for (Eigen::Index c = 0; c < w; ++c) {
        std::size_t best = nbrs[i * k];
        double v = h(best, c);
        for (std::size_t t = 1; t < k; ++t) {
          const std::size_t j = nbrs[i * k + t];
          if (h(j, c) > v) {
            v = h(j, c);
            best = j;
          }
        }
        pooled(i, c) = v;
        arg[i * w + c] = best;
      }
    }
    f.enc_pre.push_back(std::move(z));
    f.pool_arg.push_back(std::move(arg));
    f.enc_out.push_back(std::move(pooled));
  }

  f.dec_in.resize(S);
  f.dec_pre.resize(S);
  f.dec_out.resize(S);
  const Mat* coarse = &f.enc_out[S];
  for (std::size_t s = S; s-- > 0;) {
    const auto& up = geo.upsample[s];
    const Mat& skip = f.enc_out[s];
    Mat cat(skip.rows(), coarse->cols() + skip.cols());
    for (Eigen::Index i = 0; i < skip.rows(); ++i) cat.row(i).head(coarse->cols()) = coarse->row(up[i]);
    cat.rightCols(skip.cols()) = skip;
    const std::size_t wi = params.decoder_weight(s);
    f.dec_pre[s] = affine(cat, params.tensors[wi], params.tensors[wi + 1]);
    f.dec_out[s] = f.dec_pre[s].cwiseMax(0.0);
    f.dec_in[s] = std::move(cat);
    coarse = &f.dec_out[s];
  }
  const std::size_t hw = params.head_weight();
  f.logits = affine(f.dec_out[0], params.tensors[hw], params.tensors[hw + 1]);
  return f;
}

namespace {

// Gradients of an affine layer z = x W + b; returns d x.
Mat affine_backward(const Mat& x, const Mat& w, const Mat& dz, Mat& dw, Mat& db) {
  dw.noalias() += x.transpose() * dz;
  db.row(0) += dz.colwise().sum();
  return dz * w.transpose();
}

Mat relu_mask(const Mat& dy, const Mat& pre) {
  return (pre.array() > 0.0).select(dy, 0.0);
}

}  // namespace

Params backward(const Geometry& geo, const Params& params, const ForwardPass& f,
                const Mat& dlogits, const std::vector<Mat>& ddecoder) {
  const std::size_t S = params.net.stages;
  Params g = zero_params(params.net, params.in_dim, params.num_classes);

  std::vector<Mat> dfeat(S + 1);
  for (std::size_t s = 0; s <= S; ++s) {
    const Mat& ref = s < S ? f.dec_out[s] : f.enc_out[S];
    dfeat[s] = Mat::Zero(ref.rows(), ref.cols());
    if (s < S && s < ddecoder.size() && ddecoder[s].size() > 0) dfeat[s] += ddecoder[s];
  }
  std::vector<Mat> dskip(S + 1);
  for (std::size_t s = 1; s <= S; ++s) dskip[s] = Mat::Zero(f.enc_out[s].rows(), f.enc_out[s].cols());

  const std::size_t hw = params.head_weight();
  dfeat[0] += affine_backward(f.dec_out[0], params.tensors[hw], dlogits, g.tensors[hw],
                              g.tensors[hw + 1]);

  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t wi = params.decoder_weight(s);
    const Mat dz = relu_mask(dfeat[s], f.dec_pre[s]);
    const Mat dcat = affine_backward(f.dec_in[s], params.tensors[wi], dz, g.tensors[wi],
                                     g.tensors[wi + 1]);
    const Eigen::Index c_up = dfeat[s + 1].cols();
    const auto& up = geo.upsample[s];
    for (Eigen::Index i = 0; i < dcat.rows(); ++i) dfeat[s + 1].row(up[i]) += dcat.row(i).head(c_up);
    if (s >= 1) dskip[s] += dcat.rightCols(dcat.cols() - c_up);
  }

  Mat dx = dfeat[S] + dskip[S];
  for (std::size_t s = S; s >= 1; --s) {
    const Mat& pre = f.enc_pre[s - 1];
    Mat dh = Mat::Zero(pre.rows(), pre.cols());
    const auto& arg = f.pool_arg[s - 1];
    const Eigen::Index w = pre.cols();
    for (Eigen::Index i = 0; i < dx.rows(); ++i)
      for (Eigen::Index c = 0; c < w; ++c) dh(arg[i * w + c], c) += dx(i, c);
    const Mat dz = relu_mask(dh, pre);
    const std::size_t wi = params.encoder_weight(s);
    Mat dprev = affine_backward(f.enc_out[s - 1], params.tensors[wi], dz, g.tensors[wi],
                                g.tensors[wi + 1]);
    if (s > 1) dx = dprev + dskip[s - 1];
  }
  return g;
}

double cross_entropy(const Mat& logits, std::span<const int> labels) {
  return cross_entropy_grad(logits, labels).loss;
}

LossAndGrad cross_entropy_grad(const Mat& logits, std::span<const int> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size())
    throw std::invalid_argument("cross_entropy: logits/labels size mismatch");
  LossAndGrad out;
  out.grad.resize(logits.rows(), logits.cols());
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double hi = logits.row(i).maxCoeff();
    const RowVec e = (logits.row(i).array() - hi).exp().matrix();
    const double sum = e.sum();
    total += hi + std::log(sum) - logits(i, labels[i]);
    out.grad.row(i) = e * (inv_n / sum);
    out.grad(i, labels[i]) -= inv_n;
  }
  out.loss = total * inv_n;
  return out;
}

double joint_loss(double ce, std::span<const double> am_per_layer, double lambda) {
  double am = 0.0;
  for (double v : am_per_layer) am += v;
  return lambda * ce + (1.0 - lambda) * am;
}

std::vector<int> argmax_rows(const Mat& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    out[i] = static_cast<int>(best);
  }
  return out;
}

TrainingProblem::TrainingProblem(const PointCloud& cloud, const NetConfig& net,
                                 const TrainConfig& train)
    : geo_(build_geometry(cloud, net)), net_(net), train_(train) {
  train_.validate();
  bool vacuous = false;
  for (std::size_t s = 0; s < net.stages; ++s) {
    const PointCloud& layer = geo_.stack.cloud(s);
    const NeighborIndex index(layer.positions);
    ContrastLayer cl;
    cl.partitions = partition_all(index, layer.labels, train.ambiguity.k);
    cl.ambiguity = ambiguity_map(cl.partitions, train.ambiguity, s);
    cl.margins = margins(cl.ambiguity.values, train.margin);
    for (double m : cl.margins) vacuous = vacuous || margin_is_vacuous(m);
    layers_.push_back(std::move(cl));
  }
  if (vacuous) std::cerr << "warning: some margins exceed 2 in magnitude\n";
}

Objective TrainingProblem::evaluate(const Params& params, Params* grad) const {
  const ForwardPass f = forward(geo_, params);
  const auto& labels = cloud().labels;
  Objective obj;
  LossAndGrad ce = cross_entropy_grad(f.logits, labels);
  obj.ce = ce.loss;

  std::vector<Mat> ddec(net_.stages);
  for (std::size_t s = 0; s < net_.stages; ++s) {
    const auto& cl = layers_[s];
    if (grad) {
      LossAndGrad am = layer_loss_grad(f.dec_out[s], cl.partitions, cl.margins, train_.contrast);
      obj.am.push_back(am.loss);
      ddec[s] = (1.0 - train_.lambda) * am.grad;
    } else {
      obj.am.push_back(layer_loss(f.dec_out[s], cl.partitions, cl.margins, train_.contrast));
    }
  }
  for (double v : obj.am) obj.am_sum += v;
  obj.joint = joint_loss(obj.ce, obj.am, train_.lambda);

  const auto pred = argmax_rows(f.logits);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i] ? 1 : 0;
  obj.oa = static_cast<double>(hit) / static_cast<double>(pred.size());

  if (grad) *grad = backward(geo_, params, f, train_.lambda * ce.grad, ddec);
  return obj;
}

TrainResult train(const PointCloud& cloud, const NetConfig& net, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  const TrainingProblem problem(cloud, net, cfg);
  TrainResult result;
  result.params = init_params(net, 3 + cloud.feature_dims(), static_cast<std::size_t>(cloud.num_classes));
  Params& params = result.params;
  std::vector<Mat> velocity;
  for (const auto& t : params.tensors) velocity.push_back(Mat::Zero(t.rows(), t.cols()));

  Params grad;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const Objective obj = problem.evaluate(params, &grad);
    if (!std::isfinite(obj.joint))
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
    EpochLog entry{epoch, obj.ce, obj.am_sum, obj.joint, obj.oa};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    for (std::size_t t = 0; t < params.tensors.size(); ++t) {
      velocity[t] = cfg.momentum * velocity[t] + grad.tensors[t];
      params.tensors[t] -= cfg.lr * velocity[t];
    }
  }
  return result;
}

Metrics metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion) {
  Metrics m;
  m.confusion = confusion;
  const std::size_t C = confusion.size();
  std::size_t total = 0, trace = 0;
  std::vector<std::size_t> row(C, 0), col(C, 0);
  for (std::size_t t = 0; t < C; ++t) {
    for (std::size_t p = 0; p < C; ++p) {
      row[t] += confusion[t][p];
      col[p] += confusion[t][p];
      total += confusion[t][p];
    }
    trace += confusion[t][t];
  }
  m.oa = total ? double(trace) / double(total) : 0.0;
  double acc_sum = 0.0, iou_sum = 0.0;
  std::size_t acc_n = 0, iou_n = 0;
  for (std::size_t c = 0; c < C; ++c) {
    const double tp = double(confusion[c][c]);
    if (row[c] > 0) {
      acc_sum += tp / double(row[c]);
      ++acc_n;
    }
    if (row[c] + col[c] > 0) {
      iou_sum += tp / double(row[c] + col[c] - confusion[c][c]);
      ++iou_n;
    }
  }
  m.macc = acc_n ? acc_sum / double(acc_n) : 0.0;
  m.miou = iou_n ? iou_sum / double(iou_n) : 0.0;
  m.boundary_band_acc = std::numeric_limits<double>::quiet_NaN();
  return m;
}

Metrics compute_metrics(std::span<const int> truth, std::span<const int> pred, int num_classes,
                        std::span<const double> ambiguity) {
  if (truth.size() != pred.size()) throw std::invalid_argument("truth/prediction size mismatch");
  if (!ambiguity.empty() && ambiguity.size() != truth.size())
    throw std::invalid_argument("ambiguity size mismatch");
  const auto C = static_cast<std::size_t>(num_classes);
  std::vector<std::vector<std::size_t>> conf(C, std::vector<std::size_t>(C, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || pred[i] < 0 || std::size_t(truth[i]) >= C || std::size_t(pred[i]) >= C)
      throw std::invalid_argument("class id out of range");
    ++conf[truth[i]][pred[i]];
  }
  Metrics m = metrics_from_confusion(conf);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < ambiguity.size(); ++i) {
    if (ambiguity[i] > 0.0) {
      ++m.band_points;
      hit += truth[i] == pred[i] ? 1 : 0;
    }
  }
  if (m.band_points > 0) m.boundary_band_acc = double(hit) / double(m.band_points);
  return m;
}

std::vector<int> predict(const Params& params, const PointCloud& cloud) {
  if (3 + cloud.feature_dims() != params.in_dim)
    throw DataError("cloud has " + std::to_string(cloud.feature_dims()) +
                    " feature dims but the model expects " + std::to_string(params.in_dim - 3));
  if (static_cast<std::size_t>(cloud.num_classes) > params.num_classes)
    throw DataError("cloud declares more classes than the model predicts");
  const Geometry geo = build_geometry(cloud, params.net);
  return argmax_rows(forward(geo, params).logits);
}

Metrics evaluate(const Params& params, const PointCloud& cloud, std::span<const double> ambiguity) {
  const auto pred = predict(params, cloud);
  return compute_metrics(cloud.labels, pred, static_cast<int>(params.num_classes), ambiguity);
}

}  // namespace amc
