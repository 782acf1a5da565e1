#include "amcontrast/cloud.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace amc {

namespace {

std::string line_msg(const std::string& what, std::size_t line) {
  return what + ", line " + std::to_string(line);
}

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view tok, T& value) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

void append_real(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

double sq_dist_rows(const Mat& p, std::size_t i, std::size_t j) {
  const double dx = p(i, 0) - p(j, 0);
  const double dy = p(i, 1) - p(j, 1);
  const double dz = p(i, 2) - p(j, 2);
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

void PointCloud::validate() const {
  const std::size_t n = labels.size();
  if (n == 0) throw DataError("point cloud is empty");
  if (positions.rows() != static_cast<Eigen::Index>(n) || positions.cols() != 3)
    throw DataError("positions must be n x 3");
  if (features.rows() != static_cast<Eigen::Index>(n))
    throw DataError("features must have one row per point");
  if (num_classes <= 0) throw DataError("class count must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw DataError("label out of range at point " + std::to_string(i));
  }
  if (!positions.allFinite()) throw DataError("non-finite coordinate");
  if (!features.allFinite()) throw DataError("non-finite feature");
}

PointCloud PointCloud::select(const std::vector<std::size_t>& rows) const {
  PointCloud out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.positions.resize(m, 3);
  out.features.resize(m, features.cols());
  out.labels.resize(rows.size());
  out.num_classes = num_classes;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.positions.row(r) = positions.row(rows[r]);
    out.features.row(r) = features.row(rows[r]);
    out.labels[r] = labels[rows[r]];
  }
  return out;
}

bool operator==(const PointCloud& a, const PointCloud& b) {
  return a.num_classes == b.num_classes && a.labels == b.labels &&
         a.positions.rows() == b.positions.rows() && a.features.cols() == b.features.cols() &&
         a.features.rows() == b.features.rows() && a.positions == b.positions &&
         a.features == b.features;
}

PointCloud read_ascii(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t n = 0, dims = 0;
  int classes = 0;
  PointCloud cloud;
  std::size_t row = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_spaces(line);
    if (toks.empty() || toks.front().front() == '#') continue;

    if (!have_header) {
      if (toks.size() != 6 || toks[0] != "points" || toks[2] != "feature_dims" ||
          toks[4] != "classes" || !parse_number(toks[1], n) || !parse_number(toks[3], dims) ||
          !parse_number(toks[5], classes))
        throw DataError(line_msg("malformed header", line_no));
      if (n == 0) throw DataError(line_msg("point count must be positive", line_no));
      if (classes <= 0) throw DataError(line_msg("class count must be positive", line_no));
      cloud.positions.resize(static_cast<Eigen::Index>(n), 3);
      cloud.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dims));
      cloud.labels.resize(n);
      cloud.num_classes = classes;
      have_header = true;
      continue;
    }

    if (row >= n) throw DataError(line_msg("more rows than declared", line_no));
    if (toks.size() != 4 + dims) throw DataError(line_msg("row arity mismatch", line_no));
    for (std::size_t c = 0; c < 3 + dims; ++c) {
      double v = 0.0;
      if (!parse_number(toks[c], v)) throw DataError(line_msg("malformed number", line_no));
      if (!std::isfinite(v)) throw DataError(line_msg("non-finite value", line_no));
      if (c < 3)
        cloud.positions(row, c) = v;
      else
        cloud.features(row, c - 3) = v;
    }
    int label = 0;
    if (!parse_number(toks.back(), label)) throw DataError(line_msg("malformed label", line_no));
    if (label < 0 || label >= classes) throw DataError(line_msg("label out of range", line_no));
    cloud.labels[row] = label;
    ++row;
  }
  if (!have_header) throw DataError("missing header");
  if (row != n)
    throw DataError("expected " + std::to_string(n) + " rows, found " + std::to_string(row));
  return cloud;
}

void write_ascii(const PointCloud& cloud, std::ostream& out) {
  cloud.validate();
  std::string text = "points " + std::to_string(cloud.size()) + " feature_dims " +
                     std::to_string(cloud.feature_dims()) + " classes " +
                     std::to_string(cloud.num_classes) + "\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      append_real(text, cloud.positions(i, c));
      text += ' ';
    }
    for (std::size_t c = 0; c < cloud.feature_dims(); ++c) {
      append_real(text, cloud.features(i, c));
      text += ' ';
    }
    text += std::to_string(cloud.labels[i]);
    text += '\n';
  }
  out << text;
}

PointCloud load_ascii(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_ascii(in);
}

void save_ascii(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_ascii(cloud, out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SceneKind parse_scene_kind(std::string_view name) {
  if (name == "two-plane") return SceneKind::TwoPlane;
  if (name == "checkerboard") return SceneKind::Checkerboard;
  if (name == "clusters") return SceneKind::Clusters;
  throw std::invalid_argument("unknown scene kind: " + std::string(name));
}

std::string_view to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::TwoPlane: return "two-plane";
    case SceneKind::Checkerboard: return "checkerboard";
    case SceneKind::Clusters: return "clusters";
  }
  return "?";
}

namespace {

std::vector<ClusterSpec> default_clusters() {
  return {{{0.0, 0.0, 0.0}, 0, 0.25}, {{1.0, 0.0, 0.0}, 1, 0.25}, {{0.5, 0.85, 0.0}, 2, 0.25}};
}

std::size_t lattice_rows(const SceneSpec& spec) {
  if (spec.rows > 0) return spec.rows;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(double(spec.n)))));
}

}  // namespace

int SceneSpec::num_classes() const {
  if (kind != SceneKind::Clusters) return 2;
  const auto& cs = clusters.empty() ? default_clusters() : clusters;
  int c = 0;
  for (const auto& cl : cs) c = std::max(c, cl.label + 1);
  return c;
}

void SceneSpec::validate() const {
  if (n < 2) throw std::invalid_argument("scene needs at least 2 points");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw std::invalid_argument("noise must be >= 0");
  if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
  if (n < static_cast<std::size_t>(num_classes()))
    throw std::invalid_argument("fewer points than classes");
  for (const auto& cl : clusters)
    if (cl.label < 0 || !(cl.spread >= 0.0))
      throw std::invalid_argument("invalid cluster definition");
}

PointCloud generate_scene(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PointCloud cloud;
  const auto n = static_cast<Eigen::Index>(spec.n);
  cloud.positions.setZero(n, 3);
  cloud.features.resize(n, 0);
  cloud.labels.assign(spec.n, 0);
  cloud.num_classes = spec.num_classes();

  if (spec.kind == SceneKind::Clusters) {
    const auto clusters = spec.clusters.empty() ? default_clusters() : spec.clusters;
    for (std::size_t i = 0; i < spec.n; ++i) {
      const auto& cl = clusters[i % clusters.size()];
      for (int c = 0; c < 3; ++c) cloud.positions(i, c) = cl.center[c] + cl.spread * gauss(rng);
      cloud.labels[i] = cl.label;
    }
  } else {
    const std::size_t rows = lattice_rows(spec);
    const std::size_t cols = (spec.n + rows - 1) / rows;
    const double boundary = spec.boundary.value_or(0.5 * double(cols - 1) * spec.spacing);
    const std::size_t cell = spec.cell > 0 ? spec.cell : std::max<std::size_t>(1, (cols + 3) / 4);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const std::size_t col = i / rows, row = i % rows;
      const double x = double(col) * spec.spacing;
      cloud.positions(i, 0) = x;
      cloud.positions(i, 1) = double(row) * spec.spacing;
      if (spec.kind == SceneKind::TwoPlane)
        cloud.labels[i] = x > boundary ? 1 : 0;
      else
        cloud.labels[i] = static_cast<int>((col / cell + row / cell) % 2);
    }
  }

  if (spec.noise > 0.0) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) cloud.positions(i, c) += spec.noise * gauss(rng);
  }
  cloud.validate();
  return cloud;
}

std::vector<std::size_t> fps_order(const Mat& positions, std::size_t target, std::size_t start) {
  const auto n = static_cast<std::size_t>(positions.rows());
  if (target < 1 || target > n)
    throw std::invalid_argument("fps target " + std::to_string(target) + " out of range [1, " +
                                std::to_string(n) + "]");
  if (start >= n) throw std::invalid_argument("fps start index out of range");

  std::vector<std::size_t> order;
  order.reserve(target);
  std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  std::size_t current = start;
  for (std::size_t step = 0; step < target; ++step) {
    order.push_back(current);
    taken[current] = 1;
    if (step + 1 == target) break;
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      min_d[j] = std::min(min_d[j], sq_dist_rows(positions, current, j));
      if (min_d[j] > best_d) {
        best_d = min_d[j];
        best = j;
      }
    }
    current = best;
  }
  return order;
}

Downsampled fps_downsample(const PointCloud& cloud, std::size_t target, std::size_t start) {
  auto order = fps_order(cloud.positions, target, start);
  std::sort(order.begin(), order.end());
  Downsampled out{cloud.select(order), std::move(order)};
  return out;
}

void LayerStack::validate() const {
  if (layers.empty()) throw DataError("layer stack is empty");
  for (std::size_t s = 1; s < layers.size(); ++s) {
    const auto& prev = layers[s - 1].cloud;
    const auto& cur = layers[s];
    if (cur.cloud.size() >= prev.size()) throw DataError("layer sizes must strictly decrease");
    if (cur.parent_index.size() != cur.cloud.size()) throw DataError("parent index size mismatch");
    for (std::size_t i = 0; i < cur.cloud.size(); ++i) {
      const std::size_t p = cur.parent_index[i];
      if (p >= prev.size()) throw DataError("parent index out of range");
      if (cur.cloud.positions.row(i) != prev.positions.row(p) ||
          cur.cloud.labels[i] != prev.labels[p])
        throw DataError("layer point is not a copy of its parent");
    }
  }
}

}  // namespace amc
