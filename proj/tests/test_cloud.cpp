#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "amcontrast/cloud.hpp"
#include "oracles.hpp"

using namespace amc;

namespace {

PointCloud parse(const std::string& text) {
  std::istringstream in(text);
  return read_ascii(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

double min_pairwise(const Mat& p, const std::vector<std::size_t>& idx) {
  double best = INFINITY;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      best = std::min(best, oracle::sq_dist(p, idx[a], idx[b]));
  return best;
}

}  // namespace

TEST_CASE("ascii parse") {
  const PointCloud c = parse(
      "# two points\n"
      "points 2 feature_dims 1 classes 3\n"
      "0 0 0 0.5 2\n"
      "\n"
      "1.5 -2 3e-1 7 0\n");
  CHECK(c.size() == 2);
  CHECK(c.num_classes == 3);
  CHECK(c.feature_dims() == 1);
  CHECK(c.labels == std::vector<int>{2, 0});
  CHECK(c.positions(1, 2) == 0.3);
  CHECK(c.features(1, 0) == 7.0);
}

TEST_CASE("ascii errors name the line") {
  CHECK(error_of("points 1 feature_dims 0 classes 2\n0 0 0 2\n") ==
        "label out of range, line 2");
  CHECK(error_of("points 2 feature_dims 0 classes 2\n0 0 0 1\n0 0 1\n") ==
        "row arity mismatch, line 3");
  CHECK(error_of("points 1 feature_dims 0 classes 2\n0 x 0 1\n") == "malformed number, line 2");
  CHECK(error_of("points 1 feature_dims 0 classes 2\n0 0 0 1\n0 0 0 1\n") ==
        "more rows than declared, line 3");
  CHECK(error_of("points 1 feature_dims 0 classes 2\n0 nan 0 1\n") == "non-finite value, line 2");
  CHECK(error_of("pts 1\n") == "malformed header, line 1");
  CHECK(error_of("points 3 feature_dims 0 classes 2\n0 0 0 1\n") == "expected 3 rows, found 1");
  CHECK(error_of("") == "missing header");
}

TEST_CASE("ascii round trip and stable bytes") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const PointCloud c = oracle::random_cloud(rng, 1 + trial, 1 + trial % 4, trial % 3);
    std::ostringstream out;
    write_ascii(c, out);
    CHECK(parse(out.str()) == c);
  }

  PointCloud one = oracle::random_cloud(rng, 1, 2);
  std::ostringstream out;
  write_ascii(one, out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);

  const auto dir = std::filesystem::temp_directory_path();
  const PointCloud c = oracle::random_cloud(rng, 50, 3, 2);
  save_ascii(c, dir / "amc_a.pts");
  save_ascii(c, dir / "amc_b.pts");
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir / "amc_a.pts") == slurp(dir / "amc_b.pts"));
  CHECK(load_ascii(dir / "amc_a.pts") == c);
  std::filesystem::remove(dir / "amc_a.pts");
  std::filesystem::remove(dir / "amc_b.pts");
  CHECK_THROWS_AS(load_ascii(dir / "amc_missing.pts"), DataError);
}

TEST_CASE("validate") {
  std::mt19937_64 rng(2);
  PointCloud c = oracle::random_cloud(rng, 5, 2);
  CHECK_NOTHROW(c.validate());
  c.labels[3] = 2;
  CHECK_THROWS_AS(c.validate(), DataError);
  c.labels[3] = 0;
  c.positions(0, 0) = NAN;
  CHECK_THROWS_AS(c.validate(), DataError);
}

TEST_CASE("two-plane labels follow the lattice") {
  SceneSpec spec;
  spec.n = 16;
  spec.rows = 1;
  spec.spacing = 1.0;
  const PointCloud c = generate_scene(spec);
  std::vector<int> expect(8, 0);
  expect.resize(16, 1);
  CHECK(c.labels == expect);
  CHECK(c.num_classes == 2);
  for (std::size_t i = 0; i < 16; ++i) CHECK(c.positions(i, 0) == double(i));
}

TEST_CASE("checkerboard labels are cell parity") {
  SceneSpec spec;
  spec.kind = SceneKind::Checkerboard;
  spec.n = 400;
  spec.rows = 20;
  spec.cell = 10;
  const PointCloud c = generate_scene(spec);
  std::vector<int> per_cell(4, 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto col = static_cast<int>(std::lround(c.positions(i, 0) / spec.spacing));
    const auto row = static_cast<int>(std::lround(c.positions(i, 1) / spec.spacing));
    CHECK(c.labels[i] == (col / 10 + row / 10) % 2);
    ++per_cell[(col / 10) * 2 + row / 10];
  }
  CHECK(per_cell == std::vector<int>{100, 100, 100, 100});
}

TEST_CASE("scenes are deterministic and noise keeps labels") {
  for (auto kind : {SceneKind::TwoPlane, SceneKind::Checkerboard, SceneKind::Clusters}) {
    SceneSpec spec;
    spec.kind = kind;
    spec.n = 300;
    spec.noise = 0.03;
    spec.seed = 9;
    const PointCloud a = generate_scene(spec);
    CHECK(a == generate_scene(spec));
    CHECK_NOTHROW(a.validate());
    spec.noise = 0.0;
    CHECK(generate_scene(spec).labels == a.labels);
    spec.seed = 10;
    spec.noise = 0.03;
    CHECK(!(generate_scene(spec) == a));
  }
  SceneSpec clusters;
  clusters.kind = SceneKind::Clusters;
  clusters.n = 9;
  CHECK(generate_scene(clusters).labels == std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1, 2});

  SceneSpec bad;
  bad.kind = SceneKind::Checkerboard;
  bad.n = 1;
  CHECK_THROWS_AS(generate_scene(bad), std::invalid_argument);
  CHECK(parse_scene_kind("two-plane") == SceneKind::TwoPlane);
  CHECK(to_string(SceneKind::Checkerboard) == "checkerboard");
  CHECK_THROWS_AS(parse_scene_kind("plane"), std::invalid_argument);
}

TEST_CASE("farthest point sampling") {
  Mat square(4, 3);
  square << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0;
  CHECK(fps_order(square, 2) == std::vector<std::size_t>{0, 3});
  CHECK(fps_order(square, 1) == std::vector<std::size_t>{0});
  CHECK(fps_order(square, 4, 3) == std::vector<std::size_t>{3, 0, 1, 2});
  CHECK_THROWS_AS(fps_order(square, 5), std::invalid_argument);
  CHECK_THROWS_AS(fps_order(square, 0), std::invalid_argument);

  std::mt19937_64 rng(4);
  const PointCloud c = oracle::random_cloud(rng, 200, 2, 1);
  const auto all = fps_downsample(c, c.size());
  std::vector<std::size_t> identity(c.size());
  std::iota(identity.begin(), identity.end(), 0);
  CHECK(all.parent_index == identity);
  CHECK(all.cloud == c);

  for (std::size_t target : {1, 7, 50}) CHECK(fps_order(c.positions, target, 5) ==
                                              oracle::brute_fps(c.positions, target, 5));

  // the closest pair among the selection can only shrink as more points join
  const auto order = fps_order(c.positions, 60);
  double prev = INFINITY;
  for (std::size_t m = 2; m <= order.size(); ++m) {
    const double d = min_pairwise(c.positions, {order.begin(), order.begin() + long(m)});
    CHECK(d <= prev);
    prev = d;
  }

  const auto sub = fps_downsample(c, 50);
  CHECK(std::is_sorted(sub.parent_index.begin(), sub.parent_index.end()));
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(sub.cloud.labels[i] == c.labels[sub.parent_index[i]]);
    CHECK(sub.cloud.positions.row(long(i)) == c.positions.row(long(sub.parent_index[i])));
  }
}
