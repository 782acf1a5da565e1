#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "amcontrast/model.hpp"
#include "oracles.hpp"

using namespace amc;

namespace {

PointCloud two_plane(std::size_t n, double noise, std::uint64_t seed) {
  SceneSpec spec;
  spec.n = n;
  spec.noise = noise;
  spec.seed = seed;
  return generate_scene(spec);
}

NetConfig tiny_net(std::uint64_t seed) {
  NetConfig net;
  net.stages = 2;
  net.widths = {6, 8};
  net.downsample_ratio = 2;
  net.aggregation_k = 4;
  net.head_width = 5;
  net.seed = seed;
  return net;
}

}  // namespace

TEST_CASE("layer stack sizes and subset invariant") {
  const PointCloud cloud = two_plane(2048, 0.01, 1);
  NetConfig net;
  const LayerStack stack = build_layer_stack(cloud, net);
  REQUIRE(stack.size() == 3);
  CHECK(stack.cloud(0).size() == 2048);
  CHECK(stack.cloud(1).size() == 512);
  CHECK(stack.cloud(2).size() == 128);
  CHECK_NOTHROW(stack.validate());

  net.stages = 1;
  net.widths = {32};
  CHECK(build_layer_stack(cloud, net).size() == 2);

  NetConfig deep;
  deep.stages = 4;
  deep.widths = {8, 8, 8, 8};
  CHECK_THROWS_AS(build_layer_stack(cloud, deep), std::invalid_argument);

  const LayerStack again = build_layer_stack(cloud, NetConfig{});
  for (std::size_t s = 0; s < 3; ++s) CHECK(again.cloud(s) == stack.cloud(s));
}

TEST_CASE("forward shapes, zero weights and sensitivity to inputs") {
  std::mt19937_64 rng(3);
  PointCloud cloud = oracle::random_cloud(rng, 40, 2, 2);
  NetConfig net;
  net.stages = 1;
  net.widths = {8};
  net.aggregation_k = 3;
  net.head_width = 4;

  const Geometry geo = build_geometry(cloud, net);
  const Params zero = zero_params(net, 5, 2);
  const ForwardPass fz = forward(geo, zero);
  CHECK(fz.logits.rows() == 40);
  CHECK(fz.logits.cols() == 2);
  CHECK(fz.logits.isZero(0.0));
  CHECK(cross_entropy(fz.logits, cloud.labels) == doctest::Approx(std::log(2.0)));

  const Params p = init_params(net, 5, 2);
  const ForwardPass f1 = forward(geo, p);
  CHECK(f1.logits.allFinite());
  CHECK(f1.decoder_features(0).rows() == 40);
  PointCloud doubled = cloud;
  doubled.features *= 2.0;
  const ForwardPass f2 = forward(build_geometry(doubled, net), p);
  CHECK((f2.logits - f1.logits).cwiseAbs().maxCoeff() > 1e-6);

  CHECK_THROWS_AS(forward(geo, init_params(net, 4, 2)), std::invalid_argument);
}

TEST_CASE("cross entropy closed forms") {
  Mat l(1, 2);
  l << 0.0, 0.0;
  CHECK(cross_entropy(l, std::vector<int>{0}) == doctest::Approx(0.693147).epsilon(1e-6));
  l << std::log(3.0), 0.0;
  CHECK(cross_entropy(l, std::vector<int>{0}) == doctest::Approx(0.287682).epsilon(1e-6));
  double prev = 1.0;
  for (double gap : {1.0, 5.0, 20.0, 50.0}) {
    l << gap, 0.0;
    const double ce = cross_entropy(l, std::vector<int>{0});
    CHECK(ce >= 0.0);
    CHECK(ce < prev);
    prev = ce;
  }
  CHECK(prev < 1e-20);
  l << 1000.0, -1000.0;  // max-shift keeps this finite
  CHECK(std::isfinite(cross_entropy(l, std::vector<int>{1})));
}

TEST_CASE("joint loss") {
  CHECK(joint_loss(1.0, std::vector<double>{2.0}, 0.1) == doctest::Approx(1.9));
  CHECK(joint_loss(0.7, std::vector<double>{2.0, 3.0}, 1.0) == 0.7);
  CHECK(joint_loss(0.7, std::vector<double>{0.0, 0.0}, 0.1) == doctest::Approx(0.07));
}

TEST_CASE("whole-model gradient matches central differences") {
  std::mt19937_64 rng(17);
  const PointCloud cloud = two_plane(64, 0.3, 4);
  TrainConfig tc;
  tc.contrast.tau = 0.5;
  tc.ambiguity.k = 8;
  const NetConfig net = tiny_net(2);
  const TrainingProblem problem(cloud, net, tc);
  REQUIRE(problem.contrast_layers().size() == 2);

  Params p = init_params(net, 3, 2);
  Params g;
  problem.evaluate(p, &g);
  std::uniform_int_distribution<std::size_t> pick(0, p.count() - 1);
  std::vector<double> analytic, numeric;
  for (int s = 0; s < 80; ++s) {
    const std::size_t i = pick(rng);
    analytic.push_back(g.flat(i));
    numeric.push_back(oracle::central_diff([&] { return problem.evaluate(p).joint; }, p.flat(i),
                                           1e-6));
  }
  CHECK(oracle::rel_error(analytic, numeric) <= 1e-4);
}

TEST_CASE("metrics from a hand-built confusion matrix") {
  const Metrics m = metrics_from_confusion({{2, 0}, {1, 1}});
  CHECK(m.oa == doctest::Approx(0.75));
  CHECK(m.macc == doctest::Approx(0.75));
  CHECK(m.miou == doctest::Approx((2.0 / 3.0 + 0.5) / 2.0));

  const std::vector<int> truth{0, 0, 1, 1};
  const Metrics perfect = compute_metrics(truth, truth, 2, std::vector<double>{0, 0.3, 1, 0});
  CHECK(perfect.oa == 1.0);
  CHECK(perfect.macc == 1.0);
  CHECK(perfect.miou == 1.0);
  CHECK(perfect.boundary_band_acc == 1.0);
  CHECK(perfect.band_points == 2);

  const Metrics flat = compute_metrics(truth, std::vector<int>{0, 0, 0, 0}, 2, {});
  CHECK(flat.oa == 0.5);
  CHECK(std::isnan(flat.boundary_band_acc));

  // class 2 absent from truth and prediction is left out of the mean
  const Metrics three = compute_metrics(truth, truth, 3, {});
  CHECK(three.miou == 1.0);
}

TEST_CASE("argmax ties go to the smallest class") {
  Mat l(2, 3);
  l << 1, 1, 0, 0, 2, 2;
  CHECK(argmax_rows(l) == std::vector<int>{0, 1});
}

TEST_CASE("model file round trip") {
  const NetConfig net = tiny_net(9);
  const Params p = init_params(net, 4, 3);
  const auto path = std::filesystem::temp_directory_path() / "amc_model_roundtrip.bin";
  save_params(p, path);
  const Params q = load_params(path);
  CHECK(q.in_dim == 4);
  CHECK(q.num_classes == 3);
  CHECK(q.net.widths == net.widths);
  REQUIRE(q.tensors.size() == p.tensors.size());
  for (std::size_t t = 0; t < p.tensors.size(); ++t) CHECK(q.tensors[t] == p.tensors[t]);
  {
    std::ofstream bad(path, std::ios::binary);
    bad << "garbage";
  }
  CHECK_THROWS_AS(load_params(path), DataError);
  std::filesystem::remove(path);
}

TEST_CASE("training is deterministic and position-derived state is fixed") {
  const PointCloud cloud = two_plane(256, 0.01, 2);
  NetConfig net;
  net.stages = 1;
  net.widths = {16};
  TrainConfig tc;
  tc.epochs = 15;
  tc.ambiguity.k = 12;
  const TrainResult a = train(cloud, net, tc);
  const TrainResult b = train(cloud, net, tc);
  REQUIRE(a.log.size() == 15);
  for (std::size_t e = 0; e < a.log.size(); ++e) {
    CHECK(a.log[e].l_joint == b.log[e].l_joint);
    CHECK(a.log[e].oa == b.log[e].oa);
  }
  for (std::size_t t = 0; t < a.params.tensors.size(); ++t)
    CHECK(a.params.tensors[t] == b.params.tensors[t]);

  // lambda = 1 still reports the contrastive term
  tc.lambda = 1.0;
  const TrainResult c = train(cloud, net, tc);
  CHECK(c.log.front().l_am_sum > 0.0);
  CHECK(c.log.front().l_joint == c.log.front().l_ce);
}

TEST_CASE("divergence guard") {
  const PointCloud cloud = two_plane(256, 0.01, 2);
  NetConfig net;
  net.stages = 1;
  net.widths = {16};
  TrainConfig tc;
  tc.epochs = 50;
  tc.lr = 1e200;
  tc.ambiguity.k = 12;
  CHECK_THROWS_AS(train(cloud, net, tc), NumericError);
}

TEST_CASE("joint loss falls over training on the two-plane scene") {
  const PointCloud cloud = two_plane(512, 0.02, 3);
  TrainConfig tc;
  tc.epochs = 40;
  const TrainResult r = train(cloud, NetConfig{}, tc);
  CHECK(r.log.back().l_joint < r.log.front().l_joint);
  CHECK(r.log.back().oa > 0.9);
}
