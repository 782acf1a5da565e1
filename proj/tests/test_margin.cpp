#include <doctest.h>

#include <random>

#include "amcontrast/contrast.hpp"
#include "amcontrast/margin.hpp"

using namespace amc;

TEST_CASE("margin values") {
  const MarginSpec s3dis = preset(MarginPreset::S3dis);
  CHECK(margin(0.0, s3dis) == 0.5);
  CHECK(margin(0.5, s3dis) == 0.0);
  CHECK(margin(1.0, s3dis) == -0.5);
  CHECK(regime(margin(0.5, s3dis)) == MarginRegime::Zero);
  CHECK(margin(0.0, preset("scannet")) == 0.6);
  CHECK(margin(0.3, preset("const05")) == 0.5);
  CHECK(margin(0.3, preset("const0")) == 0.0);
  CHECK(margin(0.3, preset("pos_a")) == 0.3);
  CHECK(margin(0.25, preset("one_minus_a")) == 0.75);
  CHECK(margin(1.0, preset("clamped")) == 0.0);
  CHECK(margin(0.2, preset("clamped")) == doctest::Approx(0.3));
  CHECK(margins(std::vector<double>{0.0, 1.0}, s3dis) == std::vector<double>{0.5, -0.5});
  CHECK_THROWS_AS(preset("bogus"), std::invalid_argument);
  for (auto p : kAblationPresets) CHECK(parse_preset(to_string(p)) == p);
}

TEST_CASE("ablation presets follow the table order") {
  const std::vector<std::pair<double, double>> expect{{0, 0}, {0, 0.5}, {1, 0}, {-1, 1}, {-1, 0.5}};
  for (std::size_t i = 0; i < expect.size(); ++i) {
    const MarginSpec s = preset(kAblationPresets[i]);
    CHECK(s.mu == expect[i].first);
    CHECK(s.nu == expect[i].second);
    CHECK(!s.clamp_at_zero);
  }
  CHECK(preset(kAblationPresets[5]).clamp_at_zero);
}

TEST_CASE("regime and decision boundary") {
  CHECK(regime(1e-11) == MarginRegime::Positive);
  CHECK(regime(-1e-11) == MarginRegime::Negative);
  CHECK(regime(0.0) == MarginRegime::Zero);
  CHECK(regime(1e-13) == MarginRegime::Zero);
  CHECK(to_string(MarginRegime::Negative) == "negative");

  CHECK(boundary_satisfied(0.9, 0.2, 0.5) == BoundarySide::IntraSide);
  CHECK(boundary_satisfied(0.6, 0.2, 0.5) == BoundarySide::InterSide);
  CHECK(boundary_satisfied(0.75, 0.25, 0.5) == BoundarySide::IntraSide);
  CHECK(boundary_satisfied(0.1, 0.2, -0.5) == BoundarySide::IntraSide);
  CHECK(margin_is_vacuous(2.5));
  CHECK(!margin_is_vacuous(-2.0));
}

TEST_CASE("clamped margins are never negative") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> a(0.0, 1.0), p(-3.0, 3.0);
  for (int t = 0; t < 500; ++t) {
    MarginSpec s{p(rng), p(rng), true};
    const double x = a(rng);
    CHECK(margin(x, s) >= 0.0);
    s.clamp_at_zero = false;
    CHECK(margin(x, s) == doctest::Approx(s.mu * x + s.nu));
  }
}

TEST_CASE("zero margin reduces to the plain contrastive loss") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> s(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const std::vector<double> intra{1.0, s(rng)}, inter{s(rng), s(rng)};
    const double m = margin(0.5, preset(MarginPreset::S3dis));
    CHECK(std::abs(margin_contrastive_loss(intra, inter, m, 0.3) -
                   supervised_contrastive_loss(intra, inter, 0.3)) <= 1e-12);
  }
}
