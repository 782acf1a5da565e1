#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace amc {

/// m = mu * a + nu, optionally floored at zero.
struct MarginSpec {
  double mu = -1.0;
  double nu = 0.5;
  bool clamp_at_zero = false;

  friend bool operator==(const MarginSpec&, const MarginSpec&) = default;
};

enum class MarginRegime { Positive, Zero, Negative };
enum class BoundarySide { IntraSide, InterSide };

enum class MarginPreset { S3dis, Scannet, Const0, Const05, PosA, OneMinusA, Clamped };

/// Ablation presets in table order.
inline constexpr std::array<MarginPreset, 6> kAblationPresets = {
    MarginPreset::Const0, MarginPreset::Const05,  MarginPreset::PosA,
    MarginPreset::OneMinusA, MarginPreset::S3dis, MarginPreset::Clamped};

inline constexpr double kZeroMarginBand = 1e-12;

double margin(double a, const MarginSpec& spec);
std::vector<double> margins(std::span<const double> ambiguity, const MarginSpec& spec);

MarginRegime regime(double m);

/// IntraSide iff sim_intra - sim_inter >= m.
BoundarySide boundary_satisfied(double sim_intra, double sim_inter, double m);

MarginSpec preset(MarginPreset name);
MarginSpec preset(std::string_view name);  // throws std::invalid_argument
MarginPreset parse_preset(std::string_view name);

std::string_view to_string(MarginPreset p);
std::string_view to_string(MarginRegime r);

/// With cosine similarities in [-1, 1], |m| > 2 leaves one side of the
/// boundary empty.
inline bool margin_is_vacuous(double m) { return m > 2.0 || m < -2.0; }

}  // namespace amc
