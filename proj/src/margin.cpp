#include "amcontrast/margin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace amc {

double margin(double a, const MarginSpec& spec) {
  const double m = spec.mu * a + spec.nu;
  return spec.clamp_at_zero ? std::max(0.0, m) : m;
}

std::vector<double> margins(std::span<const double> ambiguity, const MarginSpec& spec) {
  std::vector<double> out;
  out.reserve(ambiguity.size());
  for (double a : ambiguity) out.push_back(margin(a, spec));
  return out;
}

MarginRegime regime(double m) {
  if (std::abs(m) < kZeroMarginBand) return MarginRegime::Zero;
  return m > 0.0 ? MarginRegime::Positive : MarginRegime::Negative;
}

BoundarySide boundary_satisfied(double sim_intra, double sim_inter, double m) {
  return sim_intra - sim_inter >= m ? BoundarySide::IntraSide : BoundarySide::InterSide;
}

MarginSpec preset(MarginPreset name) {
  switch (name) {
    case MarginPreset::S3dis: return {-1.0, 0.5, false};
    case MarginPreset::Scannet: return {-1.0, 0.6, false};
    case MarginPreset::Const0: return {0.0, 0.0, false};
    case MarginPreset::Const05: return {0.0, 0.5, false};
    case MarginPreset::PosA: return {1.0, 0.0, false};
    case MarginPreset::OneMinusA: return {-1.0, 1.0, false};
    case MarginPreset::Clamped: return {-1.0, 0.5, true};
  }
  throw std::invalid_argument("unknown margin preset");
}

MarginPreset parse_preset(std::string_view name) {
  for (auto p : {MarginPreset::S3dis, MarginPreset::Scannet, MarginPreset::Const0,
                 MarginPreset::Const05, MarginPreset::PosA, MarginPreset::OneMinusA,
                 MarginPreset::Clamped})
    if (to_string(p) == name) return p;
  throw std::invalid_argument("unknown margin preset: " + std::string(name));
}

MarginSpec preset(std::string_view name) { return preset(parse_preset(name)); }

std::string_view to_string(MarginPreset p) {
  switch (p) {
    case MarginPreset::S3dis: return "s3dis";
    case MarginPreset::Scannet: return "scannet";
    case MarginPreset::Const0: return "const0";
    case MarginPreset::Const05: return "const05";
    case MarginPreset::PosA: return "pos_a";
    case MarginPreset::OneMinusA: return "one_minus_a";
    case MarginPreset::Clamped: return "clamped";
  }
  return "?";
}

std::string_view to_string(MarginRegime r) {
  switch (r) {
    case MarginRegime::Positive: return "positive";
    case MarginRegime::Zero: return "zero";
    case MarginRegime::Negative: return "negative";
  }
  return "?";
}

}  // namespace amc
