#include "amcontrast/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace amc {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw ConfigError("invalid value '" + std::string(value) + "' for key " + std::string(key));
}

double as_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v);
  return out;
}

template <typename T>
T as_uint(std::string_view key, std::string_view v) {
  T out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v);
  return out;
}

bool as_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v);
}

std::string real_text(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  auto& tr = cfg.train;
  try {
    if (key == "scene.file") cfg.cloud_file = std::filesystem::path(std::string(value));
    else if (key == "scene.kind") cfg.scene.kind = parse_scene_kind(value);
    else if (key == "scene.n") cfg.scene.n = as_uint<std::size_t>(key, value);
    else if (key == "scene.noise") cfg.scene.noise = as_real(key, value);
    else if (key == "scene.seed") cfg.scene.seed = as_uint<std::uint64_t>(key, value);
    else if (key == "scene.spacing") cfg.scene.spacing = as_real(key, value);
    else if (key == "scene.rows") cfg.scene.rows = as_uint<std::size_t>(key, value);
    else if (key == "scene.boundary") cfg.scene.boundary = as_real(key, value);
    else if (key == "scene.cell") cfg.scene.cell = as_uint<std::size_t>(key, value);
    else if (key == "ambiguity.k") tr.ambiguity.k = as_uint<std::size_t>(key, value);
    else if (key == "ambiguity.beta") tr.ambiguity.beta = as_real(key, value);
    else if (key == "ambiguity.epsilon") tr.ambiguity.epsilon = as_real(key, value);
    else if (key == "contrast.tau") tr.contrast.tau = as_real(key, value);
    else if (key == "contrast.norm_epsilon") tr.contrast.norm_epsilon = as_real(key, value);
    else if (key == "margin.preset") {
      tr.margin = preset(value);
      cfg.margin_name = std::string(value);
    } else if (key == "margin.mu") {
      tr.margin.mu = as_real(key, value);
      cfg.margin_name = "custom";
    } else if (key == "margin.nu") {
      tr.margin.nu = as_real(key, value);
      cfg.margin_name = "custom";
    } else if (key == "margin.clamp") {
      tr.margin.clamp_at_zero = as_bool(key, value);
      cfg.margin_name = "custom";
    } else if (key == "net.stages") cfg.net.stages = as_uint<std::size_t>(key, value);
    else if (key == "net.widths") {
      cfg.net.widths.clear();
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        cfg.net.widths.push_back(as_uint<std::size_t>(key, trim(rest.substr(0, comma))));
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
    } else if (key == "net.downsample_ratio") cfg.net.downsample_ratio = as_uint<std::size_t>(key, value);
    else if (key == "net.aggregation_k") cfg.net.aggregation_k = as_uint<std::size_t>(key, value);
    else if (key == "net.head_width") cfg.net.head_width = as_uint<std::size_t>(key, value);
    else if (key == "net.input_scale") cfg.net.input_scale = as_real(key, value);
    else if (key == "train.lr") tr.lr = as_real(key, value);
    else if (key == "train.epochs") tr.epochs = as_uint<std::size_t>(key, value);
    else if (key == "train.momentum") tr.momentum = as_real(key, value);
    else if (key == "train.lambda") tr.lambda = as_real(key, value);
    else if (key == "train.seed") cfg.net.seed = as_uint<std::uint64_t>(key, value);
    else if (key == "output.dir") cfg.output_dir = std::filesystem::path(std::string(value));
    else throw ConfigError("unknown config key: " + std::string(key));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

RunConfig parse_run_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("malformed section header, line " + std::to_string(line_no));
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("expected key = value, line " + std::to_string(line_no));
    const std::string_view key = trim(line.substr(0, eq));
    std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    apply_setting(cfg, full, line.substr(eq + 1));
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  const auto& tr = cfg.train;
  out << "[scene]\n";
  if (cfg.cloud_file) out << "file = " << cfg.cloud_file->string() << "\n";
  out << "kind = " << to_string(cfg.scene.kind) << "\n"
      << "n = " << cfg.scene.n << "\n"
      << "noise = " << real_text(cfg.scene.noise) << "\n"
      << "seed = " << cfg.scene.seed << "\n"
      << "spacing = " << real_text(cfg.scene.spacing) << "\n"
      << "rows = " << cfg.scene.rows << "\n";
  if (cfg.scene.boundary) out << "boundary = " << real_text(*cfg.scene.boundary) << "\n";
  out << "cell = " << cfg.scene.cell << "\n";
  out << "\n[ambiguity]\nk = " << tr.ambiguity.k << "\nbeta = " << real_text(tr.ambiguity.beta)
      << "\nepsilon = " << real_text(tr.ambiguity.epsilon) << "\n";
  out << "\n[contrast]\ntau = " << real_text(tr.contrast.tau)
      << "\nnorm_epsilon = " << real_text(tr.contrast.norm_epsilon) << "\n";
  out << "\n[margin]\nmu = " << real_text(tr.margin.mu) << "\nnu = " << real_text(tr.margin.nu)
      << "\nclamp = " << (tr.margin.clamp_at_zero ? "true" : "false") << "\n";
  out << "\n[net]\nstages = " << cfg.net.stages << "\nwidths = ";
  for (std::size_t i = 0; i < cfg.net.widths.size(); ++i)
    out << (i ? "," : "") << cfg.net.widths[i];
  out << "\ndownsample_ratio = " << cfg.net.downsample_ratio
      << "\naggregation_k = " << cfg.net.aggregation_k << "\nhead_width = " << cfg.net.head_width
      << "\ninput_scale = " << real_text(cfg.net.input_scale) << "\n";
  out << "\n[train]\nlr = " << real_text(tr.lr) << "\nepochs = " << tr.epochs
      << "\nmomentum = " << real_text(tr.momentum) << "\nlambda = " << real_text(tr.lambda)
      << "\nseed = " << cfg.net.seed << "\n";
  out << "\n[output]\ndir = " << cfg.output_dir.string() << "\n";
  return out.str();
}

}  // namespace amc
