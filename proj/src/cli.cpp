#include "amcontrast/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "amcontrast/ambiguity.hpp"
#include "amcontrast/cloud.hpp"
#include "amcontrast/config.hpp"
#include "amcontrast/knn.hpp"
#include "amcontrast/margin.hpp"
#include "amcontrast/ply.hpp"

namespace amc::cli {

namespace fs = std::filesystem;

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

AmbiguityMap layer0_ambiguity(const PointCloud& cloud, const AmbiguityConfig& cfg) {
  const NeighborIndex index(cloud.positions);
  return ambiguity_map(cloud, index, cfg, 0);
}

struct SynthArgs {
  std::string scene = "two-plane";
  std::size_t n = 2048;
  double noise = 0.0;
  std::uint64_t seed = 0;
  double spacing = 0.05;
  std::size_t rows = 0;
  std::optional<double> boundary;
  std::size_t cell = 0;
  std::string output;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SceneSpec spec;
  spec.kind = parse_scene_kind(a.scene);
  spec.n = a.n;
  spec.noise = a.noise;
  spec.seed = a.seed;
  spec.spacing = a.spacing;
  spec.rows = a.rows;
  spec.boundary = a.boundary;
  spec.cell = a.cell;
  const PointCloud cloud = generate_scene(spec);
  if (fs::path(a.output).has_parent_path()) fs::create_directories(fs::path(a.output).parent_path());
  save_ascii(cloud, a.output);
  out << "n=" << cloud.size() << " C=" << cloud.num_classes << "\n";
  return kOk;
}

struct AmbiguityArgs {
  std::string cloud;
  std::size_t k = 24;
  double beta = 0.04;
  std::string margin = "s3dis";
  std::optional<double> mu, nu;
  std::optional<bool> clamp;
  std::string output = "amb.csv";
  std::string ply;
};

int cmd_ambiguity(const AmbiguityArgs& a, std::ostream& out, std::ostream& err) {
  const PointCloud cloud = load_ascii(a.cloud);
  AmbiguityConfig cfg;
  cfg.k = a.k;
  cfg.beta = a.beta;
  MarginSpec spec = preset(a.margin);
  if (a.mu) spec.mu = *a.mu;
  if (a.nu) spec.nu = *a.nu;
  if (a.clamp) spec.clamp_at_zero = *a.clamp;

  const AmbiguityMap map = layer0_ambiguity(cloud, cfg);
  std::string csv = "index,a,m,regime\n";
  std::size_t band = 0, vacuous = 0;
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const double m = margin(map.values[i], spec);
    band += map.values[i] > 0.0 ? 1 : 0;
    vacuous += margin_is_vacuous(m) ? 1 : 0;
    csv += std::to_string(i) + "," + format_real(map.values[i]) + "," + format_real(m) + "," +
           std::string(to_string(regime(m))) + "\n";
  }
  write_file(a.output, csv);
  if (!a.ply.empty()) {
    if (fs::path(a.ply).has_parent_path()) fs::create_directories(fs::path(a.ply).parent_path());
    save_ambiguity_ply(cloud, map.values, a.ply);
  }
  if (vacuous > 0) err << "warning: " << vacuous << " margins exceed 2 in magnitude\n";
  out << "points=" << cloud.size() << " ambiguous=" << band << " -> " << a.output << "\n";
  return kOk;
}

struct TrainArgs {
  std::string config;
  std::string cloud;
  std::string out_dir;
  std::vector<std::string> sets;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::string margin;
};

RunConfig resolve_config(const std::string& config_path, const std::vector<std::string>& sets) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + s);
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

PointCloud scene_of(const RunConfig& cfg) {
  return cfg.cloud_file ? load_ascii(*cfg.cloud_file) : generate_scene(cfg.scene);
}

void write_curve(const std::vector<EpochLog>& log, const fs::path& path) {
  std::string csv = "epoch,l_ce,l_am_sum,l_joint,oa\n";
  for (const auto& e : log)
    csv += std::to_string(e.epoch) + "," + format_real(e.l_ce) + "," + format_real(e.l_am_sum) +
           "," + format_real(e.l_joint) + "," + format_real(e.oa) + "\n";
  write_file(path, csv);
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg = resolve_config(a.config, a.sets);
  if (!a.cloud.empty()) cfg.cloud_file = fs::path(a.cloud);
  if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.seed) cfg.net.seed = *a.seed;
  if (a.lambda) cfg.train.lambda = *a.lambda;
  if (!a.margin.empty()) apply_setting(cfg, "margin.preset", a.margin);

  const PointCloud cloud = scene_of(cfg);
  const TrainResult res = train(cloud, cfg.net, cfg.train);
  fs::create_directories(cfg.output_dir);
  save_params(res.params, cfg.output_dir / "model.bin");
  write_curve(res.log, cfg.output_dir / "curve.csv");
  write_file(cfg.output_dir / "config.cfg", dump_run_config(cfg));
  const auto& last = res.log.back();
  out << "epochs=" << res.log.size() << " l_joint=" << format_real(last.l_joint)
      << " oa=" << format_real(last.oa) << " -> " << cfg.output_dir.string() << "\n";
  return kOk;
}

struct EvalArgs {
  std::string model;
  std::string cloud;
  std::size_t k = 24;
  double beta = 0.04;
  std::string csv;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const Params params = load_params(a.model);
  const PointCloud cloud = load_ascii(a.cloud);
  AmbiguityConfig acfg;
  acfg.k = std::min(a.k, cloud.size());
  acfg.beta = a.beta;
  const AmbiguityMap amb = layer0_ambiguity(cloud, acfg);
  const Metrics m = evaluate(params, cloud, amb.values);

  out << std::left << std::setw(20) << "metric" << "value\n";
  out << std::setw(20) << "OA" << format_real(m.oa) << "\n";
  out << std::setw(20) << "mACC" << format_real(m.macc) << "\n";
  out << std::setw(20) << "mIoU" << format_real(m.miou) << "\n";
  out << std::setw(20) << "boundary_band_acc" << format_real(m.boundary_band_acc) << "\n";
  const std::string csv = "oa,macc,miou,boundary_band_acc\n" + format_real(m.oa) + "," +
                          format_real(m.macc) + "," + format_real(m.miou) + "," +
                          format_real(m.boundary_band_acc) + "\n";
  out << csv;
  if (!a.csv.empty()) write_file(a.csv, csv);
  return kOk;
}

struct AblateArgs {
  std::string cloud;
  std::string config;
  std::vector<std::string> sets;
  std::string seeds = "0";
  std::string out_dir;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
      throw ConfigError("invalid seed list: " + text);
    seeds.push_back(v);
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

int cmd_ablate(const AblateArgs& a, std::ostream& out) {
  RunConfig cfg = resolve_config(a.config, a.sets);
  if (!a.cloud.empty()) cfg.cloud_file = fs::path(a.cloud);
  if (!a.out_dir.empty()) cfg.output_dir = a.out_dir;
  const auto seeds = parse_seeds(a.seeds);
  const PointCloud cloud = scene_of(cfg);

  AmbiguityConfig acfg = cfg.train.ambiguity;
  acfg.k = std::min(acfg.k, cloud.size());
  const AmbiguityMap amb = layer0_ambiguity(cloud, acfg);

  std::string csv = "preset,seed,oa,miou,boundary_band_acc\n";
  std::string medians;
  for (MarginPreset p : kAblationPresets) {
    std::vector<double> oa, miou, band;
    for (std::uint64_t seed : seeds) {
      NetConfig net = cfg.net;
      net.seed = seed;
      TrainConfig tc = cfg.train;
      tc.margin = preset(p);
      const TrainResult res = train(cloud, net, tc);
      const Metrics m = evaluate(res.params, cloud, amb.values);
      oa.push_back(m.oa);
      miou.push_back(m.miou);
      band.push_back(m.boundary_band_acc);
      csv += std::string(to_string(p)) + "," + std::to_string(seed) + "," + format_real(m.oa) +
             "," + format_real(m.miou) + "," + format_real(m.boundary_band_acc) + "\n";
    }
    medians += std::string(to_string(p)) + ",median," + format_real(median(oa)) + "," +
               format_real(median(miou)) + "," + format_real(median(band)) + "\n";
  }
  csv += medians;
  write_file(cfg.output_dir / "ablate.csv", csv);
  out << csv;
  return kOk;
}

}  // namespace

void write_curve_csv(const std::vector<EpochLog>& log, const fs::path& path) {
  write_curve(log, path);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ambiguity-aware adaptive-margin contrastive learning for point clouds"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a labeled synthetic scene");
  s->add_option("--scene", synth.scene, "two-plane | checkerboard | clusters")->capture_default_str();
  s->add_option("--n", synth.n, "Point count")->capture_default_str();
  s->add_option("--noise", synth.noise, "Positional jitter std (scene units)")->capture_default_str();
  s->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
  s->add_option("--spacing", synth.spacing, "Lattice spacing (scene units)")->capture_default_str();
  s->add_option("--rows", synth.rows, "Lattice rows along y (0 = sqrt(n))");
  s->add_option("--boundary", synth.boundary, "two-plane class boundary x");
  s->add_option("--cell", synth.cell, "checkerboard cell size in lattice steps");
  s->add_option("-o,--output", synth.output, "Output cloud file")->required();

  AmbiguityArgs amb;
  auto* am = app.add_subcommand("ambiguity", "Export per-point ambiguity and margins");
  am->add_option("cloud,--cloud", amb.cloud, "Input cloud file")->required();
  am->add_option("--k", amb.k, "Neighborhood size K")->capture_default_str();
  am->add_option("--beta", amb.beta, "Inverse sigmoid slope")->capture_default_str();
  am->add_option("--margin", amb.margin, "Margin preset")->capture_default_str();
  am->add_option("--mu", amb.mu, "Override margin scale");
  am->add_option("--nu", amb.nu, "Override margin bias");
  am->add_option("--clamp", amb.clamp, "Floor margins at zero");
  am->add_option("-o,--output", amb.output, "CSV output")->capture_default_str();
  am->add_option("--ply", amb.ply, "Optional grayscale PLY output");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the segmentation model");
  t->add_option("--config", tr.config, "Run configuration file");
  t->add_option("--cloud", tr.cloud, "Training cloud (overrides scene.file)");
  t->add_option("--out", tr.out_dir, "Output directory (overrides output.dir)");
  t->add_option("--set", tr.sets, "Override a config key: section.key=value");
  t->add_option("--epochs", tr.epochs, "Override train.epochs");
  t->add_option("--seed", tr.seed, "Override train.seed");
  t->add_option("--lambda", tr.lambda, "Override train.lambda");
  t->add_option("--margin", tr.margin, "Override margin.preset");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a trained model on a cloud");
  e->add_option("--model", ev.model, "Model file")->required();
  e->add_option("--cloud", ev.cloud, "Cloud file")->required();
  e->add_option("--k", ev.k, "Neighborhood size for the boundary band")->capture_default_str();
  e->add_option("--beta", ev.beta, "Inverse sigmoid slope")->capture_default_str();
  e->add_option("--csv", ev.csv, "Also write the CSV line to this file");

  AblateArgs ab;
  auto* a = app.add_subcommand("ablate", "Margin preset ablation over seeds");
  a->add_option("--cloud", ab.cloud, "Scene file (overrides scene.file)");
  a->add_option("--config", ab.config, "Base run configuration");
  a->add_option("--set", ab.sets, "Override a config key: section.key=value");
  a->add_option("--seeds", ab.seeds, "Comma-separated seeds")->capture_default_str();
  a->add_option("--out", ab.out_dir, "Output directory (overrides output.dir)");

  std::vector<const char*> argv;
  for (const auto& x : args) argv.push_back(x.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (am->parsed()) return cmd_ambiguity(amb, out, err);
    if (t->parsed()) return cmd_train(tr, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (a->parsed()) return cmd_ablate(ab, out);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kUsage;
  } catch (const NumericError& ex) {
    err << "numeric abort: " << ex.what() << "\n";
    return kNumericAbort;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace amc::cli
