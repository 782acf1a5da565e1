#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "amcontrast/ambiguity.hpp"
#include "amcontrast/cli.hpp"
#include "amcontrast/config.hpp"
#include "amcontrast/contrast.hpp"
#include "amcontrast/margin.hpp"
#include "amcontrast/model.hpp"
#include "amcontrast/ply.hpp"

namespace py = pybind11;
using namespace amc;

namespace {

using Settings = std::map<std::string, std::string>;

RunConfig config_from(const Settings& settings) {
  RunConfig cfg;
  for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
  return cfg;
}

PointCloud make_cloud(const Mat& positions, const std::vector<int>& labels, int num_classes,
                      const std::optional<Mat>& features) {
  PointCloud c;
  c.positions = positions;
  c.labels = labels;
  c.num_classes = num_classes;
  c.features = features ? *features : Mat(positions.rows(), 0);
  c.validate();
  return c;
}

std::vector<NeighborPartition> partitions_of(const Mat& positions, const std::vector<int>& labels,
                                             std::size_t k) {
  if (positions.cols() != 3) throw std::invalid_argument("positions must be n x 3");
  if (static_cast<std::size_t>(positions.rows()) != labels.size())
    throw std::invalid_argument("one label per point required");
  return partition_all(NeighborIndex(positions), labels, k);
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["oa"] = m.oa;
  d["macc"] = m.macc;
  d["miou"] = m.miou;
  d["boundary_band_acc"] = m.boundary_band_acc;
  d["band_points"] = m.band_points;
  d["confusion"] = m.confusion;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ambiguity estimation, adaptive margins and margin-shifted contrastive loss";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<PointCloud>(m, "PointCloud")
      .def(py::init(&make_cloud), py::arg("positions"), py::arg("labels"), py::arg("num_classes"),
           py::arg("features") = py::none())
      .def_readwrite("positions", &PointCloud::positions)
      .def_readwrite("features", &PointCloud::features)
      .def_readwrite("labels", &PointCloud::labels)
      .def_readwrite("num_classes", &PointCloud::num_classes)
      .def("__len__", &PointCloud::size)
      .def("__eq__", [](const PointCloud& a, const PointCloud& b) { return a == b; })
      .def("validate", &PointCloud::validate)
      .def("save", [](const PointCloud& c, const std::filesystem::path& p) { save_ascii(c, p); })
      .def_static("load", &load_ascii)
      .def("to_text", [](const PointCloud& c) {
        std::ostringstream out;
        write_ascii(c, out);
        return out.str();
      });

  m.def(
      "generate_scene",
      [](const std::string& kind, std::size_t n, double noise, std::uint64_t seed, double spacing,
         std::size_t rows) {
        SceneSpec spec;
        spec.kind = parse_scene_kind(kind);
        spec.n = n;
        spec.noise = noise;
        spec.seed = seed;
        spec.spacing = spacing;
        spec.rows = rows;
        return generate_scene(spec);
      },
      py::arg("kind") = "two-plane", py::arg("n") = 2048, py::arg("noise") = 0.0,
      py::arg("seed") = 0, py::arg("spacing") = 0.05, py::arg("rows") = 0);

  m.def("fps", &fps_order, py::arg("positions"), py::arg("target"), py::arg("start") = 0,
        "Farthest-point sampling selection order");

  m.def(
      "knn",
      [](const Mat& positions, std::size_t anchor, std::size_t k) {
        std::vector<std::pair<std::size_t, double>> out;
        for (const auto& nb : NeighborIndex(positions).knn(anchor, k))
          out.emplace_back(nb.index, nb.sq_dist);
        return out;
      },
      py::arg("positions"), py::arg("anchor"), py::arg("k"),
      "(index, squared distance) pairs, anchor first");

  m.def("inverse_sigmoid", &inverse_sigmoid, py::arg("cc_plus"), py::arg("cc_minus"),
        py::arg("beta") = 0.04);
  m.def("closeness", &closeness, py::arg("count"), py::arg("dist_sum"),
        py::arg("epsilon") = 1e-12);
  m.def(
      "ambiguity",
      [](const Mat& positions, const std::vector<int>& labels, std::size_t k, double beta) {
        AmbiguityConfig cfg;
        cfg.k = k;
        cfg.beta = beta;
        cfg.validate();
        if (k > labels.size()) throw std::invalid_argument("k exceeds the point count");
        return ambiguity_map(partitions_of(positions, labels, k), cfg).values;
      },
      py::arg("positions"), py::arg("labels"), py::arg("k") = 24, py::arg("beta") = 0.04,
      "Per-point ambiguity in [0, 1]");

  m.def(
      "preset",
      [](const std::string& name) {
        const MarginSpec s = preset(name);
        return py::make_tuple(s.mu, s.nu, s.clamp_at_zero);
      },
      py::arg("name"), "(mu, nu, clamp) of a named margin preset");
  m.def("ablation_presets", [] {
    std::vector<std::string> names;
    for (auto p : kAblationPresets) names.emplace_back(to_string(p));
    return names;
  });
  m.def(
      "margins",
      [](const std::vector<double>& a, double mu, double nu, bool clamp) {
        return margins(a, MarginSpec{mu, nu, clamp});
      },
      py::arg("ambiguity"), py::arg("mu") = -1.0, py::arg("nu") = 0.5, py::arg("clamp") = false);
  m.def("regime", [](double v) { return std::string(to_string(regime(v))); }, py::arg("m"));

  m.def("cosine_sim",
        [](const std::vector<double>& u, const std::vector<double>& v, double eps) {
          return cosine_sim(u, v, eps);
        },
        py::arg("u"), py::arg("v"), py::arg("eps") = 1e-8);
  m.def("margin_contrastive_loss",
        [](const std::vector<double>& intra, const std::vector<double>& inter, double mm,
           double tau) { return margin_contrastive_loss(intra, inter, mm, tau); },
        py::arg("sims_intra"), py::arg("sims_inter"), py::arg("m"), py::arg("tau") = 0.3);
  m.def("supervised_contrastive_loss",
        [](const std::vector<double>& intra, const std::vector<double>& inter, double tau) {
          return supervised_contrastive_loss(intra, inter, tau);
        },
        py::arg("sims_intra"), py::arg("sims_inter"), py::arg("tau") = 0.3);
  m.def(
      "layer_loss",
      [](const Mat& features, const Mat& positions, const std::vector<int>& labels,
         const std::vector<double>& margins, std::size_t k, double tau) {
        ContrastConfig cfg;
        cfg.tau = tau;
        const auto lg = layer_loss_grad(features, partitions_of(positions, labels, k), margins, cfg);
        return py::make_tuple(lg.loss, lg.grad);
      },
      py::arg("features"), py::arg("positions"), py::arg("labels"), py::arg("margins"),
      py::arg("k") = 24, py::arg("tau") = 0.3,
      "(loss, gradient w.r.t. features) over the kNN partitions of the positions");

  py::class_<Params>(m, "Model")
      .def_property_readonly("in_dim", [](const Params& p) { return p.in_dim; })
      .def_property_readonly("num_classes", [](const Params& p) { return p.num_classes; })
      .def_property_readonly("parameter_count", &Params::count)
      .def_readonly("tensors", &Params::tensors)
      .def("save", [](const Params& p, const std::filesystem::path& path) { save_params(p, path); })
      .def_static("load", &load_params)
      .def("predict", [](const Params& p, const PointCloud& c) { return predict(p, c); })
      .def("logits", [](const Params& p, const PointCloud& c) {
        return forward(build_geometry(c, p.net), p).logits;
      });

  m.def(
      "train",
      [](const PointCloud& cloud, const Settings& settings) {
        const RunConfig cfg = config_from(settings);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(cloud, cfg.net, cfg.train);
        }
        std::vector<py::dict> log;
        for (const auto& e : r.log) {
          py::dict d;
          d["epoch"] = e.epoch;
          d["l_ce"] = e.l_ce;
          d["l_am_sum"] = e.l_am_sum;
          d["l_joint"] = e.l_joint;
          d["oa"] = e.oa;
          log.push_back(d);
        }
        return py::make_tuple(std::move(r.params), log);
      },
      py::arg("cloud"), py::arg("settings") = Settings{},
      "Train on a cloud; settings are config keys such as {'train.epochs': '20'}. "
      "Returns (model, per-epoch log).");

  m.def(
      "evaluate",
      [](const Params& p, const PointCloud& c, std::size_t k, double beta) {
        AmbiguityConfig cfg;
        cfg.k = std::min(k, c.size());
        cfg.beta = beta;
        const auto amb = ambiguity_map(c, NeighborIndex(c.positions), cfg);
        return metrics_dict(evaluate(p, c, amb.values));
      },
      py::arg("model"), py::arg("cloud"), py::arg("k") = 24, py::arg("beta") = 0.04);
  m.def("compute_metrics",
        [](const std::vector<int>& truth, const std::vector<int>& pred, int classes,
           const std::vector<double>& amb) {
          return metrics_dict(compute_metrics(truth, pred, classes, amb));
        },
        py::arg("truth"), py::arg("pred"), py::arg("num_classes"),
        py::arg("ambiguity") = std::vector<double>{});

  m.def("config_text", [](const Settings& s) { return dump_run_config(config_from(s)); },
        py::arg("settings") = Settings{});
  m.def("ambiguity_gray", &ambiguity_gray, py::arg("a"));

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "amcontrast");
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line invocation in-process; returns (code, stdout, stderr).");
}
