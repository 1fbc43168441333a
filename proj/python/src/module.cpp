#include "phaselab/datagen.hpp"
#include "phaselab/experiments.hpp"
#include "phaselab/geometry.hpp"
#include "phaselab/landscape.hpp"
#include "phaselab/phases.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace phaselab;

namespace {

// Configs cross the boundary as JSON text; the Python side serializes dicts.
json parse_config(const std::string& text) {
  try {
    return text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

CommandOptions make_options(const std::string& out, std::optional<std::uint64_t> seed, std::optional<int> runs,
                            int threads) {
  CommandOptions o;
  o.out = out;
  o.seed = seed;
  o.runs = runs;
  o.threads = threads;
  return o;
}

Objective make_objective(const std::vector<int>& classes, const std::string& reduction) {
  Objective obj;
  obj.classes = classes;
  if (reduction == "mean") {
    obj.reduction = Objective::Reduction::kMean;
  } else if (reduction == "sum") {
    obj.reduction = Objective::Reduction::kSum;
  } else {
    throw ConfigError("reduction must be 'mean' or 'sum'");
  }
  return obj;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-layer ReLU hinge-loss training, geometric-condition checks and experiment drivers.";

  auto base = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());

  py::class_<OutputMap>(m, "OutputMap")
      .def(py::init<Matrix>(), py::arg("entries"))
      .def_property_readonly("entries", &OutputMap::entries)
      .def_property_readonly("classes", &OutputMap::classes)
      .def_property_readonly("neurons", &OutputMap::neurons)
      .def_property_readonly("magnitude", &OutputMap::magnitude)
      .def("owner", &OutputMap::owner, py::arg("neuron"))
      .def("owned_by", &OutputMap::owned_by, py::arg("cls"));
  m.def("build_output_map", &build_output_map, py::arg("classes"), py::arg("neurons"), py::arg("v"));

  py::class_<NetworkParams>(m, "NetworkParams")
      .def_readwrite("w", &NetworkParams::w)
      .def_readwrite("b", &NetworkParams::b)
      .def_readonly("v", &NetworkParams::v)
      .def_property_readonly("bias", [](const NetworkParams& p) { return p.mode == BiasMode::kBias; });
  m.def("make_params", &make_params, py::arg("w"), py::arg("v"), py::arg("bias_total") = 0.0);

  m.def(
      "forward", [](const NetworkParams& p, const Vector& x) {
        auto out = forward(p, x);
        return py::make_tuple(out.f, out.h);
      },
      py::arg("params"), py::arg("x"), "Returns (f, h): class scores and hidden activations.");
  m.def("predict", &predict, py::arg("params"), py::arg("x"));
  m.def("forward_binary", &forward_binary, py::arg("params"), py::arg("x"));

  py::class_<LabeledDataset>(m, "LabeledDataset")
      .def(py::init<Matrix, std::vector<int>, int>(), py::arg("x"), py::arg("labels"), py::arg("classes"))
      .def_property_readonly("x", &LabeledDataset::inputs)
      .def_property_readonly("labels", &LabeledDataset::labels)
      .def_property_readonly("classes", &LabeledDataset::classes)
      .def("__len__", &LabeledDataset::size)
      .def("only_class", &LabeledDataset::only_class, py::arg("cls"));

  m.def("sample_loss", &sample_loss, py::arg("params"), py::arg("x"), py::arg("label"));
  m.def("class_loss", &class_loss, py::arg("params"), py::arg("data"), py::arg("cls"));
  m.def("dataset_loss", &dataset_loss, py::arg("params"), py::arg("data"));
  m.def("subgradient", &subgradient, py::arg("params"), py::arg("data"));

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_readonly("t", &TrajectoryRecord::t)
      .def_readonly("loss", &TrajectoryRecord::loss_total)
      .def_readonly("loss_per_class", &TrajectoryRecord::loss_per_class)
      .def_readonly("neuron_norms", &TrajectoryRecord::neuron_norms)
      .def_readonly("weight_norm", &TrajectoryRecord::weight_norm)
      .def_readonly("grad_norm", &TrajectoryRecord::grad_norm)
      .def_readonly("weights", &TrajectoryRecord::weights);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("params", &TrainResult::params)
      .def_readonly("trajectory", &TrainResult::trajectory)
      .def_readonly("iterations", &TrainResult::iterations)
      .def_readonly("max_weight_norm", &TrainResult::max_weight_norm)
      .def_property_readonly("stop_reason", [](const TrainResult& r) { return to_string(r.stop_reason); })
      .def_property_readonly("converged", [](const TrainResult& r) { return r.stop_reason == StopReason::kConverged; });

  m.def(
      "train",
      [](const NetworkParams& params, const LabeledDataset& data, double eta, int max_iters,
         const std::vector<int>& classes, const std::string& reduction, bool keep_snapshots, int record_every) {
        TrainConfig cfg;
        cfg.eta = eta;
        cfg.max_iters = max_iters;
        cfg.objective = make_objective(classes, reduction);
        cfg.keep_snapshots = keep_snapshots;
        cfg.record_every = record_every;
        py::gil_scoped_release release;
        return train(params, data, cfg);
      },
      py::arg("params"), py::arg("data"), py::arg("eta") = 0.1, py::arg("max_iters") = 5000,
      py::arg("classes") = std::vector<int>{}, py::arg("reduction") = "mean", py::arg("keep_snapshots") = false,
      py::arg("record_every") = 1);

  py::class_<GcCertificate>(m, "GcCertificate")
      .def_property_readonly("verdict", [](const GcCertificate& c) { return to_string(c.verdict); })
      .def_readonly("hull_coeffs", &GcCertificate::hull_coeffs)
      .def_readonly("separator", &GcCertificate::separator)
      .def_readonly("margin", &GcCertificate::margin);
  m.def(
      "gc_check",
      [](const Matrix& directions, bool planar) {
        const DirectionSet dirs = direction_set_from(directions);
        return planar ? gc_check_2d(dirs) : gc_check(dirs);
      },
      py::arg("directions"), py::arg("planar") = false,
      "Tests whether 0 is interior to the hull of the normalized columns.");
  m.def(
      "verify_certificate",
      [](const Matrix& directions, const GcCertificate& cert) {
        return verify_certificate(direction_set_from(directions), cert);
      },
      py::arg("directions"), py::arg("certificate"));
  m.def("gc_probability", &gc_probability, py::arg("d"), py::arg("k"));
  m.def(
      "gc_probability_mc",
      [](int d, int k, std::uint64_t trials, std::uint64_t seed, int threads) {
        py::gil_scoped_release release;
        const auto est = gc_probability_mc(d, k, trials, seed, threads);
        return std::make_pair(est.estimate, est.std_error);
      },
      py::arg("d"), py::arg("k"), py::arg("trials"), py::arg("seed") = 0, py::arg("threads") = 1,
      "Returns (estimate, standard error).");

  m.def(
      "grid_dataset",
      [](double theta, double noise_std, std::uint64_t seed) {
        Rng rng(seed);
        return grid_dataset(make_subspace_pair(theta), GridSpec::standard(noise_std), &rng);
      },
      py::arg("theta"), py::arg("noise_std") = 0.0, py::arg("seed") = 0);
  m.def("grid_dataset_planar", [] { return grid_dataset_planar(GridSpec::standard()); });
  m.def(
      "subspace_bases",
      [](double theta) {
        const auto pair = make_subspace_pair(theta);
        return std::make_pair(pair.basis(0), pair.basis(1));
      },
      py::arg("theta"));
  m.def(
      "sample_annulus",
      [](const Matrix& basis, double m_in, double m_out, int count, int label, int classes, std::uint64_t seed) {
        Rng rng(seed);
        return sample_annulus({basis, m_in, m_out}, count, label, classes, rng);
      },
      py::arg("basis"), py::arg("m"), py::arg("M"), py::arg("count"), py::arg("label"), py::arg("classes"),
      py::arg("seed") = 0);
  m.def(
      "init_random", [](int d, int k, std::uint64_t seed) {
        Rng rng(seed);
        return init_random(d, k, rng);
      },
      py::arg("d"), py::arg("k"), py::arg("seed"));
  m.def(
      "init_halfspace", [](int d, int k, std::uint64_t seed) {
        Rng rng(seed);
        return init_halfspace(d, k, rng);
      },
      py::arg("d"), py::arg("k"), py::arg("seed"));
  m.def("kelvin", &kelvin, py::arg("x"));

  m.def(
      "detect_phases",
      [](const TrainResult& result, int cls) {
        const PhaseReport rep = detect_phases(result.trajectory, result.params.v, cls);
        return to_json(rep).dump();
      },
      py::arg("result"), py::arg("cls"), "Phase report as JSON text (needs keep_snapshots=True).");

  m.def(
      "bounds",
      [](double v, double eta, double R, double M, double m_in, double p_min, double p_max, int d, int n) {
        BoundInputs in{v, eta, R, M, m_in, p_min, p_max, d, n};
        py::dict out;
        out["cp"] = cp_upper_bound(in);
        out["p_r"] = p_r_lower_bound(in);
        out["t1"] = t1_bound(in);
        out["phase2_sum"] = phase2_sum_bound(in);
        return out;
      },
      py::arg("v"), py::arg("eta"), py::arg("R"), py::arg("M"), py::arg("m"), py::arg("p_min"), py::arg("p_max"),
      py::arg("d"), py::arg("n"));

  m.def("regular_simplex", &regular_simplex, py::arg("dim"));
  m.def(
      "construct_zero_loss",
      [](const OutputMap& v, const std::vector<Matrix>& bases, const std::vector<double>& m_in,
         const std::vector<double>& m_out, const Vector& b) {
        if (bases.size() != m_in.size() || bases.size() != m_out.size()) {
          throw ConfigError("bases, m and M need one entry per class");
        }
        std::vector<ClassRegion> regions;
        for (std::size_t i = 0; i < bases.size(); ++i) regions.push_back({bases[i], m_in[i], m_out[i]});
        return construct_zero_loss(v, regions, b);
      },
      py::arg("v"), py::arg("bases"), py::arg("m"), py::arg("M"), py::arg("b"));
  m.def(
      "critical_point_audit",
      [](const NetworkParams& params, const LabeledDataset& data, const std::vector<int>& classes,
         const std::string& reduction) {
        return to_json(critical_point_audit(params, data, make_objective(classes, reduction))).dump();
      },
      py::arg("params"), py::arg("data"), py::arg("classes") = std::vector<int>{}, py::arg("reduction") = "mean",
      "Audit as JSON text.");

  // Experiment commands: config as JSON text, results as files in `out`.
  auto command = [&m](const char* name, auto fn) {
    m.def(
        name,
        [fn](const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
             std::optional<int> runs, int threads) {
          const json cfg = parse_config(config);
          py::gil_scoped_release release;
          fn(cfg, make_options(out, seed, runs, threads));
        },
        py::arg("config"), py::arg("out"), py::arg("seed") = py::none(), py::arg("runs") = py::none(),
        py::arg("threads") = 1);
  };
  command("_cmd_train", [](const json& c, const CommandOptions& o) { cmd_train(c, o); });
  command("_cmd_sweep_angle", [](const json& c, const CommandOptions& o) { cmd_sweep_angle(c, o); });
  command("_cmd_sweep_width", [](const json& c, const CommandOptions& o) { cmd_sweep_width(c, o); });
  command("_cmd_norm_hist", [](const json& c, const CommandOptions& o) { cmd_norm_hist(c, o); });
  command("_cmd_gc_prob", [](const json& c, const CommandOptions& o) { cmd_gc_prob(c, o); });
  command("_cmd_trace_dynamics", [](const json& c, const CommandOptions& o) { cmd_trace_dynamics(c, o); });
  command("_cmd_landscape_audit", [](const json& c, const CommandOptions& o) { cmd_landscape_audit(c, o); });
  m.def(
      "validate_output_dir", [](const std::string& dir) { return validate_output_dir(dir); }, py::arg("dir"),
      "Problems found in an output directory (empty when it conforms).");
}
