#include "phaselab/experiments.hpp"

#include "phaselab/parallel.hpp"
#include "phaselab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

namespace phaselab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json optional_json(const std::optional<int>& v) { return v ? json(*v) : json(nullptr); }

std::string optional_field(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }
std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

void prepare_dir(const fs::path& dir) { fs::create_directories(dir); }

std::uint64_t seed_or(const CommandOptions& options, std::uint64_t configured) {
  return options.seed ? *options.seed : configured;
}

int runs_or(const CommandOptions& options, int configured) { return options.runs ? *options.runs : configured; }

}  // namespace

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kGridPlanar: return "grid-planar";
    case TaskKind::kGrid: return "grid";
    case TaskKind::kAnnulus: return "annulus";
  }
  return "unknown";
}

std::string to_string(InitKind kind) { return kind == InitKind::kRandom ? "random" : "halfspace"; }

InitKind parse_init(const std::string& name) {
  if (name == "random") return InitKind::kRandom;
  if (name == "halfspace") return InitKind::kHalfspace;
  throw ConfigError("unknown init '" + name + "' (expected random or halfspace)");
}

TaskConfig TaskConfig::from_json(ConfigReader& r) {
  TaskConfig c;
  const std::string kind = r.string("kind", "grid-planar");
  if (kind == "grid-planar") {
    c.kind = TaskKind::kGridPlanar;
  } else if (kind == "grid") {
    c.kind = TaskKind::kGrid;
  } else if (kind == "annulus") {
    c.kind = TaskKind::kAnnulus;
  } else {
    throw ConfigError("task.kind: unknown task '" + kind + "'");
  }
  c.width = r.integer("width", c.width);
  c.init = parse_init(r.string("init", "random"));
  c.bias_total = r.number("bias_total", c.bias_total);
  c.data_seed = r.u64("data_seed", c.data_seed);
  c.theta = r.number("theta", c.theta);
  c.noise_std = r.number("noise_std", c.noise_std);
  c.classes = r.integer("classes", c.classes);
  c.dim_per_class = r.integer("dim_per_class", c.dim_per_class);
  c.m = r.number("m", c.m);
  c.M = r.number("M", c.M);
  c.samples_per_class = r.integer("samples_per_class", c.samples_per_class);
  c.v = r.number("v", c.v);
  if (r.has("p_min")) c.p_min = r.number("p_min", 0.0);
  if (r.has("p_max")) c.p_max = r.number("p_max", 0.0);
  r.finish();
  c.validate();
  return c;
}

json TaskConfig::to_json() const {
  json j = {{"kind", to_string(kind)}, {"width", width}, {"init", to_string(init)},
            {"bias_total", bias_total}, {"data_seed", data_seed}};
  if (kind == TaskKind::kGrid) {
    j["theta"] = theta;
    j["noise_std"] = noise_std;
  }
  if (kind == TaskKind::kAnnulus) {
    j["classes"] = classes;
    j["dim_per_class"] = dim_per_class;
    j["m"] = m;
    j["M"] = M;
    j["samples_per_class"] = samples_per_class;
    j["v"] = v;
  }
  if (p_min) j["p_min"] = *p_min;
  if (p_max) j["p_max"] = *p_max;
  return j;
}

void TaskConfig::validate() const {
  if (width < 1) throw ConfigError("task.width must be >= 1");
  if (bias_total < 0.0 || bias_total >= 1.0) throw ConfigError("task.bias_total must lie in [0, 1)");
  if (noise_std < 0.0) throw ConfigError("task.noise_std must be >= 0");
  if (kind == TaskKind::kGridPlanar && noise_std != 0.0) {
    throw ConfigError("task.noise_std applies to the grid task in R^4 only");
  }
  if (kind == TaskKind::kAnnulus) {
    if (classes < 1 || dim_per_class < 1) throw ConfigError("annulus needs classes >= 1 and dim_per_class >= 1");
    if (!(m > 0.0 && m < M)) throw ConfigError("annulus needs 0 < m < M");
    if (samples_per_class < 1) throw ConfigError("annulus needs samples_per_class >= 1");
    if (!(v > 0.0)) throw ConfigError("annulus needs v > 0");
  }
  if ((p_min.has_value()) != (p_max.has_value())) throw ConfigError("give both p_min and p_max or neither");
}

TaskInstance build_task(const TaskConfig& cfg) {
  cfg.validate();
  TaskInstance t;
  switch (cfg.kind) {
    case TaskKind::kGridPlanar: {
      t.data = grid_dataset_planar(GridSpec::standard());
      t.v = build_output_map(2, cfg.width, 0.5);
      t.objective.classes = {0};
      t.phase_classes = {0};
      t.bases = {Matrix(), Matrix()};
      t.dim = 2;
      t.subspace_dim = 2;
      break;
    }
    case TaskKind::kGrid: {
      const SubspacePair pair = make_subspace_pair(cfg.theta);
      Rng noise(cfg.data_seed);
      t.data = grid_dataset(pair, GridSpec::standard(cfg.noise_std), &noise);
      t.v = build_output_map(2, cfg.width, 0.5);
      t.objective.reduction = Objective::Reduction::kSum;
      t.phase_classes = {0, 1};
      t.bases = {pair.basis(0), pair.basis(1)};
      t.dim = 4;
      t.subspace_dim = 2;
      break;
    }
    case TaskKind::kAnnulus: {
      t.bases = block_bases(cfg.classes, cfg.dim_per_class);
      for (int c = 0; c < cfg.classes; ++c) {
        AnnulusDistribution dist{t.bases[static_cast<std::size_t>(c)], cfg.m, cfg.M};
        Rng rng(derive_seed(cfg.data_seed, static_cast<std::uint64_t>(c)));
        auto part = sample_annulus(dist, cfg.samples_per_class, c, cfg.classes, rng);
        t.data = c == 0 ? part : LabeledDataset::concat(t.data, part);
        if (c == 0) {
          t.p_min = t.p_max = dist.density();
        }
      }
      t.v = build_output_map(cfg.classes, cfg.width, cfg.v);
      for (int c = 0; c < cfg.classes; ++c) t.phase_classes.push_back(c);
      t.dim = cfg.classes * cfg.dim_per_class;
      t.subspace_dim = cfg.dim_per_class;
      break;
    }
  }
  if (cfg.p_min) {
    t.p_min = cfg.p_min;
    t.p_max = cfg.p_max;
  }
  if (cfg.kind == TaskKind::kAnnulus) {
    t.data_m = cfg.m;
    t.data_M = cfg.M;
  } else {
    t.data_m = std::numeric_limits<double>::infinity();
    for (int c : t.phase_classes) {
      for (int s : t.data.class_indices(c)) {
        const double r = t.data.input(s).norm();
        t.data_m = std::min(t.data_m, r);
        t.data_M = std::max(t.data_M, r);
      }
    }
  }
  return t;
}

Matrix initial_weights(const TaskConfig& cfg, const TaskInstance& task, std::uint64_t seed) {
  Rng rng(seed);
  return cfg.init == InitKind::kRandom ? init_random(task.dim, cfg.width, rng)
                                       : init_halfspace(task.dim, cfg.width, rng);
}

TrainSettings TrainSettings::from_json(ConfigReader& r) {
  TrainSettings s;
  s.eta = r.number("eta", s.eta);
  s.max_iters = r.integer("max_iters", s.max_iters);
  s.record_every = r.integer("record_every", s.record_every);
  s.r_max = r.number("r_max", s.r_max);
  r.finish();
  // The library accepts eta = 0 (a frozen run); experiments need a real step.
  if (!(s.eta > 0.0)) throw ConfigError("train.eta must be positive");
  s.to_config({}, 0).validate();
  return s;
}

json TrainSettings::to_json() const {
  return {{"eta", eta}, {"max_iters", max_iters}, {"record_every", record_every}, {"r_max", r_max}};
}

TrainConfig TrainSettings::to_config(const Objective& objective, std::uint64_t seed) const {
  TrainConfig c;
  c.eta = eta;
  c.max_iters = max_iters;
  c.record_every = record_every;
  c.r_max = r_max;
  c.seed = seed;
  c.objective = objective;
  return c;
}

RunOutcome run_once(const TaskConfig& cfg, const TaskInstance& task, const TrainSettings& train_settings,
                    std::uint64_t seed, bool keep_result, std::optional<Matrix> w0) {
  const Matrix w = w0 ? std::move(*w0) : initial_weights(cfg, task, seed);
  NetworkParams params = make_params(w, task.v, cfg.bias_total);
  TrainConfig tc = train_settings.to_config(task.objective, seed);
  tc.keep_snapshots = true;
  TrainResult res = train(std::move(params), task.data, tc);

  RunOutcome out;
  out.seed = seed;
  out.iterations = res.iterations;
  out.stop_reason = res.stop_reason;
  out.converged = res.stop_reason == StopReason::kConverged;
  out.final_loss = res.trajectory.back().loss_total;
  out.final_grad_norm = res.final_grad_norm;
  out.max_weight_norm = res.max_weight_norm;

  for (int c : task.phase_classes) {
    const Matrix& basis = task.bases[static_cast<std::size_t>(c)];
    const Matrix* bp = basis.size() > 0 ? &basis : nullptr;
    PhaseReport rep = detect_phases(res.trajectory, task.v, c, bp);
    annotate_trajectory(res.trajectory, rep);
    if (cfg.bias_total == 0.0) {
      MonotonicityOptions mo;
      mo.basis = bp;
      out.owner_violations += static_cast<int>(monotonicity_audit(res.trajectory, task.v, c, mo).owner.size());
    }
    out.phases.push_back(std::move(rep));
  }
  if (cfg.bias_total != 0.0) out.owner_violations = -1;
  out.audit = critical_point_audit(res.params, task.data, task.objective);

  if (task.p_min && task.p_max) {
    for (const auto& rep : out.phases) {
      BoundReport b;
      b.cls = rep.cls;
      BoundInputs in;
      in.v = task.v.magnitude();
      in.eta = train_settings.eta;
      in.R = out.max_weight_norm;
      in.M = task.data_M;
      in.m = task.data_m;
      in.p_min = *task.p_min;
      in.p_max = *task.p_max;
      in.d = task.subspace_dim;
      in.n = task.v.classes();
      try {
        b.t1_bound = t1_bound(in);
      } catch (const ConfigError& e) {
        b.note = e.what();
      }
      b.phase2_sum_bound = phase2_sum_bound(in);
      b.t1_dominates = !b.t1_bound || rep.t1_size <= *b.t1_bound;
      b.phase2_dominates = rep.sum_sq_loss_t2 <= *b.phase2_sum_bound;
      out.bounds.push_back(std::move(b));
    }
  }
  if (keep_result) out.full = std::move(res);
  return out;
}

std::vector<RunOutcome> run_batch(const TaskConfig& cfg, const TaskInstance& task, const TrainSettings& train,
                                  std::uint64_t seed_base, int runs, int threads) {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  std::vector<RunOutcome> out(static_cast<std::size_t>(runs));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    out[r] = run_once(cfg, task, train, seed_base + r);
  });
  return out;
}

CellStats summarize(const std::string& cell, const std::string& init, int width, double theta,
                    const std::vector<RunOutcome>& runs) {
  CellStats s;
  s.cell = cell;
  s.init = init;
  s.width = width;
  s.theta = theta;
  s.runs = static_cast<int>(runs.size());
  std::vector<double> it;
  for (const auto& r : runs) {
    if (r.converged) it.push_back(r.iterations);
  }
  s.converged = static_cast<int>(it.size());
  if (it.empty()) {
    s.mean = s.min = s.q1 = s.median = s.q3 = s.max = kNaN;
    return s;
  }
  std::sort(it.begin(), it.end());
  double sum = 0.0;
  for (double x : it) sum += x;
  s.mean = sum / static_cast<double>(it.size());
  if (it.size() >= 2) {
    double ss = 0.0;
    for (double x : it) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(it.size() - 1));
  }
  auto q = [&it](double p) {
    const double pos = p * static_cast<double>(it.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, it.size() - 1);
    return it[lo] + (pos - static_cast<double>(lo)) * (it[hi] - it[lo]);
  };
  s.min = it.front();
  s.q1 = q(0.25);
  s.median = q(0.5);
  s.q3 = q(0.75);
  s.max = it.back();
  return s;
}

json to_json(const PhaseReport& r) {
  json verdicts = json::array();
  json timeline = json::array();
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    verdicts.push_back(to_string(r.verdicts[i]));
    timeline.push_back(r.gc_timeline[i] ? 1 : 0);
  }
  return {{"class", r.cls + 1},      {"first_hold", optional_json(r.first_hold)},
          {"t1_size", r.t1_size},    {"t2_size", r.t2_size},
          {"persistence", r.persistence}, {"sum_sq_loss_t2", r.sum_sq_loss_t2},
          {"t", r.t},                {"gc_timeline", timeline},
          {"verdicts", verdicts}};
}

json to_json(const LandscapeAudit& a) {
  return {{"grad_norm", a.grad_norm},
          {"loss", a.loss},
          {"nonzero_output_witness", optional_json(a.nonzero_output_witness)},
          {"critical", a.critical},
          {"verdict", to_string(a.verdict)}};
}

json to_json(const RunOutcome& o) {
  json phases = json::array();
  for (const auto& p : o.phases) {
    phases.push_back({{"class", p.cls + 1},
                      {"first_hold", optional_json(p.first_hold)},
                      {"t1_size", p.t1_size},
                      {"t2_size", p.t2_size},
                      {"persistence", p.persistence},
                      {"sum_sq_loss_t2", p.sum_sq_loss_t2}});
  }
  json bounds = json::array();
  for (const auto& b : o.bounds) {
    bounds.push_back({{"class", b.cls + 1},
                      {"t1_bound", optional_json(b.t1_bound)},
                      {"phase2_sum_bound", optional_json(b.phase2_sum_bound)},
                      {"t1_dominates", b.t1_dominates},
                      {"phase2_dominates", b.phase2_dominates},
                      {"note", b.note}});
  }
  return {{"seed", o.seed},
          {"iterations", o.iterations},
          {"converged", o.converged},
          {"stop_reason", to_string(o.stop_reason)},
          {"final_loss", o.final_loss},
          {"final_grad_norm", o.final_grad_norm},
          {"max_weight_norm", o.max_weight_norm},
          {"owner_violations", o.owner_violations},
          {"phases", phases},
          {"audit", to_json(o.audit)},
          {"bounds", bounds}};
}

void write_trajectory_csv(const fs::path& path, const std::vector<TrajectoryRecord>& trajectory, int classes) {
  const int k = trajectory.empty() ? 0 : static_cast<int>(trajectory.front().neuron_norms.size());
  std::vector<std::string> header = {"t", "loss_total"};
  for (int c = 1; c <= classes; ++c) header.push_back("loss_class_" + std::to_string(c));
  header.push_back("weight_norm");
  header.push_back("grad_norm");
  for (int c = 1; c <= classes; ++c) header.push_back("gc_class_" + std::to_string(c));
  for (int j = 1; j <= k; ++j) header.push_back("norm_" + std::to_string(j));
  CsvWriter w(path, header);
  for (const auto& rec : trajectory) {
    w << rec.t << rec.loss_total;
    for (int c = 0; c < classes; ++c) w << (c < rec.loss_per_class.size() ? rec.loss_per_class(c) : kNaN);
    w << rec.weight_norm << rec.grad_norm;
    for (int c = 0; c < classes; ++c) {
      const auto idx = static_cast<std::size_t>(c);
      const int flag = idx < rec.gc_flag_per_class.size() ? rec.gc_flag_per_class[idx] : -1;
      w << (flag < 0 ? std::string() : std::to_string(flag));
    }
    for (int j = 0; j < k; ++j) w << rec.neuron_norms(j);
    w.end_row();
  }
}

namespace {

std::vector<std::string> runs_header() {
  return {"cell",       "run",           "seed",           "init",        "width",          "theta",
          "iterations", "converged",     "stop_reason",    "final_loss",  "final_grad_norm", "max_weight_norm",
          "first_hold", "persistence",   "t1_size",        "t2_size",     "sum_sq_loss_t2",  "owner_violations",
          "audit_verdict"};
}

// Aggregates over phase classes: the latest first hold, the weakest
// persistence, the largest slow set, the smallest fast set, the summed squares.
void write_run_row(CsvWriter& w, const std::string& cell, int run, const std::string& init, int width, double theta,
                   const RunOutcome& o) {
  std::optional<int> first_hold;
  double persistence = 1.0;
  int t1 = 0, t2 = std::numeric_limits<int>::max();
  double sum_sq = 0.0;
  bool all_hold = true;
  for (const auto& p : o.phases) {
    if (!p.first_hold) all_hold = false;
    if (p.first_hold) first_hold = std::max(first_hold.value_or(0), *p.first_hold);
    persistence = std::min(persistence, p.persistence);
    t1 = std::max(t1, p.t1_size);
    t2 = std::min(t2, p.t2_size);
    sum_sq += p.sum_sq_loss_t2;
  }
  if (!all_hold) first_hold.reset();
  if (o.phases.empty()) t2 = 0;
  w << cell << run << static_cast<unsigned long long>(o.seed) << init << width << theta << o.iterations
    << (o.converged ? 1 : 0) << to_string(o.stop_reason) << o.final_loss << o.final_grad_norm << o.max_weight_norm
    << optional_field(first_hold) << persistence << t1 << t2 << sum_sq << o.owner_violations
    << to_string(o.audit.verdict);
  w.end_row();
}

std::vector<std::string> summary_header() {
  return {"cell", "init", "width", "theta", "runs", "converged", "mean", "std", "min", "q1", "median", "q3", "max"};
}

void write_summary_row(CsvWriter& w, const CellStats& s) {
  w << s.cell << s.init << s.width << s.theta << s.runs << s.converged << s.mean << optional_field(s.std) << s.min
    << s.q1 << s.median << s.q3 << s.max;
  w.end_row();
}

json to_json(const CellStats& s) {
  return {{"cell", s.cell},   {"init", s.init},         {"width", s.width},   {"theta", s.theta},
          {"runs", s.runs},   {"converged", s.converged}, {"mean", s.mean},   {"std", optional_json(s.std)},
          {"min", s.min},     {"q1", s.q1},             {"median", s.median}, {"q3", s.q3},
          {"max", s.max}};
}

void finish_config(ConfigReader& r) { r.finish(); }

}  // namespace

TrainCommandResult cmd_train(const json& config, const CommandOptions& options) {
  ConfigReader r(config, "config");
  ConfigReader task_r = r.child("task");
  const TaskConfig task_cfg = TaskConfig::from_json(task_r);
  ConfigReader train_r = r.child("train");
  const TrainSettings ts = TrainSettings::from_json(train_r);
  const std::uint64_t seed = seed_or(options, r.u64("seed", 0));
  const bool export_dataset = r.boolean("export_dataset", false);
  finish_config(r);

  prepare_dir(options.out);
  Manifest manifest(options.out);
  write_json(options.out / "config.json", {{"command", "train"},
                                           {"task", task_cfg.to_json()},
                                           {"train", ts.to_json()},
                                           {"seed", seed},
                                           {"export_dataset", export_dataset}});
  manifest.add("config.json", "json");

  const TaskInstance task = build_task(task_cfg);
  if (export_dataset) {
    write_dataset_csv(options.out / "dataset.csv", task.data);
    manifest.add("dataset.csv", "dataset");
  }
  TrainCommandResult result;
  result.outcome = run_once(task_cfg, task, ts, seed, true);
  const TrainResult& tr = *result.outcome.full;
  if (!tr.activation_precondition) {
    std::cerr << "warning: no objective sample activates an owner neuron at t=0\n";
  }

  write_trajectory_csv(options.out / "trajectory.csv", tr.trajectory, task.v.classes());
  manifest.add("trajectory.csv", "trajectory");

  json records = json::array();
  for (const auto& rec : tr.trajectory) {
    records.push_back({{"t", rec.t},
                       {"loss_total", rec.loss_total},
                       {"weight_norm", rec.weight_norm},
                       {"grad_norm", rec.grad_norm}});
  }
  json final_w = json::array();
  for (int j = 0; j < tr.params.w.cols(); ++j) {
    std::vector<double> col(tr.params.w.col(j).data(), tr.params.w.col(j).data() + tr.params.w.rows());
    final_w.push_back(col);
  }
  result.report = to_json(result.outcome);
  result.report["activation_precondition"] = tr.activation_precondition;
  result.report["exceeded_r_max"] = tr.exceeded_r_max;
  json traj = result.report;
  traj["final_weights_columns"] = final_w;
  traj["records"] = records;
  write_json(options.out / "trajectory.json", traj);
  manifest.add("trajectory.json", "json");

  json phases = json::array();
  for (const auto& p : result.outcome.phases) phases.push_back(to_json(p));
  write_json(options.out / "phase_report.json", {{"classes", phases}, {"bounds", result.report["bounds"]}});
  manifest.add("phase_report.json", "json");
  write_json(options.out / "landscape_audit.json", to_json(result.outcome.audit));
  manifest.add("landscape_audit.json", "json");
  manifest.write();
  return result;
}

SweepResult cmd_sweep_angle(const json& config, const CommandOptions& options) {
  ConfigReader r(config, "config");
  const std::vector<double> thetas =
      r.numbers("thetas", {std::numbers::pi / 6, std::numbers::pi / 4, std::numbers::pi / 3, std::numbers::pi / 2});
  const int runs = runs_or(options, r.integer("runs", 20));
  const std::uint64_t seed_base = seed_or(options, r.u64("seed_base", 0));
  json task_json = r.has("task") ? r.raw("task") : json::object();
  if (!task_json.contains("kind")) task_json["kind"] = "grid";
  ConfigReader task_r(task_json, "config.task");
  TaskConfig base = TaskConfig::from_json(task_r);
  if (base.kind != TaskKind::kGrid) throw ConfigError("sweep-angle runs the grid task in R^4");
  ConfigReader train_r = r.child("train");
  const TrainSettings ts = TrainSettings::from_json(train_r);
  finish_config(r);
  if (thetas.empty()) throw ConfigError("thetas must not be empty");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  for (double th : thetas) (void)make_subspace_pair(th);

  prepare_dir(options.out);
  Manifest manifest(options.out);
  write_json(options.out / "config.json", {{"command", "sweep-angle"},
                                           {"thetas", thetas},
                                           {"runs", runs},
                                           {"seed_base", seed_base},
                                           {"task", base.to_json()},
                                           {"train", ts.to_json()}});
  manifest.add("config.json", "json");

  SweepResult out;
  CsvWriter runs_csv(options.out / "runs.csv", runs_header());
  for (double th : thetas) {
    TaskConfig cfg = base;
    cfg.theta = th;
    const TaskInstance task = build_task(cfg);
    auto batch = run_batch(cfg, task, ts, seed_base, runs, options.threads);
    const std::string cell = "theta=" + format_double(th);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      write_run_row(runs_csv, cell, static_cast<int>(i), to_string(cfg.init), cfg.width, th, batch[i]);
    }
    out.cells.push_back(summarize(cell, to_string(cfg.init), cfg.width, th, batch));
    out.runs.push_back(std::move(batch));
  }
  manifest.add("runs.csv", "runs");

  CsvWriter sum(options.out / "summary.csv", summary_header());
  json cells = json::array();
  svg::Series mean{"mean", {}, {}}, median{"median", {}, {}};
  for (const auto& c : out.cells) {
    write_summary_row(sum, c);
    cells.push_back(to_json(c));
    mean.x.push_back(c.theta);
    mean.y.push_back(c.mean);
    median.x.push_back(c.theta);
    median.y.push_back(c.median);
  }
  manifest.add("summary.csv", "summary");
  write_json(options.out / "summary.json", {{"cells", cells}});
  manifest.add("summary.json", "json");
  svg::line_chart("Iterations to convergence vs subspace angle", "theta (rad)", "iterations", {mean, median})
      .save((options.out / "sweep_angle.svg").string());
  manifest.add("sweep_angle.svg", "svg");
  manifest.write();
  return out;
}

SweepResult cmd_sweep_width(const json& config, const CommandOptions& options) {
  ConfigReader r(config, "config");
  const std::vector<int> widths = r.integers("widths", {6, 8, 10, 12, 14, 16, 18, 20, 22, 24});
  const std::vector<std::string> init_names = r.strings("inits", {"random", "halfspace"});
  const int runs = runs_or(options, r.integer("runs", 100));
  const std::uint64_t seed_base = seed_or(options, r.u64("seed_base", 0));
  ConfigReader task_r = r.child("task");
  const TaskConfig base = TaskConfig::from_json(task_r);
  ConfigReader train_r = r.child("train");
  const TrainSettings ts = TrainSettings::from_json(train_r);
  finish_config(r);
  if (widths.empty() || init_names.empty()) throw ConfigError("widths and inits must not be empty");
  if (runs < 1) throw ConfigError("runs must be >= 1");
  std::vector<InitKind> inits;
  for (const auto& n : init_names) inits.push_back(parse_init(n));

  prepare_dir(options.out);
  Manifest manifest(options.out);
  std::vector<std::string> canonical_inits;
  for (auto k : inits) canonical_inits.push_back(to_string(k));
  write_json(options.out / "config.json", {{"command", "sweep-width"},
                                           {"widths", widths},
                                           {"inits", canonical_inits},
                                           {"runs", runs},
                                           {"seed_base", seed_base},
                                           {"task", base.to_json()},
                                           {"train", ts.to_json()}});
  manifest.add("config.json", "json");

  SweepResult out;
  CsvWriter runs_csv(options.out / "runs.csv", runs_header());
  std::vector<std::vector<std::vector<double>>> box(widths.size());
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    for (InitKind init : inits) {
      TaskConfig cfg = base;
      cfg.width = widths[wi];
      cfg.init = init;
      const TaskInstance task = build_task(cfg);
      auto batch = run_batch(cfg, task, ts, seed_base, runs, options.threads);
      const std::string cell = "width=" + std::to_string(cfg.width) + "/" + to_string(init);
      std::vector<double> its;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        write_run_row(runs_csv, cell, static_cast<int>(i), to_string(init), cfg.width, cfg.theta, batch[i]);
        if (batch[i].converged) its.push_back(batch[i].iterations);
      }
      box[wi].push_back(std::move(its));
      out.cells.push_back(summarize(cell, to_string(init), cfg.width, cfg.theta, batch));
      out.runs.push_back(std::move(batch));
    }
  }
  manifest.add("runs.csv", "runs");

  CsvWriter sum(options.out / "summary.csv", summary_header());
  json cells = json::array();
  for (const auto& c : out.cells) {
    write_summary_row(sum, c);
    cells.push_back(to_json(c));
  }
  manifest.add("summary.csv", "summary");

  // Width x init layout with mean and std side by side.
  std::vector<std::string> header = {"width"};
  for (auto k : inits) {
    header.push_back(to_string(k) + "_mean");
    header.push_back(to_string(k) + "_std");
    header.push_back(to_string(k) + "_converged");
  }
  CsvWriter table(options.out / "table.csv", header);
  for (std::size_t wi = 0; wi < widths.size(); ++wi) {
    table << widths[wi];
    for (std::size_t ii = 0; ii < inits.size(); ++ii) {
      const CellStats& c = out.cells[wi * inits.size() + ii];
      table << c.mean << optional_field(c.std) << c.converged;
    }
    table.end_row();
  }
  manifest.add("table.csv", "width_table");
  write_json(options.out / "summary.json", {{"cells", cells}});
  manifest.add("summary.json", "json");

  std::vector<std::string> cats;
  for (int w : widths) cats.push_back(std::to_string(w));
  svg::box_chart("Iterations to convergence vs hidden width", "hidden neurons (2k)", "iterations", cats,
                 canonical_inits, box)
      .save((options.out / "sweep_width.svg").string());
  manifest.add("sweep_width.svg", "svg");
  manifest.write();
  return out;
}

NormHistResult cmd_norm_hist(const json& config, const CommandOptions& options) {
  ConfigReader r(config, "config");
  const int runs = runs_or(options, r.integer("runs", 200));
  const int bins = r.integer("bins", 20);
  const std::uint64_t seed_base = seed_or(options, r.u64("seed_base", 0));
  ConfigReader task_r = r.child("task");
  const TaskConfig cfg = TaskConfig::from_json(task_r);
  ConfigReader train_r = r.child("train");
  const TrainSettings ts = TrainSettings::from_json(train_r);
  finish_config(r);
  if (runs < 1) throw ConfigError("norm-hist needs runs >= 1");
  if (bins < 1) throw ConfigError("norm-hist needs bins >= 1");

  prepare_dir(options.out);
  Manifest manifest(options.out);
  write_json(options.out / "config.json", {{"command", "norm-hist"},
                                           {"runs", runs},
                                           {"bins", bins},
                                           {"seed_base", seed_base},
                                           {"task", cfg.to_json()},
                                           {"train", ts.to_json()}});
  manifest.add("config.json", "json");

  const TaskInstance task = build_task(cfg);
  NormHistResult out;
  out.runs = run_batch(cfg, task, ts, seed_base, runs, options.threads);
  CsvWriter runs_csv(options.out / "runs.csv", runs_header());
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    write_run_row(runs_csv, "norm-hist", static_cast<int>(i), to_string(cfg.init), cfg.width, cfg.theta,
                  out.runs[i]);
    out.max_norms.push_back(out.runs[i].max_weight_norm);
  }
  manifest.add("runs.csv", "runs");

  const auto [lo_it, hi_it] = std::minmax_element(out.max_norms.begin(), out.max_norms.end());
  double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) hi = lo + 1.0;
  out.counts.assign(static_cast<std::size_t>(bins), 0);
  for (int b = 0; b <= bins; ++b) out.edges.push_back(lo + (hi - lo) * b / bins);
  for (double x : out.max_norms) {
    const int b = std::min(bins - 1, static_cast<int>((x - lo) / (hi - lo) * bins));
    ++out.counts[static_cast<std::size_t>(b)];
  }
  CsvWriter hist(options.out / "histogram.csv", {"bin_lo", "bin_hi", "count"});
  for (int b = 0; b < bins; ++b) {
    hist << out.edges[static_cast<std::size_t>(b)] << out.edges[static_cast<std::size_t>(b) + 1]
         << out.counts[static_cast<std::size_t>(b)];
    hist.end_row();
  }
  manifest.add("histogram.csv", "histogram");

  bool finite = true, below = true;
  int converged = 0;
  for (const auto& o : out.runs) {
    finite = finite && std::isfinite(o.max_weight_norm);
    if (o.converged) {
      ++converged;
      below = below && o.max_weight_norm < ts.r_max;
    }
  }
  write_json(options.out / "summary.json", {{"runs", runs},
                                            {"converged", converged},
                                            {"min", lo},
                                            {"max", *hi_it},
                                            {"all_finite", finite},
                                            {"converged_below_r_max", below},
                                            {"r_max", ts.r_max}});
  manifest.add("summary.json", "json");
  svg::histogram_chart("Histogram of max_t |W^t|", "max_t |W^t|", out.edges, out.counts)
      .save((options.out / "norm_hist.svg").string());
  manifest.add("norm_hist.svg", "svg");
  manifest.write();
  return out;
}

std::vector<GcProbRow> cmd_gc_prob(const json& config, const CommandOptions& options) {
  ConfigReader r(config, "config");
  std::vector<std::pair<int, int>> pairs = {{2, 3}, {2, 4}, {3, 5}, {4, 8}, {2, 2}, {3, 3}, {2, 64}};
  if (r.has("pairs")) {
    pairs.clear();
    for (const auto& p : r.raw("pairs")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
        throw ConfigError("config.pairs: expected [[d, k], ...]");
      }
      pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
  }
  const int trials = runs_or(options, r.integer("trials", 100000));
  const std::uint64_t seed = seed_or(options, r.u64("seed", 0));
  finish_config(r);
  if (trials < 1) throw ConfigError("trials must be >= 1");

  prepare_dir(options.out);
  Manifest manifest(options.out);
  json pj = json::array();
  for (auto [d, k] : pairs) pj.push_back({d, k});
  write_json(options.out / "config.json",
             {{"command", "gc-prob"}, {"pairs", pj}, {"trials", trials}, {"seed", seed}});
  manifest.add("config.json", "json");

  std::vector<GcProbRow> rows;
  CsvWriter csv(options.out / "gc_prob.csv",
                {"d", "k", "closed_form", "mc_estimate", "mc_std_error", "trials", "hits", "deviation_sigma"});
  json jr = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [d, k] = pairs[i];
    GcProbRow row;
    row.d = d;
    row.k = k;
    row.closed_form = gc_probability(d, k);
    row.mc = gc_probability_mc(d, k, static_cast<std::uint64_t>(trials), derive_seed(seed, i), options.threads);
    const double sigma = row.mc.std_error > 0 ? std::abs(row.mc.estimate - row.closed_form) / row.mc.std_error
                                              : (row.mc.estimate == row.closed_form ? 0.0 : kNaN);
    csv << d << k << row.closed_form << row.mc.estimate << row.mc.std_error
        << static_cast<unsigned long long>(row.mc.trials) << static_cast<unsigned long long>(row.mc.hits) << sigma;
    csv.end_row();
    jr.push_back({{"d", d},
                  {"k", k},
                  {"closed_form", row.closed_form},
                  {"mc_estimate", row.mc.estimate},
                  {"mc_std_error", row.mc.std_error},
                  {"hits", row.mc.hits},
                  {"trials", row.mc.trials}});
    rows.push_back(row);
  }
  manifest.add("gc_prob.csv", "gc_prob");
  write_json(options.out / "gc_prob.json", {{"rows", jr}});
  manifest.add("gc_prob.json", "json");
  manifest.write();
  return rows;
}

Matrix trace_initial_weights() {
  Matrix w(2, 6);
  for (int j = 1; j <= 3; ++j) {
    const double a = (2 - j) * std::numbers::pi / 6.0;
    w(0, 2 * (j - 1)) = w(0, 2 * (j - 1) + 1) = 0.75 * std::cos(a);
    w(1, 2 * (j - 1)) = w(1, 2 * (j - 1) + 1) = 0.75 * std::sin(a);
  }
  return w;
}

namespace {

svg::Document trace_frame(int t, const Matrix& w, const OutputMap& v, const LabeledDataset& data,
                          const std::vector<std::pair<double, double>>& rho) {
  double extent = 1.1;
  for (int j = 0; j < w.cols(); ++j) {
    if (v.owner(j) != 0) extent = std::max(extent, 1.05 * w.col(j).norm());
  }
  const double size = 480, c = size / 2, scale = 210 / extent;
  auto px = [&](double x) { return c + scale * x; };
  auto py = [&](double y) { return c - scale * y; };
  svg::Document doc(size, size);
  doc.rect(0, 0, size, size, "white", "none");
  doc.text(c, 20, "t = " + std::to_string(t), 14);
  std::vector<double> cx, cy;
  for (int s = 0; s < 180; ++s) {
    const double a = 2 * std::numbers::pi * s / 180;
    cx.push_back(px(std::cos(a)));
    cy.push_back(py(std::sin(a)));
  }
  doc.polyline(cx, cy, "#999999", 1.0, "", true);
  for (int s = 0; s < data.size(); ++s) {
    const Vector k = kelvin(data.input(s));
    doc.circle(px(k(0)), py(k(1)), 1.0, "#1f77b4");
  }
  std::vector<double> rx, ry;
  for (const auto& [theta, r] : rho) {
    rx.push_back(px(r * std::cos(theta)));
    ry.push_back(py(r * std::sin(theta)));
  }
  doc.polyline(rx, ry, "#ff7f0e", 1.5, "6,4", true);
  for (int j = 0; j < w.cols(); ++j) {
    const double norm = w.col(j).norm();
    if (v.owner(j) == 0) {
      if (norm == 0.0) continue;
      const double x = w(0, j) / norm, y = w(1, j) / norm;
      doc.line(px(0), py(0), px(x), py(y), "#d62728", 1.0);
      doc.circle(px(x), py(y), 4, "#d62728");
    } else {
      doc.circle(px(w(0, j)), py(w(1, j)), 4, "#2ca02c");
    }
  }
  return doc;
}

}  // namespace

TraceResult cmd_trace_dynamics(const json& config, const CommandOptions& options) {
  ConfigReader r(config, "config");
  std::vector<int> snapshots = r.integers("snapshots", {0, 50, 200});
  const int rho_samples = r.integer("rho_samples", 360);
  const std::uint64_t seed = seed_or(options, r.u64("seed", 0));
  ConfigReader train_r = r.child("train");
  const TrainSettings ts = TrainSettings::from_json(train_r);
  finish_config(r);
  if (rho_samples < 3) throw ConfigError("rho_samples must be >= 3");
  for (int s : snapshots) {
    if (s < 0) throw ConfigError("snapshot iterations must be >= 0");
  }

  prepare_dir(options.out);
  Manifest manifest(options.out);
  write_json(options.out / "config.json", {{"command", "trace-dynamics"},
                                           {"snapshots", snapshots},
                                           {"rho_samples", rho_samples},
                                           {"seed", seed},
                                           {"train", ts.to_json()}});
  manifest.add("config.json", "json");

  TaskConfig cfg;
  cfg.kind = TaskKind::kGridPlanar;
  cfg.width = 6;
  const TaskInstance task = build_task(cfg);
  TrainSettings every = ts;
  every.record_every = 1;
  RunOutcome o = run_once(cfg, task, every, seed, true, trace_initial_weights());
  const TrainResult& tr = *o.full;

  std::vector<int> frames;
  for (int s : snapshots) {
    if (s <= tr.iterations) frames.push_back(s);
  }
  frames.push_back(tr.iterations);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  CsvWriter weights(options.out / "trace_weights.csv", {"t", "neuron", "role", "x", "y", "norm"});
  CsvWriter rho_csv(options.out / "trace_rho.csv", {"t", "theta", "rho"});
  TraceResult out;
  out.frames = frames;
  out.iterations = tr.iterations;
  out.final_loss = tr.trajectory.back().loss_total;
  json frame_json = json::array();
  for (int t : frames) {
    const Matrix& w = *tr.trajectory[static_cast<std::size_t>(t)].weights;
    const NetworkParams p = make_params(w, task.v);
    const auto rho = rho_curve(p, rho_samples);
    for (int j = 0; j < w.cols(); ++j) {
      const bool owner = task.v.owner(j) == 0;
      const double norm = w.col(j).norm();
      // Owners are drawn normalized, partners raw.
      const double sx = owner && norm > 0 ? w(0, j) / norm : w(0, j);
      const double sy = owner && norm > 0 ? w(1, j) / norm : w(1, j);
      weights << t << j + 1 << std::string(owner ? "w_tilde" : "u") << sx << sy << norm;
      weights.end_row();
    }
    for (const auto& [theta, value] : rho) {
      rho_csv << t << theta << value;
      rho_csv.end_row();
    }
    const std::string name = "frame_t" + std::to_string(t) + ".svg";
    trace_frame(t, w, task.v, task.data, rho).save((options.out / name).string());
    manifest.add(name, "svg");
    frame_json.push_back({{"t", t}, {"file", name}, {"loss", tr.trajectory[static_cast<std::size_t>(t)].loss_total}});
  }
  manifest.add("trace_weights.csv", "trace_weights");
  manifest.add("trace_rho.csv", "trace_rho");

  CsvWriter pts(options.out / "kelvin_points.csv", {"index", "x", "y", "radius"});
  const NetworkParams final_p = make_params(tr.params.w, task.v);
  out.min_rho_margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < task.data.size(); ++s) {
    const Vector x = task.data.input(s);
    const Vector k = kelvin(x);
    pts << s + 1 << k(0) << k(1) << k.norm();
    pts.end_row();
    Vector u = x / x.norm();
    const double rho = std::min(1.0, std::max(0.0, forward_binary(final_p, u)));
    out.min_rho_margin = std::min(out.min_rho_margin, rho - k.norm());
  }
  manifest.add("kelvin_points.csv", "kelvin_points");
  write_json(options.out / "trace.json", {{"frames", frame_json},
                                          {"iterations", out.iterations},
                                          {"stop_reason", to_string(tr.stop_reason)},
                                          {"final_loss", out.final_loss},
                                          {"min_rho_margin", out.min_rho_margin},
                                          {"run", to_json(o)}});
  manifest.add("trace.json", "json");
  manifest.write();
  return out;
}

json cmd_landscape_audit(const json& config, const CommandOptions& options) {
  ConfigReader r(config, "config");
  const std::uint64_t seed_base = seed_or(options, r.u64("seed_base", 0));

  ConfigReader z = r.child("zero_loss");
  const int zl_classes = z.integer("classes", 2);
  const int zl_dim = z.integer("dim_per_class", 2);
  const double zl_m = z.number("m", 1.0);
  const double zl_M = z.number("M", 2.0);
  const int zl_owners = z.integer("owners_per_class", 3);
  const double zl_bias = z.number("bias_total", 0.0);
  const double zl_v = z.number("v", 1.0);
  const int zl_samples = z.integer("samples_per_class", 1000);
  const std::uint64_t zl_seed = z.u64("data_seed", 0);
  z.finish();

  ConfigReader a = r.child("audit");
  const int audit_runs = runs_or(options, a.integer("runs", 20));
  ConfigReader at = a.child("task");
  const TaskConfig audit_cfg = TaskConfig::from_json(at);
  ConfigReader atr = a.child("train");
  const TrainSettings audit_ts = TrainSettings::from_json(atr);
  a.finish();

  ConfigReader l = r.child("lipschitz");
  const int pairs = l.integer("pairs", 10000);
  const double lip_bias = l.number("bias_total", 0.5);
  const double perturbation = l.number("perturbation", 0.1);
  const int lip_width = l.integer("width", 8);
  const int bins = l.integer("bins", 20);
  l.finish();
  finish_config(r);

  prepare_dir(options.out);
  Manifest manifest(options.out);
  write_json(options.out / "config.json",
             {{"command", "landscape-audit"},
              {"seed_base", seed_base},
              {"zero_loss",
               {{"classes", zl_classes}, {"dim_per_class", zl_dim}, {"m", zl_m}, {"M", zl_M},
                {"owners_per_class", zl_owners}, {"bias_total", zl_bias}, {"v", zl_v},
                {"samples_per_class", zl_samples}, {"data_seed", zl_seed}}},
              {"audit", {{"runs", audit_runs}, {"task", audit_cfg.to_json()}, {"train", audit_ts.to_json()}}},
              {"lipschitz",
               {{"pairs", pairs}, {"bias_total", lip_bias}, {"perturbation", perturbation}, {"width", lip_width},
                {"bins", bins}}}});
  manifest.add("config.json", "json");

  json report;
  {
    // Zero-loss construction on matched annulus data.
    const auto bases = block_bases(zl_classes, zl_dim);
    const OutputMap v = build_output_map(zl_classes, zl_classes * zl_owners, zl_v);
    std::vector<ClassRegion> regions;
    LabeledDataset data;
    for (int c = 0; c < zl_classes; ++c) {
      regions.push_back({bases[static_cast<std::size_t>(c)], zl_m, zl_M});
      Rng rng(derive_seed(zl_seed, static_cast<std::uint64_t>(c)));
      auto part = sample_annulus({bases[static_cast<std::size_t>(c)], zl_m, zl_M}, zl_samples, c, zl_classes, rng);
      data = c == 0 ? part : LabeledDataset::concat(data, part);
    }
    NetworkParams shell = make_params(Matrix::Zero(zl_classes * zl_dim, v.neurons()), v, zl_bias);
    const Matrix w = construct_zero_loss(v, regions, shell.b);
    shell.w = w;
    const Evaluation ev = evaluate(shell, data, {});
    const LandscapeAudit audit = critical_point_audit(shell, data);
    report["zero_loss"] = {{"loss", ev.loss},
                           {"subgradient_norm", column_norm_sum(ev.gradient)},
                           {"audit", to_json(audit)},
                           {"samples", data.size()}};
  }
  {
    const TaskInstance task = build_task(audit_cfg);
    const auto runs = run_batch(audit_cfg, task, audit_ts, seed_base, audit_runs, options.threads);
    json rows = json::array();
    int converged = 0, global = 0, prop_checked = 0, prop_ok = 0;
    for (const auto& o : runs) {
      rows.push_back({{"seed", o.seed}, {"converged", o.converged}, {"audit", to_json(o.audit)}});
      if (o.converged) {
        ++converged;
        global += o.audit.verdict == AuditVerdict::kGlobalMin ? 1 : 0;
      }
      if (o.audit.grad_norm < 1e-8 && o.audit.nonzero_output_witness) {
        ++prop_checked;
        prop_ok += o.audit.loss < 1e-8 ? 1 : 0;
      }
    }
    report["critical_point_audits"] = {{"runs", rows},
                                       {"converged", converged},
                                       {"converged_global_min", global},
                                       {"critical_with_witness", prop_checked},
                                       {"critical_with_witness_zero_loss", prop_ok}};
  }
  {
    TaskConfig lc;
    lc.kind = TaskKind::kGridPlanar;
    lc.width = lip_width;
    const TaskInstance task = build_task(lc);
    try {
      const auto est = lipschitz_estimate(gaussian_pair_sampler(2, task.v, lip_bias, perturbation), task.data,
                                          task.objective, pairs, seed_base, options.threads, bins);
      bool finite = true;
      CsvWriter rc(options.out / "lipschitz_ratios.csv", {"pair", "ratio"});
      for (std::size_t i = 0; i < est.ratios.size(); ++i) {
        finite = finite && std::isfinite(est.ratios[i]);
        rc << static_cast<int>(i) << est.ratios[i];
        rc.end_row();
      }
      manifest.add("lipschitz_ratios.csv", "lipschitz_ratios");
      CsvWriter hc(options.out / "lipschitz_histogram.csv", {"bin_lo", "bin_hi", "count"});
      for (std::size_t b = 0; b < est.bin_counts.size(); ++b) {
        hc << est.bin_edges[b] << est.bin_edges[b + 1] << est.bin_counts[b];
        hc.end_row();
      }
      manifest.add("lipschitz_histogram.csv", "histogram");
      report["lipschitz"] = {{"refused", false},
                             {"max_ratio", est.max_ratio},
                             {"pairs", pairs},
                             {"kept", est.ratios.size()},
                             {"skipped", est.skipped},
                             {"all_finite", finite}};
    } catch (const ConfigError& e) {
      std::cerr << "lipschitz: " << e.what() << '\n';
      report["lipschitz"] = {{"refused", true}, {"message", e.what()}};
    }
  }
  write_json(options.out / "landscape_audit.json", report);
  manifest.add("landscape_audit.json", "json");
  manifest.write();
  return report;
}

}  // namespace phaselab
