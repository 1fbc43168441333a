#pragma once

#include "phaselab/datagen.hpp"
#include "phaselab/geometry.hpp"
#include "phaselab/io.hpp"
#include "phaselab/landscape.hpp"
#include "phaselab/phases.hpp"
#include "phaselab/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace phaselab {

enum class TaskKind { kGridPlanar, kGrid, kAnnulus };
enum class InitKind { kRandom, kHalfspace };

std::string to_string(TaskKind kind);
std::string to_string(InitKind kind);
InitKind parse_init(const std::string& name);

/// What is trained. `grid-planar` is the class-0 grid in V1 coordinates
/// (binary net, only l_1 descended); `grid` is both classes in R^4 with
/// l_1 + l_2 descended; `annulus` is n classes on orthogonal coordinate
/// blocks with uniform annulus data.
struct TaskConfig {
  TaskKind kind = TaskKind::kGridPlanar;
  int width = 8;  ///< total hidden neurons
  InitKind init = InitKind::kRandom;
  double bias_total = 0.0;  ///< 0 selects no-bias mode
  std::uint64_t data_seed = 0;
  double theta = 1.5707963267948966;  ///< grid
  double noise_std = 0.0;             ///< grid
  int classes = 2;                    ///< annulus
  int dim_per_class = 2;              ///< annulus
  double m = 1.0;                     ///< annulus
  double M = 2.0;                     ///< annulus
  int samples_per_class = 400;        ///< annulus
  double v = 0.5;                     ///< annulus output magnitude; grids use 1/2
  std::optional<double> p_min, p_max; ///< density bounds for the bound diagnostics

  static TaskConfig from_json(ConfigReader& reader);
  json to_json() const;
  void validate() const;
};

struct TaskInstance {
  LabeledDataset data;
  OutputMap v;
  Objective objective;
  std::vector<int> phase_classes;
  std::vector<Matrix> bases;  ///< per class; 0 x 0 when no projection is needed
  int dim = 0;
  int subspace_dim = 0;
  std::optional<double> p_min, p_max;
  double data_m = 0.0;  ///< min / max sample norm over the phase classes
  double data_M = 0.0;
};

TaskInstance build_task(const TaskConfig& cfg);
Matrix initial_weights(const TaskConfig& cfg, const TaskInstance& task, std::uint64_t seed);

struct TrainSettings {
  double eta = 0.1;
  int max_iters = 5000;
  int record_every = 1;
  double r_max = 1e3;

  static TrainSettings from_json(ConfigReader& reader);
  json to_json() const;
  TrainConfig to_config(const Objective& objective, std::uint64_t seed) const;
};

struct BoundReport {
  int cls = 0;
  std::optional<double> t1_bound;
  std::optional<double> phase2_sum_bound;
  std::string note;  ///< why a bound is missing
  bool t1_dominates = true;
  bool phase2_dominates = true;
};

struct RunOutcome {
  std::uint64_t seed = 0;
  int iterations = 0;
  bool converged = false;
  StopReason stop_reason = StopReason::kMaxIters;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  double max_weight_norm = 0.0;
  std::vector<PhaseReport> phases;
  int owner_violations = 0;
  LandscapeAudit audit;
  std::vector<BoundReport> bounds;
  std::optional<TrainResult> full;  ///< kept only on request
};

/// One training run with phase detection, owner-norm audit, critical-point
/// audit and (when densities are known) the bound diagnostics.
RunOutcome run_once(const TaskConfig& cfg, const TaskInstance& task, const TrainSettings& train, std::uint64_t seed,
                    bool keep_result = false, std::optional<Matrix> w0 = std::nullopt);

/// Runs seeds seed_base .. seed_base + runs - 1, in parallel, results in seed order.
std::vector<RunOutcome> run_batch(const TaskConfig& cfg, const TaskInstance& task, const TrainSettings& train,
                                  std::uint64_t seed_base, int runs, int threads);

/// One row of an aggregate table.
struct CellStats {
  std::string cell;
  std::string init;
  int width = 0;
  double theta = 0.0;
  int runs = 0;
  int converged = 0;
  double mean = 0.0;
  std::optional<double> std;  ///< sample std; nullopt for fewer than two values
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

/// Statistics over the converged runs' iteration counts (linear-interpolated quartiles).
CellStats summarize(const std::string& cell, const std::string& init, int width, double theta,
                    const std::vector<RunOutcome>& runs);

struct CommandOptions {
  fs::path out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  int threads = 1;
};

struct SweepResult {
  std::vector<CellStats> cells;
  std::vector<std::vector<RunOutcome>> runs;  ///< per cell
};

struct TrainCommandResult {
  RunOutcome outcome;
  json report;
};

struct NormHistResult {
  std::vector<double> max_norms;
  std::vector<double> edges;
  std::vector<int> counts;
  std::vector<RunOutcome> runs;
};

struct GcProbRow {
  int d = 0, k = 0;
  double closed_form = 0.0;
  MonteCarloEstimate mc;
};

struct TraceResult {
  std::vector<int> frames;
  double final_loss = 0.0;
  double min_rho_margin = 0.0;  ///< min over data of rho(angle) - |x*| at the final frame
  int iterations = 0;
};

/// Each command reads a JSON config (unknown keys rejected), writes its
/// outputs plus config.json and manifest.json into options.out, and returns
/// the in-memory results.
TrainCommandResult cmd_train(const json& config, const CommandOptions& options);
SweepResult cmd_sweep_angle(const json& config, const CommandOptions& options);
SweepResult cmd_sweep_width(const json& config, const CommandOptions& options);
NormHistResult cmd_norm_hist(const json& config, const CommandOptions& options);
std::vector<GcProbRow> cmd_gc_prob(const json& config, const CommandOptions& options);
TraceResult cmd_trace_dynamics(const json& config, const CommandOptions& options);
json cmd_landscape_audit(const json& config, const CommandOptions& options);

/// Initial weights for the dynamics trace: owner j and its partner u_j both
/// at 3/4 (cos((2 - j) pi / 6), sin((2 - j) pi / 6)), j = 1, 2, 3.
Matrix trace_initial_weights();

json to_json(const PhaseReport& report);
json to_json(const LandscapeAudit& audit);
json to_json(const RunOutcome& outcome);
void write_trajectory_csv(const fs::path& path, const std::vector<TrajectoryRecord>& trajectory, int classes);

}  // namespace phaselab
