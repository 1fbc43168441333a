#pragma once

#include "phaselab/loss.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace phaselab {

struct TrainConfig {
  double eta = 0.1;
  int max_iters = 5000;
  double stop_loss = 0.0;     ///< converged once the objective is <= this
  int record_every = 1;
  std::uint64_t seed = 0;     ///< carried for provenance; training itself is deterministic
  Objective objective;        ///< which l_i are descended and how they combine
  double r_max = 1e3;         ///< |W| above this sets TrainResult::exceeded_r_max
  bool keep_snapshots = false;

  /// Throws ConfigError unless eta > 0 (or == 0 for frozen runs), max_iters >= 1,
  /// record_every >= 1 and stop_loss >= 0.
  void validate() const;
};

struct TrajectoryRecord {
  int t = 0;
  double loss_total = 0.0;
  Vector loss_per_class;
  Vector neuron_norms;
  double weight_norm = 0.0;   ///< column-norm sum |W^t|
  double grad_norm = 0.0;     ///< column-norm sum of the subgradient at W^t
  std::vector<int> gc_flag_per_class;  ///< filled by phase detection; -1 = not evaluated
  std::optional<Matrix> weights;       ///< W^t when snapshots are kept
};

enum class StopReason { kConverged, kMaxIters, kDeadStart, kStalled };

std::string to_string(StopReason reason);

struct TrainResult {
  NetworkParams params;
  std::vector<TrajectoryRecord> trajectory;
  StopReason stop_reason = StopReason::kMaxIters;
  int iterations = 0;              ///< index t of the final iterate
  double max_weight_norm = 0.0;    ///< max over every t (not only recorded ones)
  bool exceeded_r_max = false;
  bool activation_precondition = true;
  double final_grad_norm = 0.0;
};

/// W <- W - eta * grad of the objective; b and V are untouched.
/// Throws std::runtime_error if the gradient is not finite.
NetworkParams gd_step(const NetworkParams& params, const LabeledDataset& data, const TrainConfig& cfg);

/// True when some objective-class sample activates one of its owner neurons,
/// i.e. |<w_j, x>| > b_j with v_{y,j} > 0.
bool activation_precondition(const NetworkParams& params, const LabeledDataset& data, const Objective& objective);

TrainResult train(NetworkParams params, const LabeledDataset& data, const TrainConfig& cfg);

/// First recorded t whose loss is <= threshold; nullopt if never reached.
std::optional<int> iterations_to_convergence(const std::vector<TrajectoryRecord>& trajectory,
                                             double threshold = 0.0);

}  // namespace phaselab
