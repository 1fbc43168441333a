#include "phaselab/trainer.hpp"

#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

namespace phaselab {

void TrainConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be a finite non-negative number");
  if (max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (record_every < 1) throw ConfigError("record_every must be at least 1");
  if (!(stop_loss >= 0.0)) throw ConfigError("stop_loss must be non-negative");
  if (!(r_max > 0.0)) throw ConfigError("r_max must be positive");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged: return "converged";
    case StopReason::kMaxIters: return "max_iters";
    case StopReason::kDeadStart: return "dead_start";
    case StopReason::kStalled: return "stalled";
  }
  return "unknown";
}

namespace {

Vector column_norms(const Matrix& w) {
  Vector norms(w.cols());
  for (Eigen::Index j = 0; j < w.cols(); ++j) norms(j) = w.col(j).norm();
  return norms;
}

TrajectoryRecord make_record(int t, const NetworkParams& params, const Evaluation& ev, bool keep) {
  TrajectoryRecord rec;
  rec.t = t;
  rec.loss_total = ev.loss;
  rec.loss_per_class = ev.class_losses;
  rec.neuron_norms = column_norms(params.w);
  rec.weight_norm = rec.neuron_norms.sum();
  rec.grad_norm = column_norm_sum(ev.gradient);
  rec.gc_flag_per_class.assign(static_cast<std::size_t>(params.classes()), -1);
  if (keep) rec.weights = params.w;
  return rec;
}

void apply_step(NetworkParams& params, const Matrix& gradient, double eta) {
  if (!gradient.allFinite()) throw std::runtime_error("non-finite gradient encountered during descent");
  params.w -= eta * gradient;
}

}  // namespace

NetworkParams gd_step(const NetworkParams& params, const LabeledDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  NetworkParams next = params;
  apply_step(next, evaluate(params, data, cfg.objective).gradient, cfg.eta);
  return next;
}

bool activation_precondition(const NetworkParams& params, const LabeledDataset& data, const Objective& objective) {
  std::vector<int> classes = objective.classes;
  if (classes.empty()) {
    classes.resize(static_cast<std::size_t>(data.classes()));
    std::iota(classes.begin(), classes.end(), 0);
  }
  for (int c : classes) {
    const auto owners = params.v.owned_by(c);
    for (int s : data.class_indices(c)) {
      for (int j : owners) {
        if (std::abs(params.w.col(j).dot(data.inputs().row(s).transpose())) > params.b(j)) return true;
      }
    }
  }
  return false;
}

TrainResult train(NetworkParams params, const LabeledDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  params.validate();

  TrainResult result;
  result.activation_precondition = activation_precondition(params, data, cfg.objective);
  if (!result.activation_precondition) {
    std::cerr << "warning: no objective sample activates an owner neuron at t=0; "
                 "descent may not move\n";
  }

  Evaluation ev = evaluate(params, data, cfg.objective);
  result.max_weight_norm = column_norm_sum(params.w);
  result.trajectory.push_back(make_record(0, params, ev, cfg.keep_snapshots));

  int t = 0;
  auto finish = [&](StopReason reason) {
    result.stop_reason = reason;
    result.iterations = t;
    result.final_grad_norm = column_norm_sum(ev.gradient);
    if (result.trajectory.back().t != t) result.trajectory.push_back(make_record(t, params, ev, cfg.keep_snapshots));
    result.exceeded_r_max = result.max_weight_norm > cfg.r_max;
    result.params = std::move(params);
    return std::move(result);
  };

  if (ev.loss <= cfg.stop_loss) return finish(StopReason::kConverged);
  if ((ev.gradient.array() == 0.0).all()) {
    return finish(result.activation_precondition ? StopReason::kStalled : StopReason::kDeadStart);
  }

  while (t < cfg.max_iters) {
    apply_step(params, ev.gradient, cfg.eta);
    ++t;
    ev = evaluate(params, data, cfg.objective);
    result.max_weight_norm = std::max(result.max_weight_norm, column_norm_sum(params.w));
    const bool converged = ev.loss <= cfg.stop_loss;
    const bool stalled = !converged && (ev.gradient.array() == 0.0).all();
    if (t % cfg.record_every == 0 || converged || stalled || t == cfg.max_iters) {
      result.trajectory.push_back(make_record(t, params, ev, cfg.keep_snapshots));
    }
    if (converged) return finish(StopReason::kConverged);
    if (stalled) return finish(StopReason::kStalled);
  }
  return finish(StopReason::kMaxIters);
}

std::optional<int> iterations_to_convergence(const std::vector<TrajectoryRecord>& trajectory, double threshold) {
  for (const auto& rec : trajectory) {
    if (rec.loss_total <= threshold) return rec.t;
  }
  return std::nullopt;
}

}  // namespace phaselab
