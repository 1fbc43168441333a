#pragma once

#include "phaselab/geometry.hpp"
#include "phaselab/trainer.hpp"

#include <optional>
#include <vector>

namespace phaselab {

/// Per-class slow/fast membership over a recorded trajectory.
struct PhaseReport {
  int cls = 0;
  std::vector<int> t;              ///< recorded iteration indices
  std::vector<bool> gc_timeline;   ///< condition holds at t (degenerate counts as false)
  std::vector<GcVerdict> verdicts;
  std::optional<int> first_hold;
  int t1_size = 0;
  int t2_size = 0;
  double persistence = 0.0;        ///< share of records at or after first_hold that hold; 0 if none
  double sum_sq_loss_t2 = 0.0;
};

/// Runs gc_check on the owner directions of `cls` at every record. `basis`
/// (d x d_i) restricts the test to the class subspace. Records must carry
/// weight snapshots; throws ConfigError otherwise.
PhaseReport detect_phases(const std::vector<TrajectoryRecord>& trajectory, const OutputMap& v, int cls,
                          const Matrix* basis = nullptr);

/// Copies the timeline of `report` into the records' gc_flag_per_class.
void annotate_trajectory(std::vector<TrajectoryRecord>& trajectory, const PhaseReport& report);

struct BoundInputs {
  double v = 1.0;
  double eta = 0.1;
  double R = 1.0;
  double M = 1.0;
  double m = 1.0;
  double p_min = 1.0;
  double p_max = 1.0;
  int d = 2;
  int n = 2;

  void validate() const;
};

/// M^{d-1} p_max.
double cp_upper_bound(const BoundInputs& in);

/// p_min |S^{d-2}| / |S^{d-1}| * int_0^beta sin^{d-2}, sin(beta) = 1 / (2 v M R).
/// Throws ConfigError when d < 2 or 2 v M R <= 1.
double p_r_lower_bound(const BoundInputs& in);

/// C_p R / (v eta p_R^2). Throws ConfigError when p_R == 0.
double t1_bound(const BoundInputs& in);

/// 4 v n^2 C_p R^2 M^2 R / eta.
double phase2_sum_bound(const BoundInputs& in);

/// Surface area of the unit sphere S^{dim} in R^{dim + 1}.
double sphere_area(int dim);

struct NormViolation {
  int t = 0;       ///< the decrease (or increase) happens between t and the next record
  int neuron = 0;
  double before = 0.0;
  double after = 0.0;
};

struct MonotonicityReport {
  std::vector<NormViolation> owner;
  std::vector<NormViolation> non_owner;
  bool non_owner_checked = false;  ///< false when no radius was given or eta is above the threshold
  double eta_threshold = 0.0;
};

struct MonotonicityOptions {
  double tol = 1e-12;
  /// Radius r for the non-owner clause, with the bound constants that set
  /// the step-size threshold min(r / (C_p M^2), r / (2 v n M)).
  std::optional<double> r;
  std::optional<BoundInputs> bounds;
  /// When set, norms are measured after projecting onto span(basis).
  const Matrix* basis = nullptr;
};

/// Compares neuron norms between consecutive records. Projection requires
/// weight snapshots; otherwise the recorded norms are used.
MonotonicityReport monotonicity_audit(const std::vector<TrajectoryRecord>& trajectory, const OutputMap& v, int cls,
                                      const MonotonicityOptions& options = {});

}  // namespace phaselab
