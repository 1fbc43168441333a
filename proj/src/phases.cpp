#include "phaselab/phases.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>

namespace phaselab {

PhaseReport detect_phases(const std::vector<TrajectoryRecord>& trajectory, const OutputMap& v, int cls,
                          const Matrix* basis) {
  if (cls < 0 || cls >= v.classes()) throw ConfigError("phase detection class out of range");
  const std::vector<int> owners = v.owned_by(cls);
  PhaseReport rep;
  rep.cls = cls;
  for (const auto& rec : trajectory) {
    if (!rec.weights) {
      throw ConfigError("phase detection needs weight snapshots; train with keep_snapshots and record_every=1");
    }
    const DirectionSet dirs = make_direction_set(*rec.weights, owners, basis);
    GcVerdict verdict = GcVerdict::kFails;
    if (dirs.count() > 0) verdict = gc_check(dirs).verdict;
    const bool holds = verdict == GcVerdict::kHolds;
    rep.t.push_back(rec.t);
    rep.verdicts.push_back(verdict);
    rep.gc_timeline.push_back(holds);
    if (holds) {
      if (!rep.first_hold) rep.first_hold = rec.t;
      ++rep.t2_size;
      const double l = rec.loss_per_class.size() > cls ? rec.loss_per_class(cls) : rec.loss_total;
      rep.sum_sq_loss_t2 += l * l;
    } else {
      ++rep.t1_size;
    }
  }
  if (rep.first_hold) {
    int after = 0, held = 0;
    for (std::size_t i = 0; i < rep.t.size(); ++i) {
      if (rep.t[i] < *rep.first_hold) continue;
      ++after;
      held += rep.gc_timeline[i] ? 1 : 0;
    }
    rep.persistence = static_cast<double>(held) / after;
  }
  return rep;
}

void annotate_trajectory(std::vector<TrajectoryRecord>& trajectory, const PhaseReport& report) {
  if (trajectory.size() != report.t.size()) throw ConfigError("phase report does not match the trajectory");
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    auto& flags = trajectory[i].gc_flag_per_class;
    if (flags.size() <= static_cast<std::size_t>(report.cls)) flags.resize(static_cast<std::size_t>(report.cls) + 1, -1);
    flags[static_cast<std::size_t>(report.cls)] = report.gc_timeline[i] ? 1 : 0;
  }
}

void BoundInputs::validate() const {
  if (!(v > 0 && eta > 0 && R > 0 && M > 0 && m > 0 && p_max > 0 && p_min >= 0)) {
    throw ConfigError("bound inputs must be positive (p_min may be 0)");
  }
  if (m > M) throw ConfigError("bound inputs need m <= M");
  if (p_min > p_max) throw ConfigError("bound inputs need p_min <= p_max");
  if (d < 1 || n < 1) throw ConfigError("bound inputs need d >= 1 and n >= 1");
}

double sphere_area(int dim) {
  if (dim < 0) throw ConfigError("sphere dimension must be >= 0");
  const double half = (dim + 1) / 2.0;
  return 2.0 * std::pow(std::numbers::pi, half) / boost::math::tgamma(half);
}

double cp_upper_bound(const BoundInputs& in) {
  in.validate();
  return std::pow(in.M, in.d - 1) * in.p_max;
}

double p_r_lower_bound(const BoundInputs& in) {
  in.validate();
  if (in.d < 2) throw ConfigError("p_R needs subspace dimension d >= 2");
  const double s = 2.0 * in.v * in.M * in.R;
  if (!(s > 1.0)) throw ConfigError("p_R needs 2 v M R > 1");
  if (in.p_min == 0.0) return 0.0;
  const double beta = std::asin(1.0 / s);
  const int power = in.d - 2;
  double integral = 0.0;
  if (power == 0) {
    integral = beta;
  } else {
    double err = 0.0;
    integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [power](double t) { return std::pow(std::sin(t), power); }, 0.0, beta, 15, 1e-10, &err);
  }
  return in.p_min * sphere_area(in.d - 2) / sphere_area(in.d - 1) * integral;
}

double t1_bound(const BoundInputs& in) {
  const double pr = p_r_lower_bound(in);
  if (pr <= 0.0) throw ConfigError("t1 bound needs p_R > 0");
  return cp_upper_bound(in) * in.R / (in.v * in.eta * pr * pr);
}

double phase2_sum_bound(const BoundInputs& in) {
  const double cp = cp_upper_bound(in);
  const double n2 = static_cast<double>(in.n) * in.n;
  return 4.0 * in.v * n2 * cp * in.R * in.R * in.M * in.M * in.R / in.eta;
}

MonotonicityReport monotonicity_audit(const std::vector<TrajectoryRecord>& trajectory, const OutputMap& v, int cls,
                                      const MonotonicityOptions& options) {
  MonotonicityReport rep;
  if (options.r && options.bounds) {
    const BoundInputs& b = *options.bounds;
    const double r = *options.r;
    rep.eta_threshold = std::min(r / (cp_upper_bound(b) * b.M * b.M), r / (2.0 * b.v * b.n * b.M));
    rep.non_owner_checked = b.eta < rep.eta_threshold;
  }
  auto norms_of = [&](const TrajectoryRecord& rec) -> Vector {
    if (options.basis == nullptr) return rec.neuron_norms;
    if (!rec.weights) throw ConfigError("projected norms need weight snapshots");
    return (options.basis->transpose() * *rec.weights).colwise().norm().transpose();
  };
  if (trajectory.size() < 2) return rep;
  Vector prev = norms_of(trajectory.front());
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const Vector cur = norms_of(trajectory[i]);
    for (int j = 0; j < v.neurons(); ++j) {
      const bool owner = v.owner(j) == cls;
      if (owner && cur(j) < prev(j) - options.tol) {
        rep.owner.push_back({trajectory[i - 1].t, j, prev(j), cur(j)});
      } else if (!owner && rep.non_owner_checked && prev(j) > *options.r && cur(j) > prev(j) + options.tol) {
        rep.non_owner.push_back({trajectory[i - 1].t, j, prev(j), cur(j)});
      }
    }
    prev = cur;
  }
  return rep;
}

}  // namespace phaselab
