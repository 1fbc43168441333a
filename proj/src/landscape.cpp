#include "phaselab/landscape.hpp"

#include "phaselab/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace phaselab {

Matrix regular_simplex(int dim) {
  if (dim < 1) throw ConfigError("simplex dimension must be >= 1");
  // Centered standard basis of R^{dim+1}, written in an orthonormal basis of
  // the hyperplane sum(x) = 0.
  const int n = dim + 1;
  const Matrix centered = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n);
  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeFullU);
  Matrix coords = svd.matrixU().leftCols(dim).transpose() * centered;
  for (int j = 0; j < n; ++j) coords.col(j).normalize();
  return coords;
}

Matrix construct_zero_loss(const OutputMap& v, const std::vector<ClassRegion>& regions, const Vector& b) {
  if (static_cast<int>(regions.size()) != v.classes()) throw ConfigError("need one region per class");
  if (b.size() != v.neurons()) throw DimensionError("bias length differs from neuron count");
  if (regions.empty()) throw ConfigError("no class regions");
  const Eigen::Index d = regions.front().basis.rows();
  Matrix w = Matrix::Zero(d, v.neurons());
  const double bmax = b.size() > 0 ? b.maxCoeff() : 0.0;
  const double vscale = v.magnitude() < 0.5 ? 1.0 / (2.0 * v.magnitude()) : 1.0;
  for (int cls = 0; cls < v.classes(); ++cls) {
    const ClassRegion& reg = regions[static_cast<std::size_t>(cls)];
    if (reg.basis.rows() != d) throw DimensionError("class bases live in different spaces");
    if (!(reg.m > 0.0 && reg.m <= reg.M)) throw ConfigError("class region needs 0 < m <= M");
    const int di = static_cast<int>(reg.basis.cols());
    const std::vector<int> owners = v.owned_by(cls);
    if (static_cast<int>(owners.size()) <= di) {
      throw ConfigError("class " + std::to_string(cls) + " needs at least d_i + 1 = " + std::to_string(di + 1) +
                        " owner neurons for a simplex");
    }
    const double inradius = 1.01 * (1.0 + bmax) / reg.m * vscale;
    const Matrix vertices = regular_simplex(di) * (di * inradius);
    for (std::size_t s = 0; s < owners.size(); ++s) {
      w.col(owners[s]) = reg.basis * vertices.col(static_cast<Eigen::Index>(s % static_cast<std::size_t>(di + 1)));
    }
  }
  return w;
}

std::string to_string(AuditVerdict verdict) {
  switch (verdict) {
    case AuditVerdict::kGlobalMin: return "global_min";
    case AuditVerdict::kDegenerateZeroOutput: return "degenerate_zero_output";
    case AuditVerdict::kNotCritical: return "not_critical";
  }
  return "unknown";
}

LandscapeAudit critical_point_audit(const NetworkParams& params, const LabeledDataset& data,
                                    const Objective& objective, const AuditThresholds& thresholds) {
  const Evaluation ev = evaluate(params, data, objective);
  LandscapeAudit audit;
  audit.loss = ev.loss;
  audit.grad_norm = column_norm_sum(ev.gradient);
  audit.critical = audit.grad_norm <= thresholds.eps_crit;

  std::vector<int> classes = objective.classes;
  if (classes.empty()) {
    for (int c = 0; c < data.classes(); ++c) classes.push_back(c);
  }
  for (int c : classes) {
    for (int s : data.class_indices(c)) {
      if (!forward(params, data.input(s)).f.isZero(0.0)) {
        if (!audit.nonzero_output_witness || s < *audit.nonzero_output_witness) audit.nonzero_output_witness = s;
        break;
      }
    }
  }
  if (!audit.nonzero_output_witness) {
    audit.verdict = AuditVerdict::kDegenerateZeroOutput;
  } else if (audit.critical && audit.loss <= thresholds.delta_loss) {
    audit.verdict = AuditVerdict::kGlobalMin;
  } else {
    audit.verdict = AuditVerdict::kNotCritical;
  }
  return audit;
}

LipschitzEstimate lipschitz_estimate(const PairSampler& sampler, const LabeledDataset& data,
                                     const Objective& objective, int pairs, std::uint64_t seed, int threads,
                                     int bins) {
  if (pairs < 1) throw ConfigError("Lipschitz estimate needs at least one pair");
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  std::vector<double> ratio(static_cast<std::size_t>(pairs), -1.0);
  parallel_for(static_cast<std::size_t>(pairs), threads, [&](std::size_t p) {
    Rng rng(derive_seed(seed, p));
    const auto [a, b] = sampler(rng);
    if (a.mode != BiasMode::kBias || b.mode != BiasMode::kBias) {
      throw ConfigError("Lipschitz gradient needs bias mode with 0 < sum(b) < 1; no-bias inputs are refused");
    }
    const double dist = column_norm_sum(a.w - b.w);
    if (dist < 1e-14) return;
    const Matrix ga = evaluate(a, data, objective).gradient;
    const Matrix gb = evaluate(b, data, objective).gradient;
    ratio[p] = column_norm_sum(ga - gb) / dist;
  });

  LipschitzEstimate est;
  for (double r : ratio) {
    if (r < 0.0) {
      ++est.skipped;
      continue;
    }
    est.ratios.push_back(r);
    est.max_ratio = std::max(est.max_ratio, r);
  }
  const double top = est.max_ratio > 0.0 ? est.max_ratio : 1.0;
  est.bin_counts.assign(static_cast<std::size_t>(bins), 0);
  for (int i = 0; i <= bins; ++i) est.bin_edges.push_back(top * i / bins);
  for (double r : est.ratios) {
    const int bin = std::min(bins - 1, static_cast<int>(r / top * bins));
    ++est.bin_counts[static_cast<std::size_t>(bin)];
  }
  return est;
}

PairSampler gaussian_pair_sampler(int d, const OutputMap& v, double bias_total, double perturbation) {
  return [d, v, bias_total, perturbation](Rng& rng) {
    Matrix w1(d, v.neurons());
    for (int j = 0; j < w1.cols(); ++j)
      for (int r = 0; r < d; ++r) w1(r, j) = rng.normal();
    Matrix w2 = w1;
    for (int j = 0; j < w2.cols(); ++j)
      for (int r = 0; r < d; ++r) w2(r, j) += perturbation * rng.normal();
    return std::pair{make_params(w1, v, bias_total), make_params(std::move(w2), v, bias_total)};
  };
}

}  // namespace phaselab
