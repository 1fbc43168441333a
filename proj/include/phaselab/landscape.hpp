#pragma once

#include "phaselab/loss.hpp"
#include "phaselab/rng.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace phaselab {

/// One class subspace with its data radii m <= |x| <= M.
struct ClassRegion {
  Matrix basis;  ///< d x d_i, orthonormal columns
  double m = 1.0;
  double M = 2.0;
};

/// Vertices of a regular simplex in R^dim: dim + 1 columns of norm 1 summing to 0.
Matrix regular_simplex(int dim);

/// Places the owners of each class at the vertices of a regular d_i-simplex
/// inside that class's subspace, with inradius 1.01 max_j (1 + b_j) / m_i
/// (further scaled by 1 / (2v) when v < 1/2). Extra owners reuse vertices in
/// turn. Every other column stays 0. Throws ConfigError when a class owns
/// d_i or fewer neurons.
Matrix construct_zero_loss(const OutputMap& v, const std::vector<ClassRegion>& regions, const Vector& b);

enum class AuditVerdict { kGlobalMin, kDegenerateZeroOutput, kNotCritical };

std::string to_string(AuditVerdict verdict);

struct LandscapeAudit {
  double grad_norm = 0.0;  ///< column-norm sum of the objective subgradient
  double loss = 0.0;
  std::optional<int> nonzero_output_witness;
  AuditVerdict verdict = AuditVerdict::kNotCritical;
  bool critical = false;   ///< grad_norm <= eps_crit
};

struct AuditThresholds {
  double eps_crit = 1e-8;
  double delta_loss = 1e-8;
};

LandscapeAudit critical_point_audit(const NetworkParams& params, const LabeledDataset& data,
                                    const Objective& objective = {}, const AuditThresholds& thresholds = {});

/// Draws one (W1, W2) pair from a per-pair stream.
using PairSampler = std::function<std::pair<NetworkParams, NetworkParams>(Rng&)>;

struct LipschitzEstimate {
  double max_ratio = 0.0;
  std::vector<double> ratios;       ///< one per kept pair, in pair order
  int skipped = 0;                  ///< coincident pairs
  std::vector<double> bin_edges;    ///< histogram of ratios
  std::vector<int> bin_counts;
};

/// Ratios |grad(W1) - grad(W2)| / |W1 - W2| in the column-norm-sum metric.
/// Pair p uses Rng(derive_seed(seed, p)). Throws ConfigError for no-bias
/// parameters or when pairs < 1.
LipschitzEstimate lipschitz_estimate(const PairSampler& sampler, const LabeledDataset& data,
                                     const Objective& objective, int pairs, std::uint64_t seed, int threads = 1,
                                     int bins = 20);

/// Sampler for Gaussian W1 and W2 = W1 + scale * N(0, 1), both with the
/// bias total split evenly over the neurons.
PairSampler gaussian_pair_sampler(int d, const OutputMap& v, double bias_total, double perturbation = 0.1);

}  // namespace phaselab
