#pragma once

#include "phaselab/network.hpp"
#include "phaselab/rng.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace phaselab {

/// Unit directions w_j / |w_j| of a set of neurons.
struct DirectionSet {
  Matrix dirs;                     ///< d x m, unit columns
  std::vector<int> source_indices; ///< neuron index of each column
  std::vector<int> dropped;        ///< neurons skipped for |w_j| < min_norm

  int dim() const { return static_cast<int>(dirs.rows()); }
  int count() const { return static_cast<int>(dirs.cols()); }
};

/// Normalizes the selected columns of `w` (all columns if `columns` is empty).
/// When `basis` (d x d_i, orthonormal columns) is given, directions are taken
/// in its coordinates, i.e. of the projections onto its span.
DirectionSet make_direction_set(const Matrix& w, std::span<const int> columns = {},
                                const Matrix* basis = nullptr, double min_norm = 1e-12);

/// Builds a set straight from direction vectors (normalized here).
DirectionSet direction_set_from(const Matrix& vectors);

enum class GcVerdict { kHolds, kFails, kDegenerate };

std::string to_string(GcVerdict verdict);

/// Outcome of the interior-containment test.
///
/// kHolds: `hull_coeffs` are strictly positive convex weights with
/// sum_j lambda_j w_j = 0 and the directions span R^d, so the origin is an
/// interior point of their hull. kFails: `separator` is a unit n with
/// <n, w_j> >= 0 for every j (all directions in one closed hemisphere, and in
/// the open one when the margin is negative). kDegenerate: the origin is on
/// the hull boundary up to tolerance.
struct GcCertificate {
  GcVerdict verdict = GcVerdict::kDegenerate;
  Vector hull_coeffs;
  Vector separator;
  /// LP optimum eps* = max min_j lambda_j; nullopt when no convex combination
  /// of the directions reaches the origin's affine hull (strictly failing).
  std::optional<double> margin;
};

constexpr double kGcTolerance = 1e-9;

/// LP test: maximize eps s.t. sum_j lambda_j w_j = 0, sum_j lambda_j = 1,
/// lambda_j >= eps. Holds iff eps* > tol and the directions span R^d.
/// Throws ConfigError for an empty set.
GcCertificate gc_check(const DirectionSet& dirs, double tol = kGcTolerance);

/// Planar oracle: sorts the angles and compares the largest circular gap to pi.
/// Throws ConfigError unless d == 2.
GcCertificate gc_check_2d(const DirectionSet& dirs, double tol = kGcTolerance);

/// Re-checks the witness of a non-degenerate certificate by direct arithmetic.
bool verify_certificate(const DirectionSet& dirs, const GcCertificate& cert, double tol = kGcTolerance);

/// Probability that k uniform directions on S^{d-1} satisfy the condition:
/// 2^{1-k} sum_{j=d}^{k-1} C(k-1, j), evaluated in exact integer arithmetic.
double gc_probability(int d, int k);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
};

/// Draws `trials` sets of k normalized Gaussian directions and counts gc_check
/// holds verdicts. Trial t uses the stream derive_seed(seed, t).
MonteCarloEstimate gc_probability_mc(int d, int k, std::uint64_t trials, std::uint64_t seed, int threads = 1);

}  // namespace phaselab
