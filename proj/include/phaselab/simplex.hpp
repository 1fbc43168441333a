#pragma once

#include "phaselab/network.hpp"

namespace phaselab {

/// Dense two-phase tableau simplex for
///
///     maximize c^T x  subject to  A x = b,  x >= 0.
///
/// Bland's rule is used in both phases, so the method terminates on
/// degenerate problems. Sized for the tiny programs of the hull test
/// (a handful of rows, a few dozen columns).
struct LpResult {
  enum class Status { kOptimal, kInfeasible, kUnbounded };
  Status status = Status::kInfeasible;
  double objective = 0.0;
  Vector x;       ///< primal solution (optimal only)
  /// Optimal: dual prices y with A^T y >= c and b^T y == objective.
  /// Infeasible: Farkas ray y with A^T y >= 0 and b^T y < 0.
  Vector y;
  int pivots = 0;
};

struct LpOptions {
  double pivot_tol = 1e-12;
  double cost_tol = 1e-12;
  double feasibility_tol = 1e-10;
  int max_pivots = 10000;
};

LpResult solve_lp(const Matrix& a, const Vector& b, const Vector& c, const LpOptions& options = {});

}  // namespace phaselab
