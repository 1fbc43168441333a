#include "phaselab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace phaselab {

namespace {

class Tableau {
public:
  Tableau(const Matrix& a, const Vector& b, const LpOptions& options)
      : m_(a.rows()), n_(a.cols()), opt_(options), sign_(m_), t_(m_, n_ + m_), rhs_(m_), basis_(m_) {
    // Artificial columns start as the identity; they keep holding B^{-1}
    // through every pivot, which is where the dual prices are read from.
    t_.setZero();
    for (Eigen::Index r = 0; r < m_; ++r) {
      sign_(r) = b(r) < 0.0 ? -1.0 : 1.0;
      t_.row(r).head(n_) = sign_(r) * a.row(r);
      t_(r, n_ + r) = 1.0;
      rhs_(r) = sign_(r) * b(r);
      basis_[r] = n_ + r;
    }
  }

  // Runs Bland's-rule pivots for the given column costs. Columns at or past
  // `enter_limit` never enter. Returns false if the objective is unbounded.
  bool optimize(const Vector& cost, Eigen::Index enter_limit, int& pivots) {
    while (pivots < opt_.max_pivots) {
      const Vector d = reduced_costs(cost);
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < enter_limit; ++j) {
        if (d(j) < -opt_.cost_tol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < m_; ++r) {
        if (t_(r, enter) > opt_.pivot_tol) best = std::min(best, rhs_(r) / t_(r, enter));
      }
      // Bland: among minimum-ratio rows, the smallest basic index leaves.
      Eigen::Index leave = -1;
      for (Eigen::Index r = 0; r < m_; ++r) {
        if (t_(r, enter) <= opt_.pivot_tol) continue;
        if (rhs_(r) / t_(r, enter) > best + 1e-15) continue;
        if (leave < 0 || basis_[r] < basis_[leave]) leave = r;
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      ++pivots;
    }
    return true;
  }

  // Moves artificial variables still basic at level zero out of the basis
  // where a structural column allows it.
  void expel_artificials(int& pivots) {
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(r, j)) > opt_.pivot_tol) {
          pivot(r, j);
          ++pivots;
          break;
        }
      }
    }
  }

  Vector reduced_costs(const Vector& cost) const {
    Vector cb(m_);
    for (Eigen::Index r = 0; r < m_; ++r) cb(r) = cost(basis_[r]);
    return (t_.transpose() * cb) - cost;
  }

  double objective(const Vector& cost) const {
    double z = 0.0;
    for (Eigen::Index r = 0; r < m_; ++r) z += cost(basis_[r]) * rhs_(r);
    return z;
  }

  // y = c_B^T B^{-1}, mapped back to the unflipped rows.
  Vector duals(const Vector& cost) const {
    Vector cb(m_);
    for (Eigen::Index r = 0; r < m_; ++r) cb(r) = cost(basis_[r]);
    Vector y = t_.rightCols(m_).transpose() * cb;
    return y.cwiseProduct(sign_);
  }

  Vector primal() const {
    Vector x = Vector::Zero(n_);
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (basis_[r] < n_) x(basis_[r]) = rhs_(r);
    }
    return x;
  }

  double artificial_mass() const {
    double mass = 0.0;
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (basis_[r] >= n_) mass += rhs_(r);
    }
    return mass;
  }

  Eigen::Index rows() const { return m_; }
  Eigen::Index cols() const { return n_; }

private:
  void pivot(Eigen::Index row, Eigen::Index col) {
    const double inv = 1.0 / t_(row, col);
    t_.row(row) *= inv;
    rhs_(row) *= inv;
    t_(row, col) = 1.0;
    for (Eigen::Index r = 0; r < m_; ++r) {
      if (r == row) continue;
      const double factor = t_(r, col);
      if (factor == 0.0) continue;
      t_.row(r) -= factor * t_.row(row);
      rhs_(r) -= factor * rhs_(row);
      t_(r, col) = 0.0;
    }
    basis_[row] = col;
  }

  Eigen::Index m_;
  Eigen::Index n_;
  LpOptions opt_;
  Vector sign_;
  Matrix t_;
  Vector rhs_;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

LpResult solve_lp(const Matrix& a, const Vector& b, const Vector& c, const LpOptions& options) {
  if (a.rows() != b.size() || a.cols() != c.size()) throw DimensionError("LP data shapes disagree");
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  Tableau tab(a, b, options);
  LpResult result;

  Vector phase1 = Vector::Zero(n + m);
  phase1.tail(m).setConstant(-1.0);
  tab.optimize(phase1, n + m, result.pivots);
  if (tab.artificial_mass() > options.feasibility_tol) {
    result.status = LpResult::Status::kInfeasible;
    result.y = tab.duals(phase1);
    return result;
  }
  tab.expel_artificials(result.pivots);

  Vector phase2 = Vector::Zero(n + m);
  phase2.head(n) = c;
  if (!tab.optimize(phase2, n, result.pivots)) {
    result.status = LpResult::Status::kUnbounded;
    return result;
  }
  result.status = LpResult::Status::kOptimal;
  result.x = tab.primal();
  result.objective = tab.objective(phase2);
  result.y = tab.duals(phase2);
  return result;
}

}  // namespace phaselab
