#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace phaselab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised for invalid configurations and violated preconditions.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when array shapes disagree.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Column-wise l2-norm sum, |W| = sum_j |w_j|.
double column_norm_sum(const Matrix& w);

/// Fixed second-layer map with entries +-v. Stored n x k (class i, neuron j).
///
/// Every neuron has exactly one owner class (the only positive entry in its
/// column) and every class owns at least one neuron.
class OutputMap {
public:
  OutputMap() = default;

  /// Builds a map from explicit entries; throws ConfigError unless the three
  /// structural conditions hold for some common magnitude v > 0.
  explicit OutputMap(Matrix entries);

  int classes() const { return static_cast<int>(entries_.rows()); }
  int neurons() const { return static_cast<int>(entries_.cols()); }
  double magnitude() const { return magnitude_; }
  double operator()(int cls, int neuron) const { return entries_(cls, neuron); }
  const Matrix& entries() const { return entries_; }

  /// Owner class (0-based) of neuron j.
  int owner(int neuron) const { return owners_[static_cast<std::size_t>(neuron)]; }
  const std::vector<int>& owners() const { return owners_; }

  /// Indices of the neurons owned by class i.
  std::vector<int> owned_by(int cls) const;

private:
  Matrix entries_;
  std::vector<int> owners_;
  double magnitude_ = 0.0;
};

/// Round-robin map: neuron j is owned by class j mod n (0-based).
/// Requires k >= n.
OutputMap build_output_map(int classes, int neurons, double magnitude);

/// Literal check of the three structural conditions on a raw n x k matrix.
/// Returns an empty string when all hold, otherwise a description of the
/// first violated clause.
std::string output_map_violation(const Matrix& entries, double tol = 0.0);

enum class BiasMode { kNoBias, kBias };

struct NetworkParams {
  Matrix w;   ///< d x k, column j is neuron j
  Vector b;   ///< length k, non-negative
  OutputMap v;
  BiasMode mode = BiasMode::kNoBias;

  int input_dim() const { return static_cast<int>(w.rows()); }
  int neurons() const { return static_cast<int>(w.cols()); }
  int classes() const { return v.classes(); }

  /// Throws ConfigError / DimensionError on any broken invariant:
  /// shape agreement, finite weights, b == 0 in no-bias mode,
  /// b >= 0 and 0 < sum(b) < 1 in bias mode.
  void validate() const;
};

/// Convenience constructor; b is zero in no-bias mode and b_j = bias_total / k
/// in bias mode.
NetworkParams make_params(Matrix w, OutputMap v, double bias_total = 0.0);

struct ForwardResult {
  Vector f;  ///< class scores, length n
  Vector h;  ///< pre-activations <w_j, x> - b_j, length k
};

ForwardResult forward(const NetworkParams& params, const Vector& x);

/// Lowest index attaining max f.
int argmax_lowest(const Vector& f);

int predict(const NetworkParams& params, const Vector& x);

/// Binary output sum_{owner 0} relu(h_j) - sum_{owner 1} relu(h_j).
/// Requires a two-class map. Evaluated independently of forward().
double forward_binary(const NetworkParams& params, const Vector& x);

/// Binary prediction: class 0 when forward_binary > 0, class 1 otherwise
/// (so sign(0) maps to the second class).
int predict_binary(const NetworkParams& params, const Vector& x);

}  // namespace phaselab
