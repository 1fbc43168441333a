#pragma once

#include "phaselab/network.hpp"

#include <span>
#include <vector>

namespace phaselab {

/// Finite labelled sample set. Rows of `x` are inputs; labels are 0-based.
class LabeledDataset {
public:
  LabeledDataset() = default;
  LabeledDataset(Matrix x, std::vector<int> labels, int classes);

  int size() const { return static_cast<int>(x_.rows()); }
  int dim() const { return static_cast<int>(x_.cols()); }
  int classes() const { return classes_; }
  const Matrix& inputs() const { return x_; }
  const std::vector<int>& labels() const { return labels_; }
  Vector input(int s) const { return x_.row(s).transpose(); }
  int label(int s) const { return labels_[static_cast<std::size_t>(s)]; }

  /// Sample indices of class i, in ascending order.
  const std::vector<int>& class_indices(int cls) const;

  /// Sub-dataset made of the listed samples (order preserved).
  LabeledDataset subset(std::span<const int> indices) const;
  LabeledDataset only_class(int cls) const { return subset(class_indices(cls)); }

  /// Concatenation; both sides must share dim and class count.
  static LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

private:
  Matrix x_;
  std::vector<int> labels_;
  int classes_ = 0;
  std::vector<std::vector<int>> by_class_;
};

/// Sum with a fixed binary-split order; error grows like log(n) ulps.
double pairwise_sum(std::span<const double> values);

double sample_loss(const NetworkParams& params, const Vector& x, int label);

/// Mean hinge loss over the class-i samples. Throws ConfigError if the class is empty.
double class_loss(const NetworkParams& params, const LabeledDataset& data, int cls);

/// Mean hinge loss over every sample in the dataset.
double dataset_loss(const NetworkParams& params, const LabeledDataset& data);

/// Strict active sets of one dataset at one parameter point.
///   margin(s, i): f_y < f_i + 1 for i != y (false on the diagonal)
///   relu(s, j):   <w_j, x_s> > b_j
struct ActiveSets {
  std::vector<std::vector<bool>> margin;
  std::vector<std::vector<bool>> relu;
};

ActiveSets active_sets(const NetworkParams& params, const LabeledDataset& data);

/// Mean over the batch of the per-sample subgradient
///   grad_{w_j} = -sum_{i != y} (v_{y,j} - v_{i,j}) 1[f_y < f_i + 1] 1[<w_j,x> > b_j] x.
/// Returned with the shape of W (d x k).
Matrix subgradient(const NetworkParams& params, const LabeledDataset& batch);

/// Training objective over a subset of classes: per-class mean losses l_i
/// combined either as their average ((1/|C|) sum l_i, the default) or their sum.
struct Objective {
  enum class Reduction { kMean, kSum };
  std::vector<int> classes;  ///< empty = all classes of the dataset
  Reduction reduction = Reduction::kMean;
};

struct Evaluation {
  double loss = 0.0;         ///< objective value
  Vector class_losses;       ///< l_i for every class of the dataset (NaN if the class is empty)
  Matrix gradient;           ///< d x k gradient of the objective
};

/// One pass computing the objective, every class loss and the objective's subgradient.
Evaluation evaluate(const NetworkParams& params, const LabeledDataset& data, const Objective& objective);

/// Central difference (l(W + hU) - l(W - hU)) / (2h) of dataset_loss.
double directional_derivative_fd(const NetworkParams& params, const LabeledDataset& batch,
                                 const Matrix& direction, double h);

/// Smallest distance of any sample to a kink of the loss:
/// min over (s, j) of |<w_j,x_s> - b_j| and over (s, i != y) of |f_y - f_i - 1|.
double kink_distance(const NetworkParams& params, const LabeledDataset& data);

/// Upper bound on how far a move of W by h*U can shift any pre-activation or
/// margin on this dataset; if below kink_distance, no kink is crossed.
double max_kink_shift(const NetworkParams& params, const LabeledDataset& data, const Matrix& direction,
                      double h);

}  // namespace phaselab
