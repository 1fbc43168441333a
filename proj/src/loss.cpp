#include "phaselab/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace phaselab {

LabeledDataset::LabeledDataset(Matrix x, std::vector<int> labels, int classes)
    : x_(std::move(x)), labels_(std::move(labels)), classes_(classes) {
  if (static_cast<std::size_t>(x_.rows()) != labels_.size()) {
    throw DimensionError("dataset has different numbers of inputs and labels");
  }
  if (classes_ < 1) throw ConfigError("dataset needs at least one class");
  if (!x_.allFinite()) throw ConfigError("dataset inputs must be finite");
  by_class_.assign(static_cast<std::size_t>(classes_), {});
  for (std::size_t s = 0; s < labels_.size(); ++s) {
    const int y = labels_[s];
    if (y < 0 || y >= classes_) throw ConfigError("dataset label out of range");
    by_class_[static_cast<std::size_t>(y)].push_back(static_cast<int>(s));
  }
}

const std::vector<int>& LabeledDataset::class_indices(int cls) const {
  if (cls < 0 || cls >= classes_) throw ConfigError("class index out of range");
  return by_class_[static_cast<std::size_t>(cls)];
}

LabeledDataset LabeledDataset::subset(std::span<const int> indices) const {
  Matrix x(static_cast<Eigen::Index>(indices.size()), x_.cols());
  std::vector<int> labels;
  labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = x_.row(indices[r]);
    labels.push_back(labels_[static_cast<std::size_t>(indices[r])]);
  }
  return LabeledDataset(std::move(x), std::move(labels), classes_);
}

LabeledDataset LabeledDataset::concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.dim() != b.dim() || a.classes() != b.classes()) {
    throw DimensionError("cannot concatenate datasets of different shape");
  }
  Matrix x(a.size() + b.size(), a.dim());
  x << a.inputs(), b.inputs();
  std::vector<int> labels = a.labels();
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  return LabeledDataset(std::move(x), std::move(labels), a.classes());
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 16;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

void check_shapes(const NetworkParams& params, const LabeledDataset& data) {
  if (data.dim() != params.input_dim()) throw DimensionError("dataset dimension differs from weight rows");
  if (data.classes() != params.classes()) throw DimensionError("dataset class count differs from output map");
  if (params.b.size() != params.w.cols() || params.v.neurons() != params.w.cols()) {
    throw DimensionError("network parameter shapes disagree");
  }
}

// Pre-activations (N x k) and scores (N x n) for every sample.
struct BatchForward {
  Matrix h;
  Matrix f;
};

BatchForward batch_forward(const NetworkParams& params, const Matrix& x) {
  BatchForward out;
  out.h = x * params.w;
  out.h.rowwise() -= params.b.transpose();
  out.f = out.h.cwiseMax(0.0) * params.v.entries().transpose();
  return out;
}

double row_loss(const Matrix& f, Eigen::Index s, int y) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < f.cols(); ++i) {
    if (i == y) continue;
    const double term = 1.0 - f(s, y) + f(s, i);
    if (term > 0.0) loss += term;
  }
  return loss;
}

}  // namespace

double sample_loss(const NetworkParams& params, const Vector& x, int label) {
  const auto fr = forward(params, x);
  if (label < 0 || label >= fr.f.size()) throw ConfigError("label out of range");
  double loss = 0.0;
  for (Eigen::Index i = 0; i < fr.f.size(); ++i) {
    if (i == label) continue;
    const double term = 1.0 - fr.f(label) + fr.f(i);
    if (term > 0.0) loss += term;
  }
  return loss;
}

double class_loss(const NetworkParams& params, const LabeledDataset& data, int cls) {
  check_shapes(params, data);
  const auto& idx = data.class_indices(cls);
  if (idx.empty()) throw ConfigError("class " + std::to_string(cls) + " has no samples");
  Matrix x(static_cast<Eigen::Index>(idx.size()), data.dim());
  for (std::size_t r = 0; r < idx.size(); ++r) x.row(static_cast<Eigen::Index>(r)) = data.inputs().row(idx[r]);
  const auto bf = batch_forward(params, x);
  std::vector<double> losses(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) losses[r] = row_loss(bf.f, static_cast<Eigen::Index>(r), cls);
  return pairwise_sum(losses) / static_cast<double>(idx.size());
}

double dataset_loss(const NetworkParams& params, const LabeledDataset& data) {
  check_shapes(params, data);
  if (data.size() == 0) throw ConfigError("dataset is empty");
  const auto bf = batch_forward(params, data.inputs());
  std::vector<double> losses(static_cast<std::size_t>(data.size()));
  for (int s = 0; s < data.size(); ++s) losses[static_cast<std::size_t>(s)] = row_loss(bf.f, s, data.label(s));
  return pairwise_sum(losses) / static_cast<double>(data.size());
}

ActiveSets active_sets(const NetworkParams& params, const LabeledDataset& data) {
  check_shapes(params, data);
  const auto bf = batch_forward(params, data.inputs());
  ActiveSets sets;
  sets.margin.assign(static_cast<std::size_t>(data.size()), std::vector<bool>(static_cast<std::size_t>(params.classes()), false));
  sets.relu.assign(static_cast<std::size_t>(data.size()), std::vector<bool>(static_cast<std::size_t>(params.neurons()), false));
  for (int s = 0; s < data.size(); ++s) {
    const int y = data.label(s);
    for (int i = 0; i < params.classes(); ++i) {
      if (i != y) sets.margin[static_cast<std::size_t>(s)][static_cast<std::size_t>(i)] = 1.0 - bf.f(s, y) + bf.f(s, i) > 0.0;
    }
    for (int j = 0; j < params.neurons(); ++j) sets.relu[static_cast<std::size_t>(s)][static_cast<std::size_t>(j)] = bf.h(s, j) > 0.0;
  }
  return sets;
}

namespace {

// Fills row s of `coeff` with the per-sample gradient coefficients scaled by
// `weight`, so that grad = X^T coeff. Returns the sample loss.
double accumulate_sample(const NetworkParams& params, const BatchForward& bf, Eigen::Index s, int y,
                         double weight, Matrix& coeff) {
  const auto& v = params.v.entries();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < bf.f.cols(); ++i) {
    if (i == y) continue;
    const double term = 1.0 - bf.f(s, y) + bf.f(s, i);
    if (!(term > 0.0)) continue;
    loss += term;
    if (weight == 0.0) continue;
    for (Eigen::Index j = 0; j < bf.h.cols(); ++j) {
      if (bf.h(s, j) > 0.0) coeff(s, j) -= weight * (v(y, j) - v(i, j));
    }
  }
  return loss;
}

}  // namespace

Matrix subgradient(const NetworkParams& params, const LabeledDataset& batch) {
  check_shapes(params, batch);
  if (batch.size() == 0) return Matrix::Zero(params.input_dim(), params.neurons());
  const auto bf = batch_forward(params, batch.inputs());
  Matrix coeff = Matrix::Zero(batch.size(), params.neurons());
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (int s = 0; s < batch.size(); ++s) accumulate_sample(params, bf, s, batch.label(s), weight, coeff);
  return batch.inputs().transpose() * coeff;
}

Evaluation evaluate(const NetworkParams& params, const LabeledDataset& data, const Objective& objective) {
  check_shapes(params, data);
  const int n = data.classes();
  std::vector<int> classes = objective.classes;
  if (classes.empty()) {
    classes.resize(static_cast<std::size_t>(n));
    std::iota(classes.begin(), classes.end(), 0);
  }
  std::vector<double> class_weight(static_cast<std::size_t>(n), 0.0);
  for (int c : classes) {
    if (c < 0 || c >= n) throw ConfigError("objective class out of range");
    const auto count = data.class_indices(c).size();
    if (count == 0) throw ConfigError("objective class " + std::to_string(c) + " has no samples");
    double w = 1.0 / static_cast<double>(count);
    if (objective.reduction == Objective::Reduction::kMean) w /= static_cast<double>(classes.size());
    class_weight[static_cast<std::size_t>(c)] = w;
  }

  const auto bf = batch_forward(params, data.inputs());
  Matrix coeff = Matrix::Zero(data.size(), params.neurons());
  std::vector<std::vector<double>> per_class(static_cast<std::size_t>(n));
  for (int c = 0; c < n; ++c) per_class[static_cast<std::size_t>(c)].reserve(data.class_indices(c).size());
  for (int s = 0; s < data.size(); ++s) {
    const int y = data.label(s);
    per_class[static_cast<std::size_t>(y)].push_back(
        accumulate_sample(params, bf, s, y, class_weight[static_cast<std::size_t>(y)], coeff));
  }

  Evaluation out;
  out.class_losses = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  for (int c = 0; c < n; ++c) {
    const auto& losses = per_class[static_cast<std::size_t>(c)];
    if (!losses.empty()) out.class_losses(c) = pairwise_sum(losses) / static_cast<double>(losses.size());
  }
  for (int c : classes) out.loss += out.class_losses(c);
  if (objective.reduction == Objective::Reduction::kMean) out.loss /= static_cast<double>(classes.size());
  out.gradient = data.inputs().transpose() * coeff;
  return out;
}

double directional_derivative_fd(const NetworkParams& params, const LabeledDataset& batch,
                                 const Matrix& direction, double h) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
  if (direction.rows() != params.w.rows() || direction.cols() != params.w.cols()) {
    throw DimensionError("direction shape differs from W");
  }
  NetworkParams plus = params;
  NetworkParams minus = params;
  plus.w += h * direction;
  minus.w -= h * direction;
  return (dataset_loss(plus, batch) - dataset_loss(minus, batch)) / (2.0 * h);
}

double kink_distance(const NetworkParams& params, const LabeledDataset& data) {
  check_shapes(params, data);
  const auto bf = batch_forward(params, data.inputs());
  double dist = std::numeric_limits<double>::infinity();
  for (int s = 0; s < data.size(); ++s) {
    for (int j = 0; j < params.neurons(); ++j) dist = std::min(dist, std::abs(bf.h(s, j)));
    const int y = data.label(s);
    for (int i = 0; i < params.classes(); ++i) {
      if (i != y) dist = std::min(dist, std::abs(bf.f(s, y) - bf.f(s, i) - 1.0));
    }
  }
  return dist;
}

double max_kink_shift(const NetworkParams& params, const LabeledDataset& data, const Matrix& direction,
                      double h) {
  double max_x = 0.0;
  for (int s = 0; s < data.size(); ++s) max_x = std::max(max_x, data.inputs().row(s).norm());
  double max_col = 0.0;
  double sum_col = 0.0;
  for (Eigen::Index j = 0; j < direction.cols(); ++j) {
    const double c = direction.col(j).norm();
    max_col = std::max(max_col, c);
    sum_col += c;
  }
  const double score_shift = 2.0 * params.v.magnitude() * sum_col;
  return h * max_x * std::max(max_col, score_shift);
}

}  // namespace phaselab
