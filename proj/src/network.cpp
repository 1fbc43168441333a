#include "phaselab/network.hpp"

#include <cmath>
#include <sstream>

namespace phaselab {

double column_norm_sum(const Matrix& w) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) total += w.col(j).norm();
  return total;
}

std::string output_map_violation(const Matrix& entries, double tol) {
  const auto n = entries.rows();
  const auto k = entries.cols();
  if (n < 1 || k < 1) return "output map must be non-empty";
  const double v = std::abs(entries(0, 0));
  if (!(v > 0.0)) return "magnitude v must be positive";
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (std::abs(std::abs(entries(i, j)) - v) > tol) {
        std::ostringstream os;
        os << "|v(" << i << "," << j << ")| differs from common magnitude " << v;
        return os.str();
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    bool has_positive = false;
    for (Eigen::Index j = 0; j < k; ++j) has_positive = has_positive || entries(i, j) > 0.0;
    if (!has_positive) {
      std::ostringstream os;
      os << "class " << i << " owns no neuron";
      return os.str();
    }
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(entries(i, j) > 0.0)) continue;
      for (Eigen::Index r = 0; r < n; ++r) {
        if (r != i && !(entries(r, j) < 0.0)) {
          std::ostringstream os;
          os << "neuron " << j << " positive for class " << i << " but not negative for class " << r;
          return os.str();
        }
      }
    }
  }
  return {};
}

OutputMap::OutputMap(Matrix entries) : entries_(std::move(entries)) {
  if (auto why = output_map_violation(entries_); !why.empty()) {
    throw ConfigError("invalid output map: " + why);
  }
  magnitude_ = std::abs(entries_(0, 0));
  owners_.assign(static_cast<std::size_t>(entries_.cols()), -1);
  for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      if (entries_(i, j) > 0.0) owners_[static_cast<std::size_t>(j)] = static_cast<int>(i);
    }
    if (owners_[static_cast<std::size_t>(j)] < 0) {
      throw ConfigError("invalid output map: neuron " + std::to_string(j) + " has no owner class");
    }
  }
}

std::vector<int> OutputMap::owned_by(int cls) const {
  std::vector<int> out;
  for (std::size_t j = 0; j < owners_.size(); ++j) {
    if (owners_[j] == cls) out.push_back(static_cast<int>(j));
  }
  return out;
}

OutputMap build_output_map(int classes, int neurons, double magnitude) {
  if (classes < 1) throw ConfigError("output map needs at least one class");
  if (neurons < classes) {
    std::ostringstream os;
    os << "output map needs k >= n (every class owns a neuron); got k=" << neurons
       << ", n=" << classes;
    throw ConfigError(os.str());
  }
  if (!(magnitude > 0.0) || !std::isfinite(magnitude)) {
    throw ConfigError("output map magnitude v must be positive and finite");
  }
  Matrix entries = Matrix::Constant(classes, neurons, -magnitude);
  for (int j = 0; j < neurons; ++j) entries(j % classes, j) = magnitude;
  return OutputMap(std::move(entries));
}

void NetworkParams::validate() const {
  if (w.cols() < 1) throw DimensionError("weight matrix needs at least one neuron");
  if (b.size() != w.cols()) throw DimensionError("bias length differs from neuron count");
  if (v.neurons() != w.cols()) throw DimensionError("output map neuron count differs from weight columns");
  if (!w.allFinite()) throw ConfigError("weights contain non-finite entries");
  if (mode == BiasMode::kNoBias) {
    if ((b.array() != 0.0).any()) throw ConfigError("no-bias mode requires b == 0 exactly");
  } else {
    if ((b.array() < 0.0).any()) throw ConfigError("bias entries must be non-negative");
    const double total = b.sum();
    if (!(total > 0.0 && total < 1.0)) throw ConfigError("bias mode requires 0 < sum(b) < 1");
  }
}

NetworkParams make_params(Matrix w, OutputMap v, double bias_total) {
  NetworkParams p;
  const auto k = w.cols();
  p.w = std::move(w);
  p.v = std::move(v);
  if (bias_total == 0.0) {
    p.b = Vector::Zero(k);
    p.mode = BiasMode::kNoBias;
  } else {
    p.b = Vector::Constant(k, bias_total / static_cast<double>(k));
    p.mode = BiasMode::kBias;
  }
  p.validate();
  return p;
}

ForwardResult forward(const NetworkParams& params, const Vector& x) {
  if (x.size() != params.w.rows()) throw DimensionError("input dimension differs from weight rows");
  if (params.b.size() != params.w.cols() || params.v.neurons() != params.w.cols()) {
    throw DimensionError("network parameter shapes disagree");
  }
  ForwardResult out;
  out.h = params.w.transpose() * x - params.b;
  out.f = params.v.entries() * out.h.cwiseMax(0.0);
  return out;
}

int argmax_lowest(const Vector& f) {
  int best = 0;
  for (Eigen::Index i = 1; i < f.size(); ++i) {
    if (f(i) > f(best)) best = static_cast<int>(i);
  }
  return best;
}

int predict(const NetworkParams& params, const Vector& x) {
  return argmax_lowest(forward(params, x).f);
}

double forward_binary(const NetworkParams& params, const Vector& x) {
  if (params.v.classes() != 2) throw ConfigError("binary output requires exactly two classes");
  if (x.size() != params.w.rows()) throw DimensionError("input dimension differs from weight rows");
  double positive = 0.0;
  double negative = 0.0;
  for (int j = 0; j < params.neurons(); ++j) {
    double h = -params.b(j);
    for (Eigen::Index r = 0; r < x.size(); ++r) h += params.w(r, j) * x(r);
    if (h <= 0.0) continue;
    if (params.v.owner(j) == 0) {
      positive += h;
    } else {
      negative += h;
    }
  }
  return positive - negative;
}

int predict_binary(const NetworkParams& params, const Vector& x) {
  return forward_binary(params, x) > 0.0 ? 0 : 1;
}

}  // namespace phaselab
