#include <doctest.h>

#include "phaselab/loss.hpp"
#include "phaselab/rng.hpp"

#include <cmath>

using namespace phaselab;

namespace {

Matrix gaussian(Rng& rng, int rows, int cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = scale * rng.normal();
  return m;
}

LabeledDataset random_dataset(Rng& rng, int count, int dim, int classes) {
  Matrix x = gaussian(rng, count, dim);
  std::vector<int> labels(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) labels[static_cast<std::size_t>(s)] = s % classes;
  return LabeledDataset(std::move(x), std::move(labels), classes);
}

// Samples of class c live in coordinates [2c, 2c + 2) of R^{2n}.
LabeledDataset block_dataset(Rng& rng, int per_class, int classes) {
  const int dim = 2 * classes;
  Matrix x = Matrix::Zero(per_class * classes, dim);
  std::vector<int> labels;
  for (int c = 0; c < classes; ++c) {
    for (int s = 0; s < per_class; ++s) {
      const int row = c * per_class + s;
      x(row, 2 * c) = rng.normal();
      x(row, 2 * c + 1) = rng.normal();
      labels.push_back(c);
    }
  }
  return LabeledDataset(std::move(x), std::move(labels), classes);
}

}  // namespace

TEST_CASE("sample_loss with zero weights is n - 1") {
  for (int n = 2; n <= 5; ++n) {
    auto params = make_params(Matrix::Zero(3, n), build_output_map(n, n, 1.0));
    Vector x = Vector::Ones(3);
    CHECK(sample_loss(params, x, 0) == doctest::Approx(n - 1));
  }
}

TEST_CASE("class_loss: zero weights, singleton, and balanced decomposition") {
  Rng rng(3);
  auto data = random_dataset(rng, 40, 3, 2);
  auto zero = make_params(Matrix::Zero(3, 4), build_output_map(2, 4, 1.0));
  CHECK(class_loss(zero, data, 0) == doctest::Approx(1.0));
  CHECK(class_loss(zero, data, 1) == doctest::Approx(1.0));

  auto params = make_params(gaussian(rng, 3, 4), build_output_map(2, 4, 1.0));
  const int idx[] = {5};
  auto single = data.subset(idx);
  CHECK(class_loss(params, single, data.label(5)) == doctest::Approx(sample_loss(params, data.input(5), data.label(5))));

  auto balanced = random_dataset(rng, 60, 3, 3);
  auto p3 = make_params(gaussian(rng, 3, 6), build_output_map(3, 6, 1.0));
  double mean_of_classes = 0.0;
  for (int c = 0; c < 3; ++c) mean_of_classes += class_loss(p3, balanced, c) / 3.0;
  CHECK(dataset_loss(p3, balanced) == doctest::Approx(mean_of_classes).epsilon(1e-12));

  auto only0 = data.only_class(0);
  CHECK_THROWS_AS(class_loss(params, only0, 1), ConfigError);
}

TEST_CASE("subgradient: hand-computed single neuron step") {
  // Class 0 sample x = (1, 0); neuron 0 (owner 0) at (0.1, 0); neuron 1 (owner 1) at 0.
  Matrix w = Matrix::Zero(2, 2);
  w(0, 0) = 0.1;
  auto params = make_params(w, build_output_map(2, 2, 1.0));
  Matrix x(1, 2);
  x << 1.0, 0.0;
  LabeledDataset data(x, {0}, 2);
  const Matrix g = subgradient(params, data);
  CHECK(g(0, 0) == doctest::Approx(-2.0));
  CHECK(g(1, 0) == 0.0);
  CHECK(g.col(1).isZero());
  const Matrix stepped = params.w - 0.1 * g;
  CHECK(stepped(0, 0) == doctest::Approx(0.3));
  CHECK(stepped(1, 0) == 0.0);
}

TEST_CASE("subgradient: margin boundary and satisfied margins contribute nothing") {
  Matrix w = Matrix::Zero(2, 2);
  w(0, 0) = 0.5;  // f_0 - f_1 = 2 * 0.5 = 1 exactly at x = (1, 0)
  auto params = make_params(w, build_output_map(2, 2, 1.0));
  Matrix x(1, 2);
  x << 1.0, 0.0;
  LabeledDataset data(x, {0}, 2);
  CHECK(sample_loss(params, data.input(0), 0) == 0.0);
  CHECK(subgradient(params, data).isZero());
  const auto sets = active_sets(params, data);
  CHECK_FALSE(sets.margin[0][1]);
  CHECK(sets.relu[0][0]);

  Matrix big = w;
  big(0, 0) = 3.0;
  params.w = big;
  CHECK(subgradient(params, data).isZero());
}

TEST_CASE("directional derivative: zero direction and agreement at generic points") {
  Rng rng(5);
  auto data = random_dataset(rng, 30, 3, 3);
  auto params = make_params(gaussian(rng, 3, 6), build_output_map(3, 6, 1.0));
  CHECK(directional_derivative_fd(params, data, Matrix::Zero(3, 6), 1e-6) == 0.0);
  CHECK_THROWS_AS(directional_derivative_fd(params, data, Matrix::Zero(3, 6), 0.0), ConfigError);

  int checked = 0;
  for (int attempt = 0; attempt < 20000 && checked < 100; ++attempt) {
    params.w = gaussian(rng, 3, 6);
    if (kink_distance(params, data) < 1e-3) continue;
    Matrix u = gaussian(rng, 3, 6);
    u /= u.norm();
    const double analytic = (subgradient(params, data).array() * u.array()).sum();
    const double fd = directional_derivative_fd(params, data, u, 1e-6);
    CHECK(std::abs(analytic - fd) <= 1e-4 * std::max(1.0, std::abs(analytic)));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("one-sided differences agree inside a linear piece") {
  Rng rng(6);
  auto data = random_dataset(rng, 50, 2, 2);
  int checked = 0;
  for (int attempt = 0; attempt < 5000 && checked < 20; ++attempt) {
    auto params = make_params(gaussian(rng, 2, 4), build_output_map(2, 4, 1.0));
    Matrix u = gaussian(rng, 2, 4);
    u /= u.norm();
    const double h = 1e-4;
    if (max_kink_shift(params, data, u, h) >= kink_distance(params, data)) continue;
    NetworkParams plus = params, minus = params;
    plus.w += h * u;
    minus.w -= h * u;
    const double l0 = dataset_loss(params, data);
    const double forward_diff = (dataset_loss(plus, data) - l0) / h;
    const double backward_diff = (l0 - dataset_loss(minus, data)) / h;
    CHECK(std::abs(forward_diff - backward_diff) <= 1e-10);
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("property: gradient columns stay in the span of the batch subspace") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto data = block_dataset(rng, 15, 3);
    auto params = make_params(gaussian(rng, 6, 6), build_output_map(3, 6, 1.0));
    for (int c = 0; c < 3; ++c) {
      const Matrix g = subgradient(params, data.only_class(c));
      Matrix residual = g;
      residual.middleRows(2 * c, 2).setZero();
      CHECK(residual.norm() < 1e-12);
    }
  }
}

TEST_CASE("property: class loss vanishes exactly when every margin is met") {
  Rng rng(8);
  int zero_cases = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto data = random_dataset(rng, 8, 2, 2);
    auto params = make_params(gaussian(rng, 2, 6, 3.0), build_output_map(2, 6, 1.0));
    for (int c = 0; c < 2; ++c) {
      bool all_met = true;
      for (int s : data.class_indices(c)) {
        const auto f = forward(params, data.input(s)).f;
        for (int r = 0; r < 2; ++r) {
          if (r != c && !(f(c) >= f(r) + 1.0)) all_met = false;
        }
      }
      const bool zero = class_loss(params, data, c) == 0.0;
      CHECK(zero == all_met);
      zero_cases += zero ? 1 : 0;
    }
  }
  CHECK(zero_cases > 0);
}

TEST_CASE("property: zero loss is preserved by scaling W up") {
  Rng rng(9);
  int seen = 0;
  for (int trial = 0; trial < 500 && seen < 30; ++trial) {
    auto data = random_dataset(rng, 6, 2, 2);
    auto params = make_params(gaussian(rng, 2, 8, 4.0), build_output_map(2, 8, 1.0));
    if (dataset_loss(params, data) != 0.0) continue;
    ++seen;
    for (double c : {1.5, 2.0, 10.0}) {
      NetworkParams scaled = params;
      scaled.w *= c;
      CHECK(dataset_loss(scaled, data) == 0.0);
    }
  }
  CHECK(seen > 0);
}

TEST_CASE("evaluate: objective reductions and class weights") {
  Rng rng(10);
  auto data = random_dataset(rng, 40, 3, 2);
  auto params = make_params(gaussian(rng, 3, 4), build_output_map(2, 4, 1.0));
  const auto mean = evaluate(params, data, {});
  CHECK(mean.loss == doctest::Approx(dataset_loss(params, data)).epsilon(1e-12));
  CHECK((mean.gradient - subgradient(params, data)).norm() < 1e-12);

  Objective sum;
  sum.reduction = Objective::Reduction::kSum;
  const auto summed = evaluate(params, data, sum);
  CHECK(summed.loss == doctest::Approx(2.0 * mean.loss).epsilon(1e-12));

  Objective only1;
  only1.classes = {1};
  const auto one = evaluate(params, data, only1);
  CHECK(one.loss == doctest::Approx(class_loss(params, data, 1)));
  CHECK((one.gradient - subgradient(params, data.only_class(1))).norm() < 1e-12);
}

TEST_CASE("pairwise sum") {
  std::vector<double> values(1000, 0.1);
  CHECK(pairwise_sum(values) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum({}) == 0.0);
}
