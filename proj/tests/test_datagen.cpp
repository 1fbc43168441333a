#include <doctest.h>

#include "phaselab/datagen.hpp"
#include "phaselab/geometry.hpp"
#include "phaselab/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace phaselab;

TEST_CASE("subspace pair: orthogonality, unit v2, principal angle") {
  const auto ortho = make_subspace_pair(std::numbers::pi / 2);
  CHECK((ortho.basis(0).transpose() * ortho.basis(1)).cwiseAbs().maxCoeff() < 1e-15);
  for (double th : {0.1, 0.5, 1.0, 1.4}) CHECK(make_subspace_pair(th).v2.norm() == doctest::Approx(1.0).epsilon(1e-15));
  const auto p = make_subspace_pair(std::numbers::pi / 3);
  CHECK(std::abs(principal_angle(p.basis(0), p.basis(1)) - std::numbers::pi / 3) < 1e-12);
  CHECK_THROWS_AS(make_subspace_pair(0.0), ConfigError);
  CHECK_THROWS_AS(make_subspace_pair(2.0), ConfigError);
  CHECK_THROWS_AS(make_subspace_pair(-0.3), ConfigError);
}

TEST_CASE("grid dataset: size, radii and orthogonality at zero noise") {
  const auto spec = GridSpec::standard();
  CHECK(spec.radii.size() == 11);
  CHECK(spec.angles.size() == 80);
  CHECK(spec.radii.front() == 2.0);
  CHECK(spec.radii.back() == 1.0);
  const auto data = grid_dataset(make_subspace_pair(std::numbers::pi / 2), spec);
  CHECK(data.size() == 1760);
  CHECK(data.class_indices(0).size() == 880);
  for (int s = 0; s < data.size(); ++s) {
    const double r = data.input(s).norm();
    CHECK(r >= 1.0 - 1e-15);
    CHECK(r <= 2.0 + 1e-15);
  }
  const Matrix a = data.only_class(0).inputs();
  const Matrix b = data.only_class(1).inputs();
  CHECK((a * b.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  const auto again = grid_dataset(make_subspace_pair(std::numbers::pi / 2), spec);
  CHECK(again.inputs() == data.inputs());
  CHECK(grid_dataset_planar(spec).size() == 880);
}

TEST_CASE("grid dataset: noisy norms stay in the sanity band") {
  const double sigma = 0.05;
  Rng rng(17);
  const auto data = grid_dataset(make_subspace_pair(1.0), GridSpec::standard(sigma), &rng);
  int inside = 0;
  for (int s = 0; s < data.size(); ++s) {
    const double r = data.input(s).norm();
    inside += (r >= 1.0 - 4 * sigma && r <= 2.0 + 4 * sigma) ? 1 : 0;
  }
  CHECK(inside >= data.size() - 2);
  CHECK_THROWS_AS(grid_dataset(make_subspace_pair(1.0), GridSpec::standard(sigma)), ConfigError);
}

TEST_CASE("annulus sampling: radii, symmetry and area ratio") {
  AnnulusDistribution dist{Matrix::Identity(2, 2), 1.0, 2.0};
  Rng rng(23);
  const int count = 40000;
  const auto data = sample_annulus(dist, count, 0, 1, rng);
  int inner = 0;
  Vector mean = Vector::Zero(2);
  for (int s = 0; s < count; ++s) {
    const double r = data.input(s).norm();
    CHECK(r >= 1.0 - 1e-12);
    CHECK(r <= 2.0 + 1e-12);
    inner += r <= 1.5 ? 1 : 0;
    mean += data.input(s);
  }
  mean /= count;
  CHECK(mean.norm() < 5.0 / std::sqrt(static_cast<double>(count)) * 2.0);
  const double p = 5.0 / 12.0;
  const double se = std::sqrt(p * (1 - p) / count);
  CHECK(std::abs(static_cast<double>(inner) / count - p) < 4 * se);
  CHECK(dist.volume() == doctest::Approx(3 * std::numbers::pi));
}

TEST_CASE("property: annulus samples lie in their subspace") {
  Rng rng(24);
  for (int trial = 0; trial < 40; ++trial) {
    const int classes = 1 + trial % 3;
    const int di = 1 + trial % 4;
    const auto bases = block_bases(classes, di);
    const int c = trial % classes;
    AnnulusDistribution dist{bases[static_cast<std::size_t>(c)], 0.5 + rng.uniform(), 3.0};
    const auto data = sample_annulus(dist, 50, c, classes, rng);
    const Matrix& basis = dist.basis;
    for (int s = 0; s < data.size(); ++s) {
      const Vector x = data.input(s);
      CHECK((x - basis * (basis.transpose() * x)).norm() < 1e-12);
    }
  }
}

TEST_CASE("init_random: determinism, variance and column norm median") {
  Rng a(5), b(5);
  CHECK(init_random(3, 7, a) == init_random(3, 7, b));
  Rng rng(6);
  const Matrix w = init_random(2, 50000, rng);
  const double var = w.array().square().mean() - std::pow(w.mean(), 2);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  std::vector<double> norms;
  for (int j = 0; j < w.cols(); ++j) norms.push_back(w.col(j).norm());
  std::nth_element(norms.begin(), norms.begin() + norms.size() / 2, norms.end());
  const double chi2_median = std::sqrt(2 * std::log(2.0));
  CHECK(norms[norms.size() / 2] == doctest::Approx(chi2_median).epsilon(0.03));
}

TEST_CASE("init_halfspace: first coordinate non-negative, rest matches init_random") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng a(seed), b(seed);
    const Matrix h = init_halfspace(3, 6, a);
    const Matrix r = init_random(3, 6, b);
    CHECK((h.row(0).array() >= 0.0).all());
    CHECK(h.row(0) == r.row(0).cwiseAbs());
    CHECK(h.bottomRows(2) == r.bottomRows(2));
  }
}

TEST_CASE("init_halfspace never satisfies the geometric condition") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    const int d = 2 + static_cast<int>(seed % 3);
    const int k = 3 + static_cast<int>(seed % 20);
    const auto verdict = gc_check(make_direction_set(init_halfspace(d, k, rng))).verdict;
    CHECK(verdict != GcVerdict::kHolds);
  }
}

TEST_CASE("kelvin transform") {
  Vector x(2);
  x << 2.0, 0.0;
  CHECK(kelvin(x)(0) == doctest::Approx(0.5));
  x << 0.5, 0.5;
  CHECK(kelvin(x)(0) == doctest::Approx(1.0));
  CHECK(kelvin(x)(1) == doctest::Approx(1.0));
  x << 0.6, 0.8;
  CHECK((kelvin(x) - x).norm() < 1e-15);
  CHECK_THROWS_AS(kelvin(Vector::Zero(3)), ConfigError);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Vector y(3);
    for (int i = 0; i < 3; ++i) y(i) = rng.normal() * std::exp(rng.normal());
    CHECK((kelvin(kelvin(y)) - y).norm() <= 1e-12 * y.norm());
  }
}

TEST_CASE("rho curve: zero weights, range, and the zero-loss criterion") {
  auto zero = make_params(Matrix::Zero(2, 6), build_output_map(2, 6, 0.5));
  for (const auto& [theta, rho] : rho_curve(zero, 64)) CHECK(rho == 0.0);

  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = make_params(init_random(2, 6, rng) * 3.0, build_output_map(2, 6, 0.5));
    for (const auto& [theta, rho] : rho_curve(p, 90)) {
      CHECK(rho >= 0.0);
      CHECK(rho <= 1.0);
    }
  }

  // Owners on a triangle with inradius 1.01 reach margin 1 on the grid.
  Matrix w = Matrix::Zero(2, 6);
  const Matrix tri = regular_simplex(2) * (2 * 1.01);
  for (int j = 0; j < 3; ++j) w.col(2 * j) = tri.col(j);
  auto params = make_params(w, build_output_map(2, 6, 0.5));
  const auto data = grid_dataset_planar(GridSpec::standard());
  CHECK(class_loss(params, data, 0) == 0.0);
  for (int s = 0; s < data.size(); ++s) {
    const Vector x = data.input(s);
    const Vector u = x / x.norm();
    const double rho = std::min(1.0, std::max(0.0, forward_binary(params, u)));
    CHECK(rho >= kelvin(x).norm() - 1e-12);
  }
}
