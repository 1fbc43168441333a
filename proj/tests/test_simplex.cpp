#include <doctest.h>

#include "phaselab/rng.hpp"
#include "phaselab/simplex.hpp"

#include <cmath>

using namespace phaselab;

TEST_CASE("solve_lp: small optimum with known duals") {
  // max x1 + 2 x2 s.t. x1 + x2 + s = 4, x1 + 3 x2 + t = 6.
  Matrix a(2, 4);
  a << 1, 1, 1, 0, 1, 3, 0, 1;
  Vector b(2);
  b << 4, 6;
  Vector c(4);
  c << 1, 2, 0, 0;
  const auto r = solve_lp(a, b, c);
  REQUIRE(r.status == LpResult::Status::kOptimal);
  CHECK(r.objective == doctest::Approx(5.0));
  CHECK(r.x(0) == doctest::Approx(3.0));
  CHECK(r.x(1) == doctest::Approx(1.0));
  CHECK(b.dot(r.y) == doctest::Approx(5.0));
  CHECK(((a.transpose() * r.y - c).array() >= -1e-9).all());
}

TEST_CASE("solve_lp: infeasible gives a Farkas ray") {
  // x1 + x2 = -1 with x >= 0.
  Matrix a(1, 2);
  a << 1, 1;
  Vector b(1);
  b << -1;
  const auto r = solve_lp(a, b, Vector::Zero(2));
  REQUIRE(r.status == LpResult::Status::kInfeasible);
  CHECK(b.dot(r.y) < 0.0);
  CHECK(((a.transpose() * r.y).array() >= -1e-12).all());
}

TEST_CASE("solve_lp: unbounded") {
  Matrix a(1, 2);
  a << 1, -1;
  Vector b(1);
  b << 0;
  Vector c(2);
  c << 1, 0;
  CHECK(solve_lp(a, b, c).status == LpResult::Status::kUnbounded);
}

TEST_CASE("solve_lp: degenerate and redundant rows") {
  Matrix a(3, 3);
  a << 1, 1, 1, 2, 2, 2, 1, 0, 0;
  Vector b(3);
  b << 1, 2, 0;
  Vector c(3);
  c << 0, 1, 0;
  const auto r = solve_lp(a, b, c);
  REQUIRE(r.status == LpResult::Status::kOptimal);
  CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("property: strong duality on random feasible bounded programs") {
  Rng rng(31);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + trial % 4;
    const int n = m + 1 + trial % 5;
    Matrix a(m, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < m; ++i) a(i, j) = rng.normal();
    Vector x0(n);
    for (int j = 0; j < n; ++j) x0(j) = rng.uniform();
    const Vector b = a * x0;
    // Bounded: add the row sum(x) = sum(x0).
    Matrix ab(m + 1, n);
    ab.topRows(m) = a;
    ab.row(m).setOnes();
    Vector bb(m + 1);
    bb.head(m) = b;
    bb(m) = x0.sum();
    Vector c(n);
    for (int j = 0; j < n; ++j) c(j) = rng.normal();
    const auto r = solve_lp(ab, bb, c);
    REQUIRE(r.status == LpResult::Status::kOptimal);
    CHECK(c.dot(r.x) == doctest::Approx(r.objective).epsilon(1e-9));
    CHECK(bb.dot(r.y) == doctest::Approx(r.objective).epsilon(1e-8));
    CHECK((ab * r.x - bb).norm() < 1e-8);
    CHECK((r.x.array() >= -1e-10).all());
    CHECK(r.objective >= c.dot(x0) - 1e-9);
    ++solved;
  }
  CHECK(solved == 200);
}
