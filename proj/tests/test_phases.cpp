#include <doctest.h>

#include "phaselab/datagen.hpp"
#include "phaselab/phases.hpp"

#include <cmath>
#include <numbers>

using namespace phaselab;

namespace {

BoundInputs ones() {
  BoundInputs in;
  in.v = 1.0;
  in.eta = 1.0;
  in.R = 1.0;
  in.M = 1.0;
  in.m = 1.0;
  in.p_min = 1.0;
  in.p_max = 1.0;
  in.d = 2;
  in.n = 2;
  return in;
}

TrainResult planar_run(std::uint64_t seed, int width, bool halfspace) {
  const auto data = grid_dataset_planar(GridSpec::standard());
  Rng rng(seed);
  const Matrix w = halfspace ? init_halfspace(2, width, rng) : init_random(2, width, rng);
  TrainConfig cfg;
  cfg.objective.classes = {0};
  cfg.keep_snapshots = true;
  return train(make_params(w, build_output_map(2, width, 0.5)), data, cfg);
}

}  // namespace

TEST_CASE("cp_upper_bound") {
  BoundInputs in = ones();
  for (int d = 1; d <= 5; ++d) {
    in.d = d;
    CHECK(cp_upper_bound(in) == 1.0);
  }
  in.M = 2.0;
  in.d = 3;
  in.p_max = 0.5;
  in.p_min = 0.25;
  CHECK(cp_upper_bound(in) == doctest::Approx(2.0));
  double prev = 0.0;
  for (double M = 1.0; M < 5.0; M += 0.25) {
    in.M = M;
    const double c = cp_upper_bound(in);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("p_r_lower_bound: closed forms at d = 2 and d = 3") {
  BoundInputs in = ones();
  in.p_min = 0.7;
  // sin(beta) = 1/2, beta = pi/6.
  CHECK(p_r_lower_bound(in) == doctest::Approx(0.7 * (2.0 / (2 * std::numbers::pi)) * (std::numbers::pi / 6)));
  in.d = 3;
  CHECK(p_r_lower_bound(in) == doctest::Approx(0.7 * 0.5 * (1 - std::sqrt(3.0) / 2)).epsilon(1e-10));
  in.d = 5;  // int_0^beta sin^3 = 2/3 - cos b + cos^3 b / 3, |S^3| / |S^4| = 3 / (4 pi) * pi ... by formula
  const double b = std::numbers::pi / 6;
  const double integral = 2.0 / 3.0 - std::cos(b) + std::pow(std::cos(b), 3) / 3.0;
  CHECK(p_r_lower_bound(in) == doctest::Approx(0.7 * sphere_area(3) / sphere_area(4) * integral).epsilon(1e-10));
  in.p_min = 0.0;
  CHECK(p_r_lower_bound(in) == 0.0);
  in = ones();
  in.d = 1;
  CHECK_THROWS_AS(p_r_lower_bound(in), ConfigError);
  in = ones();
  in.R = 0.4;  // 2 v M R = 0.8
  CHECK_THROWS_AS(p_r_lower_bound(in), ConfigError);
}

TEST_CASE("sphere areas") {
  CHECK(sphere_area(0) == doctest::Approx(2.0));
  CHECK(sphere_area(1) == doctest::Approx(2 * std::numbers::pi));
  CHECK(sphere_area(2) == doctest::Approx(4 * std::numbers::pi));
}

TEST_CASE("t1 and phase-2 bounds: arithmetic and monotonicity") {
  BoundInputs in = ones();
  const double t1 = t1_bound(in);
  CHECK(std::isfinite(t1));
  CHECK(t1 > 0.0);
  const double pr = p_r_lower_bound(in);
  CHECK(t1 == doctest::Approx(1.0 / (pr * pr)));
  in.eta = 2.0;
  CHECK(t1_bound(in) == doctest::Approx(t1 / 2));

  BoundInputs toy = ones();
  toy.eta = 0.1;
  CHECK(phase2_sum_bound(toy) == doctest::Approx(160.0));
  toy.eta = 1e12;
  CHECK(phase2_sum_bound(toy) < 1e-9);

  in.p_min = 0.0;
  CHECK_THROWS_AS(t1_bound(in), ConfigError);
}

TEST_CASE("property: bounds move in the direction the formulas dictate") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    BoundInputs in;
    in.v = 0.5 + rng.uniform();
    in.eta = 0.01 + rng.uniform();
    in.M = 1.0 + rng.uniform();
    in.m = 0.5;
    in.R = 1.0 + 3 * rng.uniform();
    in.p_max = 0.1 + rng.uniform();
    in.p_min = in.p_max * rng.uniform() + 1e-3;
    in.d = 2 + trial % 4;
    in.n = 2 + trial % 3;
    const double t1 = t1_bound(in), p2 = phase2_sum_bound(in);
    CHECK(t1 > 0.0);
    CHECK(std::isfinite(t1));
    CHECK(p2 > 0.0);
    BoundInputs smaller_eta = in;
    smaller_eta.eta *= 0.5;
    CHECK(t1_bound(smaller_eta) > t1);
    CHECK(phase2_sum_bound(smaller_eta) > p2);
    BoundInputs larger_r = in;
    larger_r.R *= 1.5;
    CHECK(t1_bound(larger_r) > t1);
    CHECK(phase2_sum_bound(larger_r) > p2);
    CHECK(p_r_lower_bound(larger_r) < p_r_lower_bound(in));
  }
}

TEST_CASE("detect_phases: timeline matches gc_check on every snapshot") {
  const auto res = planar_run(4, 8, false);
  const auto v = build_output_map(2, 8, 0.5);
  const auto rep = detect_phases(res.trajectory, v, 0);
  CHECK(rep.t1_size + rep.t2_size == static_cast<int>(res.trajectory.size()));
  CHECK(rep.persistence >= 0.0);
  CHECK(rep.persistence <= 1.0);
  for (std::size_t i = 0; i < res.trajectory.size(); i += 7) {
    const auto dirs = make_direction_set(*res.trajectory[i].weights, v.owned_by(0));
    CHECK(rep.gc_timeline[i] == (gc_check(dirs).verdict == GcVerdict::kHolds));
  }
  REQUIRE(rep.first_hold.has_value());
  CHECK(rep.persistence >= 0.95);
}

TEST_CASE("detect_phases: half-space start is slow at t = 0; early stop gives one record") {
  const auto v = build_output_map(2, 8, 0.5);
  const auto res = planar_run(11, 8, true);
  const auto rep = detect_phases(res.trajectory, v, 0);
  CHECK_FALSE(rep.gc_timeline.front());
  REQUIRE(rep.first_hold.has_value());
  CHECK(*rep.first_hold > 0);

  // A start that already satisfies the condition.
  Matrix w(2, 8);
  for (int j = 0; j < 8; ++j) {
    const double a = 2 * std::numbers::pi * (j / 2) / 4.0;
    w(0, j) = 5 * std::cos(a);
    w(1, j) = 5 * std::sin(a);
  }
  for (int j = 1; j < 8; j += 2) w.col(j).setZero();
  TrainConfig cfg;
  cfg.objective.classes = {0};
  cfg.keep_snapshots = true;
  const auto done = train(make_params(w, v), grid_dataset_planar(GridSpec::standard()), cfg);
  const auto rep0 = detect_phases(done.trajectory, v, 0);
  CHECK(done.iterations == 0);
  CHECK(rep0.gc_timeline.size() == 1);
  CHECK(rep0.first_hold == 0);
  CHECK(rep0.t1_size == 0);

  TrainConfig no_snap;
  no_snap.objective.classes = {0};
  const auto bare = train(make_params(w, v), grid_dataset_planar(GridSpec::standard()), no_snap);
  CHECK_THROWS_AS(detect_phases(bare.trajectory, v, 0), ConfigError);
}

TEST_CASE("monotonicity audit: clean runs, frozen runs and a planted violation") {
  const auto v = build_output_map(2, 8, 0.5);
  const auto res = planar_run(2, 8, false);
  CHECK(monotonicity_audit(res.trajectory, v, 0).owner.empty());

  TrainConfig frozen;
  frozen.eta = 0.0;
  frozen.max_iters = 5;
  frozen.objective.classes = {0};
  Rng rng(1);
  const auto still = train(make_params(init_random(2, 8, rng), v), grid_dataset_planar(GridSpec::standard()), frozen);
  CHECK(monotonicity_audit(still.trajectory, v, 0).owner.empty());

  auto planted = res.trajectory;
  REQUIRE(planted.size() > 3);
  planted[2].neuron_norms(0) = planted[1].neuron_norms(0) - 1e-6;
  const auto rep = monotonicity_audit(planted, v, 0);
  REQUIRE(rep.owner.size() == 1);
  CHECK(rep.owner[0].t == planted[1].t);
  CHECK(rep.owner[0].neuron == 0);
}

TEST_CASE("monotonicity audit: non-owner clause only runs below the step-size threshold") {
  const auto v = build_output_map(2, 8, 0.5);
  const auto res = planar_run(3, 8, false);
  MonotonicityOptions opt;
  opt.r = 1.0;
  BoundInputs b = ones();
  b.v = 0.5;
  b.M = 2.0;
  b.eta = 0.1;
  opt.bounds = b;
  const auto rep = monotonicity_audit(res.trajectory, v, 0, opt);
  CHECK(rep.eta_threshold == doctest::Approx(std::min(1.0 / (2.0 * 4.0), 1.0 / (2 * 0.5 * 2 * 2.0))));
  CHECK(rep.non_owner_checked);
  CHECK(rep.non_owner.empty());
  b.eta = 1.0;
  opt.bounds = b;
  CHECK_FALSE(monotonicity_audit(res.trajectory, v, 0, opt).non_owner_checked);
}
