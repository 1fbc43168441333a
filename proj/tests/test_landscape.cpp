#include <doctest.h>

#include "phaselab/datagen.hpp"
#include "phaselab/landscape.hpp"
#include "phaselab/trainer.hpp"

#include <cmath>

using namespace phaselab;

namespace {

struct ZeroLossSetup {
  OutputMap v;
  std::vector<ClassRegion> regions;
  LabeledDataset data;
};

ZeroLossSetup annulus_setup(int classes, int di, int owners, double v_mag, Rng& rng) {
  ZeroLossSetup s{build_output_map(classes, classes * owners, v_mag), {}, {}};
  const auto bases = block_bases(classes, di);
  for (int c = 0; c < classes; ++c) {
    ClassRegion region{bases[static_cast<std::size_t>(c)], 0.5 + rng.uniform(), 3.0};
    s.regions.push_back(region);
    AnnulusDistribution dist{region.basis, region.m, region.M};
    auto part = sample_annulus(dist, 60, c, classes, rng);
    s.data = c == 0 ? part : LabeledDataset::concat(s.data, part);
  }
  return s;
}

}  // namespace

TEST_CASE("regular simplex geometry") {
  for (int d = 1; d <= 6; ++d) {
    const Matrix s = regular_simplex(d);
    CHECK(s.rows() == d);
    CHECK(s.cols() == d + 1);
    CHECK(s.rowwise().sum().norm() < 1e-12);
    const Matrix gram = s.transpose() * s;
    for (int i = 0; i <= d; ++i) {
      CHECK(gram(i, i) == doctest::Approx(1.0).epsilon(1e-12));
      for (int j = 0; j < i; ++j) CHECK(gram(i, j) == doctest::Approx(-1.0 / d).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero-loss construction reaches zero loss and zero subgradient") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const int classes = 2 + trial % 2;
    const int di = 1 + trial % 3;
    const int owners = di + 1 + trial % 3;
    const double v_mag = trial % 4 == 0 ? 0.25 : 1.0;
    auto s = annulus_setup(classes, di, owners, v_mag, rng);
    const int k = classes * owners;
    const double bias_total = trial % 2 ? 0.0 : 0.4;
    Vector b = Vector::Constant(k, bias_total / k);
    const Matrix w = construct_zero_loss(s.v, s.regions, b);
    auto params = make_params(w, s.v, bias_total);
    CHECK(dataset_loss(params, s.data) == 0.0);
    CHECK(subgradient(params, s.data).isZero());
    CHECK(critical_point_audit(params, s.data).verdict == AuditVerdict::kGlobalMin);
  }
}

TEST_CASE("zero-loss construction rejects too few owners") {
  const auto bases = block_bases(2, 3);
  std::vector<ClassRegion> regions{{bases[0], 1.0, 2.0}, {bases[1], 1.0, 2.0}};
  CHECK_THROWS_AS(construct_zero_loss(build_output_map(2, 6, 1.0), regions, Vector::Zero(6)), ConfigError);
  CHECK_NOTHROW(construct_zero_loss(build_output_map(2, 8, 1.0), regions, Vector::Zero(8)));
}

TEST_CASE("critical-point audit verdicts") {
  const auto data = grid_dataset_planar(GridSpec::standard());
  const auto v = build_output_map(2, 8, 0.5);
  Objective obj;
  obj.classes = {0};

  const auto zero = critical_point_audit(make_params(Matrix::Zero(2, 8), v), data, obj);
  CHECK(zero.verdict == AuditVerdict::kDegenerateZeroOutput);
  CHECK(zero.critical);
  CHECK(zero.loss == doctest::Approx(1.0));
  CHECK_FALSE(zero.nonzero_output_witness.has_value());

  Rng rng(2);
  auto params = make_params(init_random(2, 8, rng), v);
  TrainConfig cfg;
  cfg.objective = obj;
  cfg.max_iters = 3;
  const auto early = train(params, data, cfg);
  CHECK(critical_point_audit(early.params, data, obj).verdict == AuditVerdict::kNotCritical);

  cfg.max_iters = 5000;
  const auto done = train(params, data, cfg);
  REQUIRE(done.stop_reason == StopReason::kConverged);
  const auto fin = critical_point_audit(done.params, data, obj);
  CHECK(fin.verdict == AuditVerdict::kGlobalMin);
  CHECK(fin.nonzero_output_witness.has_value());
}

TEST_CASE("property: a global-min verdict never carries loss above the threshold") {
  Rng rng(9);
  const auto data = grid_dataset_planar(GridSpec::standard());
  const auto v = build_output_map(2, 6, 0.5);
  Objective obj;
  obj.classes = {0};
  for (int trial = 0; trial < 200; ++trial) {
    Matrix w = init_random(2, 6, rng) * std::exp(2 * rng.normal());
    if (trial % 5 == 0) w.col(trial % 6).setZero();
    const auto audit = critical_point_audit(make_params(w, v), data, obj);
    if (audit.verdict == AuditVerdict::kGlobalMin) CHECK(audit.loss <= 1e-8);
    if (audit.verdict != AuditVerdict::kNotCritical) CHECK(audit.grad_norm <= 1e-8);
  }
}

TEST_CASE("lipschitz estimate: refusals, determinism and tiny perturbations") {
  const auto data = grid_dataset_planar(GridSpec::standard());
  const auto v = build_output_map(2, 8, 0.5);
  Objective obj;
  obj.classes = {0};
  CHECK_THROWS_AS(lipschitz_estimate(gaussian_pair_sampler(2, v, 0.0), data, obj, 10, 0), ConfigError);
  CHECK_THROWS_AS(lipschitz_estimate(gaussian_pair_sampler(2, v, 0.5), data, obj, 0, 0), ConfigError);

  const auto a = lipschitz_estimate(gaussian_pair_sampler(2, v, 0.5), data, obj, 200, 4, 1);
  const auto b = lipschitz_estimate(gaussian_pair_sampler(2, v, 0.5), data, obj, 200, 4, 3);
  CHECK(a.ratios == b.ratios);
  CHECK(a.max_ratio > 0.0);
  CHECK(std::isfinite(a.max_ratio));
  int total = 0;
  for (int c : a.bin_counts) total += c;
  CHECK(total == static_cast<int>(a.ratios.size()));

  // Perturbations far below every kink distance keep the same linear piece.
  const auto tiny = lipschitz_estimate(gaussian_pair_sampler(2, v, 0.5, 1e-11), data, obj, 50, 5);
  CHECK(tiny.max_ratio == 0.0);
}

TEST_CASE("lipschitz estimate is invariant under relabelling the classes") {
  Rng rng(12);
  const auto bases = block_bases(2, 2);
  LabeledDataset data;
  for (int c = 0; c < 2; ++c) {
    auto part = sample_annulus({bases[static_cast<std::size_t>(c)], 1.0, 2.0}, 50, c, 2, rng);
    data = c == 0 ? part : LabeledDataset::concat(data, part);
  }
  std::vector<int> flipped = data.labels();
  for (int& l : flipped) l = 1 - l;
  LabeledDataset relabelled(data.inputs(), flipped, 2);

  const auto v = build_output_map(2, 8, 1.0);
  const auto base_sampler = gaussian_pair_sampler(4, v, 0.5);
  // Swapping the class labels is the same as swapping the rows of V, which for
  // round-robin owners means swapping each neuron with its partner.
  PairSampler swapped = [&](Rng& r) {
    auto [p1, p2] = base_sampler(r);
    for (auto* p : {&p1, &p2}) {
      Matrix w = p->w;
      Vector bias = p->b;
      for (int j = 0; j < 8; j += 2) {
        w.col(j).swap(w.col(j + 1));
        std::swap(bias(j), bias(j + 1));
      }
      p->w = w;
      p->b = bias;
    }
    return std::make_pair(p1, p2);
  };
  const auto a = lipschitz_estimate(base_sampler, data, {}, 100, 8);
  const auto b = lipschitz_estimate(swapped, relabelled, {}, 100, 8);
  REQUIRE(a.ratios.size() == b.ratios.size());
  for (std::size_t i = 0; i < a.ratios.size(); ++i) CHECK(a.ratios[i] == doctest::Approx(b.ratios[i]).epsilon(1e-12));
}
