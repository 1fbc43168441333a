#include <doctest.h>

#include "phaselab/experiments.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

using namespace phaselab;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "phaselab_test_experiments" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CommandOptions opts(const std::string& name, int runs = -1) {
  CommandOptions o;
  o.out = scratch(name);
  if (runs >= 0) o.runs = runs;
  o.threads = 2;
  return o;
}

}  // namespace

TEST_CASE("task config validation") {
  json bad_eta = {{"train", {{"eta", 0.0}}}};
  CHECK_THROWS_AS(cmd_train(bad_eta, opts("bad_eta")), ConfigError);
  json bad_iters = {{"train", {{"max_iters", 0}}}};
  CHECK_THROWS_AS(cmd_train(bad_iters, opts("bad_iters")), ConfigError);
  json unknown = {{"tsak", json::object()}};
  CHECK_THROWS_AS(cmd_train(unknown, opts("unknown")), ConfigError);
  json noisy_planar = {{"task", {{"kind", "grid-planar"}, {"noise_std", 0.1}}}};
  CHECK_THROWS_AS(cmd_train(noisy_planar, opts("noisy")), ConfigError);
  json bad_theta = {{"task", {{"kind", "grid"}, {"theta", 0.0}}}};
  CHECK_THROWS_AS(cmd_train(bad_theta, opts("theta")), ConfigError);
}

TEST_CASE("train command: outputs validate and repeat byte for byte") {
  json cfg = {{"task", {{"kind", "grid-planar"}, {"width", 8}}}, {"seed", 3}};
  const auto o1 = opts("train_a");
  const auto o2 = opts("train_b");
  const auto r1 = cmd_train(cfg, o1);
  cmd_train(cfg, o2);
  CHECK(r1.outcome.converged);
  CHECK(validate_output_dir(o1.out).empty());
  for (const char* f : {"trajectory.csv", "trajectory.json", "phase_report.json", "landscape_audit.json"}) {
    CHECK(fs::exists(o1.out / f));
    CHECK(slurp(o1.out / f) == slurp(o2.out / f));
  }
}

TEST_CASE("summaries: one run has no std; empty runs error") {
  json cfg = {{"thetas", {std::numbers::pi / 2}}, {"train", {{"max_iters", 3000}}}};
  const auto o = opts("sweep_one", 1);
  const auto res = cmd_sweep_angle(cfg, o);
  REQUIRE(res.cells.size() == 1);
  CHECK(res.cells[0].runs == 1);
  CHECK_FALSE(res.cells[0].std.has_value());
  CHECK(validate_output_dir(o.out).empty());
  CHECK_THROWS_AS(cmd_norm_hist(json::object(), opts("hist_zero", 0)), ConfigError);
}

TEST_CASE("norm histogram counts sum to the number of runs") {
  const auto o = opts("hist", 12);
  const auto res = cmd_norm_hist(json::object(), o);
  int total = 0;
  for (int c : res.counts) total += c;
  CHECK(total == 12);
  CHECK(res.edges.size() == res.counts.size() + 1);
  CHECK(validate_output_dir(o.out).empty());
}

TEST_CASE("width sweep: small grid, table shape") {
  json cfg = {{"widths", {6, 12}}, {"runs", 4}};
  const auto o = opts("width");
  const auto res = cmd_sweep_width(cfg, o);
  CHECK(res.cells.size() == 4);
  CHECK(validate_output_dir(o.out).empty());
  const auto table = read_csv(o.out / "table.csv");
  CHECK(table.rows.size() == 2);
}

TEST_CASE("trace dynamics: frames, final margin and svg output") {
  const auto o = opts("trace");
  const auto res = cmd_trace_dynamics(json::object(), o);
  CHECK(res.final_loss == 0.0);
  CHECK(res.min_rho_margin >= 0.0);
  CHECK(res.frames.front() == 0);
  for (int f : res.frames) {
    const std::string svg = slurp(o.out / ("frame_t" + std::to_string(f) + ".svg"));
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
  CHECK(validate_output_dir(o.out).empty());

  const Matrix w0 = trace_initial_weights();
  CHECK(w0.col(0).norm() == doctest::Approx(0.75));
  CHECK(std::atan2(w0(1, 0), w0(0, 0)) == doctest::Approx(std::numbers::pi / 6));
  CHECK(w0.col(0) == w0.col(1));
}

TEST_CASE("gc-prob command agrees with the closed form") {
  json cfg = {{"pairs", {{2, 3}, {3, 5}}}, {"trials", 4000}};
  const auto rows = cmd_gc_prob(cfg, opts("gcprob"));
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(std::abs(row.mc.estimate - row.closed_form) <= 4 * std::max(row.mc.std_error, 1e-3));
  }
}
