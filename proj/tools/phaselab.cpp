#include "phaselab/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace phaselab;

namespace {

struct Flags {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  int runs = 0;
  int threads = 1;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON config file (defaults apply when omitted)");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "seed (overrides seed / seed_base in the config)");
  cmd->add_option("--runs", f.runs, "run count (trial count for gc-prob)");
  cmd->add_option("--threads", f.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

CommandOptions to_options(const Flags& f, const CLI::App* cmd) {
  CommandOptions o;
  o.out = f.out;
  o.threads = f.threads;
  if (cmd->count("--seed")) o.seed = f.seed;
  if (cmd->count("--runs")) o.runs = f.runs;
  return o;
}

json load_config(const std::string& path) { return path.empty() ? json::object() : read_json(path); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phaselab: two-layer ReLU training dynamics experiments"};
  app.require_subcommand(1);
  Flags f;

  auto* train = app.add_subcommand("train", "single training run with phase and landscape reports");
  auto* angle = app.add_subcommand("sweep-angle", "iterations to convergence vs subspace angle");
  auto* width = app.add_subcommand("sweep-width", "iterations vs width under random and half-space init");
  auto* hist = app.add_subcommand("norm-hist", "histogram of max_t |W^t| over seeded runs");
  auto* gc = app.add_subcommand("gc-prob", "closed-form vs Monte Carlo probability of the hull condition");
  auto* trace = app.add_subcommand("trace-dynamics", "weight-dynamics frames from the fixed planar start");
  auto* land = app.add_subcommand("landscape-audit", "zero-loss construction, critical-point audits, Lipschitz ratios");
  for (auto* c : {train, angle, width, hist, gc, trace, land}) add_common(c, f);

  auto* validate = app.add_subcommand("validate", "check an output directory against its manifest schemas");
  std::string dir;
  validate->add_option("dir", dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const auto problems = validate_output_dir(dir);
      for (const auto& p : problems) std::cerr << p << '\n';
      if (problems.empty()) std::cout << "ok\n";
      return problems.empty() ? 0 : 1;
    }
    if (train->parsed()) {
      const auto r = cmd_train(load_config(f.config), to_options(f, train));
      std::cout << "stop=" << to_string(r.outcome.stop_reason) << " iterations=" << r.outcome.iterations
                << " loss=" << format_double(r.outcome.final_loss) << '\n';
    } else if (angle->parsed()) {
      for (const auto& c : cmd_sweep_angle(load_config(f.config), to_options(f, angle)).cells) {
        std::cout << c.cell << " mean=" << format_double(c.mean) << " converged=" << c.converged << '/' << c.runs
                  << '\n';
      }
    } else if (width->parsed()) {
      for (const auto& c : cmd_sweep_width(load_config(f.config), to_options(f, width)).cells) {
        std::cout << c.cell << " mean=" << format_double(c.mean)
                  << " std=" << (c.std ? format_double(*c.std) : std::string("n/a")) << " converged=" << c.converged
                  << '/' << c.runs << '\n';
      }
    } else if (hist->parsed()) {
      const auto r = cmd_norm_hist(load_config(f.config), to_options(f, hist));
      std::cout << "runs=" << r.max_norms.size() << '\n';
    } else if (gc->parsed()) {
      for (const auto& row : cmd_gc_prob(load_config(f.config), to_options(f, gc))) {
        std::cout << "d=" << row.d << " k=" << row.k << " closed=" << format_double(row.closed_form)
                  << " mc=" << format_double(row.mc.estimate) << " se=" << format_double(row.mc.std_error) << '\n';
      }
    } else if (trace->parsed()) {
      const auto r = cmd_trace_dynamics(load_config(f.config), to_options(f, trace));
      std::cout << "iterations=" << r.iterations << " final_loss=" << format_double(r.final_loss)
                << " min_rho_margin=" << format_double(r.min_rho_margin) << '\n';
    } else if (land->parsed()) {
      const auto r = cmd_landscape_audit(load_config(f.config), to_options(f, land));
      std::cout << r.dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
