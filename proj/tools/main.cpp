#include <cstdlib>
#include <iostream>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>

#include "gridh2_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace gridh2::cli;

  CLI::App app{"gridh2: H2 performance analysis and design of stochastic power networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(GRIDH2_VERSION));

  GlobalOptions global;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed for simulation and multi-start")
                       ->check(CLI::NonNegativeNumber);
  app.add_flag("--json", global.json, "Emit one JSON document on stdout");
  app.add_option("--out", global.out_dir, "Directory for output files");
  app.add_flag("--quiet,-q", global.quiet, "Suppress human-readable output");
  // Options may follow the subcommand too.
  app.fallthrough();

  std::string network;
  auto* analyze = app.add_subcommand("analyze", "H2 norm, bounds, spectrum and mode centralities");
  analyze->add_option("network", network, "Network JSON file or case:NAME")->required();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of the H2 norm");
  simulate->add_option("network", sim.network, "Network JSON file or case:NAME")->required();
  simulate->add_option("--dt", sim.dt, "Time step (s)")->capture_default_str();
  simulate->add_option("--horizon", sim.horizon, "Simulated time per trial (s)")->capture_default_str();
  simulate->add_option("--burn-in", sim.burn_in, "Discarded initial time (s)")->capture_default_str();
  simulate->add_option("--trials", sim.trials, "Number of trials")->capture_default_str();
  simulate->add_option("--scheme", sim.scheme, "Integrator: em or exact")
      ->check(CLI::IsMember({"em", "exact"}))
      ->capture_default_str();
  simulate->add_option("--record", sim.record_trials, "Trials written to the trajectory CSV")
      ->capture_default_str();
  simulate->add_option("--record-stride", sim.record_stride, "Steps between recorded rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")->capture_default_str();
  simulate->add_flag("--plot", sim.plot, "Write frequency.svg to the output directory");

  OptimizeOptions opt;
  auto* optimize = app.add_subcommand("optimize", "Solve a design scenario");
  optimize->add_option("problem", opt.problem, "Scenario JSON file or case:NAME")->required();
  optimize->add_option("--scenario", opt.scenario, "susceptance, assignment, minmax or allocation")
      ->check(CLI::IsMember({"susceptance", "assignment", "minmax", "allocation"}));
  std::size_t starts = 0;
  auto* starts_opt = optimize->add_option("--starts", starts, "Allocation multi-start count")
                         ->check(CLI::PositiveNumber);
  optimize->add_flag("--plot", opt.plot, "Write a convergence SVG to the output directory");

  ValidateOptions val;
  auto* validate = app.add_subcommand("validate", "Run a property harness");
  validate->add_option("--family", val.family, "bounds, gradients or oracle")
      ->required()
      ->check(CLI::IsMember({"bounds", "gradients", "oracle"}));
  validate->add_option("--instances", val.instances, "Number of random instances")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* cases = app.add_subcommand("cases", "Built-in case bank");
  cases->require_subcommand(1);
  cases->add_subcommand("list", "List bundled cases");
  std::string case_name;
  auto* show = cases->add_subcommand("show", "Describe one case");
  show->add_option("name", case_name, "Case name")->required();
  auto* exporter = cases->add_subcommand("export", "Write a case's network and scenario files");
  exporter->add_option("name", case_name, "Case name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  if (*seed_opt) global.seed = seed;
  if (*starts_opt) opt.starts = starts;
  global.color = std::getenv("NO_COLOR") == nullptr && isatty(STDOUT_FILENO) && !global.json;

  const Streams io{std::cout, std::cerr};
  if (*analyze) return run_analyze(global, network, io);
  if (*simulate) return run_simulate(global, sim, io);
  if (*optimize) return run_optimize(global, opt, io);
  if (*validate) return run_validate(global, val, io);
  if (cases->got_subcommand("list")) return run_cases_list(global, io);
  if (*show) return run_cases_show(global, case_name, io);
  if (*exporter) return run_cases_export(global, case_name, io);
  return kExitInvalid;
}
