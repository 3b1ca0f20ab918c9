#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "gridh2/error.hpp"

namespace gridh2::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 2,
  kExitDisconnected = 3,
  kExitNumerical = 4,
  kExitUnstableStep = 5,
  kExitMaxIterations = 6,
  kExitInfeasible = 7,
};

int exit_code(ErrorCode code);

struct GlobalOptions {
  bool json = false;
  std::optional<std::uint64_t> seed;
  std::string out_dir;  // empty: write no files
  bool quiet = false;
  bool color = false;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

struct SimulateOptions {
  std::string network;
  double dt = 1e-3;
  double horizon = 40.0;
  double burn_in = 20.0;
  std::size_t trials = 2000;
  std::string scheme = "em";
  std::size_t record_trials = 4;
  std::size_t record_stride = 100;
  unsigned threads = 0;
  bool plot = false;
};

struct OptimizeOptions {
  std::string problem;   // file path or case:NAME
  std::string scenario;  // may be empty when the file names it
  std::optional<std::size_t> starts;
  bool plot = false;
};

struct ValidateOptions {
  std::string family;
  std::size_t instances = 100;
};

// Each command reports errors on `err` and returns the process exit code.
int run_analyze(const GlobalOptions& g, const std::string& network, Streams io);
int run_simulate(const GlobalOptions& g, const SimulateOptions& o, Streams io);
int run_optimize(const GlobalOptions& g, const OptimizeOptions& o, Streams io);
int run_validate(const GlobalOptions& g, const ValidateOptions& o, Streams io);
int run_cases_list(const GlobalOptions& g, Streams io);
int run_cases_show(const GlobalOptions& g, const std::string& name, Streams io);
int run_cases_export(const GlobalOptions& g, const std::string& name, Streams io);

}  // namespace gridh2::cli
