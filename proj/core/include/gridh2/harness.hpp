#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gridh2/network.hpp"
#include "gridh2/random.hpp"

namespace gridh2 {

struct RandomNetworkOptions {
  std::size_t min_nodes = 3;
  std::size_t max_nodes = 8;
  double param_lo = 0.5;  // inertia, damping and susceptance range (log-uniform)
  double param_hi = 2.0;
  double gamma_lo = 0.5;
  double gamma_hi = 2.0;
  double extra_edge_probability = 0.35;
  bool homogeneous = false;  // one (m, d) pair for every node
};

/// Random spanning tree plus independent extra edges; always connected.
PowerNetwork random_connected_network(Rng& rng, const RandomNetworkOptions& options);

// Each instance i draws from make_rng(master_seed, i), so any finding can be
// replayed from (master_seed, i) alone.

struct BoundFinding {
  std::size_t instance = 0;
  std::uint64_t master_seed = 0;
  std::size_t nodes = 0;
  double lower = 0.0;
  double h2_squared = 0.0;
  double upper = 0.0;
  std::string kind;  // "lower", "upper", "gap", "norm_chain" or "crash: ..."
};

struct BoundsReport {
  std::size_t instances = 0;
  std::size_t lower_violations = 0;
  std::size_t upper_violations = 0;
  std::size_t gap_failures = 0;
  std::size_t norm_chain_failures = 0;
  std::size_t crashes = 0;
  std::vector<BoundFinding> findings;
};

/// Heterogeneous networks (n in [3, 8], parameters log-uniform in [0.5, 2]).
/// Checks lower <= h2 <= upper, the norm chain and upper - lower <= gap.
BoundsReport run_bounds_harness(std::size_t instances, std::uint64_t master_seed);

struct ComparisonReport {
  std::size_t instances = 0;
  std::size_t failures = 0;
  double max_relative_error = 0.0;
  std::vector<std::size_t> failing_instances;
  std::uint64_t master_seed = 0;
  double tolerance = 0.0;
};

/// Homogeneous networks (n in [2, 10], parameters in [0.1, 10]): Lyapunov
/// route against the spectral closed form.
ComparisonReport run_oracle_harness(std::size_t instances, std::uint64_t master_seed,
                                    double tolerance = 1e-8);

/// Heterogeneous networks (n in [2, 6]): adjoint inertia/damping gradient
/// against central differences with step 1e-5 * p.
ComparisonReport run_gradient_harness(std::size_t instances, std::uint64_t master_seed,
                                      double tolerance = 1e-5);

}  // namespace gridh2
