#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "gridh2/dynamics.hpp"
#include "gridh2/random.hpp"

namespace gridh2 {

/// x0 ~ N(mean, cov_factor cov_factor^T), state ordered [theta; omega].
struct InitialCondition {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov_factor;

  /// Deterministic start at the origin.
  static InitialCondition at_rest(Eigen::Index nodes);
};

void validate(const InitialCondition& ic, Eigen::Index nodes);

enum class Scheme {
  kEulerMaruyama,
  kExact,  // exact Gaussian transition (matrix exponential + Van Loan covariance)
};

std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

struct SimulationConfig {
  double dt = 1e-3;
  double horizon = 40.0;
  double burn_in = 20.0;
  std::size_t trials = 2000;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::kEulerMaruyama;
  // Full state trajectories are kept for the first `record_trials` trials,
  // sampled every `record_stride` steps. Statistics always use every trial.
  std::size_t record_trials = 0;
  std::size_t record_stride = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
};

void validate(const SimulationConfig& cfg);

struct Trajectory {
  std::size_t trial = 0;
  Eigen::MatrixXd states;  // one row per recorded time, 2n columns
};

struct SimulationEnsemble {
  Eigen::Index nodes = 0;
  std::size_t steps = 0;
  double dt = 0.0;
  double burn_in = 0.0;
  double horizon = 0.0;
  Eigen::VectorXd time_grid;  // times of the recorded rows
  std::vector<Trajectory> trajectories;
  // Time average of y^T y over [burn_in, horizon], one entry per trial.
  Eigen::VectorXd trial_means;
  double empirical_h2_squared = 0.0;
  double empirical_h2_stderr = 0.0;

  /// omega columns of a recorded trajectory (rows = time, cols = nodes).
  Eigen::MatrixXd frequency_series(std::size_t trajectory_index) const;
};

Eigen::VectorXd sample_initial(const InitialCondition& ic, Rng& rng);

/// x_{k+1} = x_k + A x_k dt + R dw_k, dw_k ~ N(0, dt I). Trial t draws its
/// initial state and its increments from separate sub-streams derived from
/// (seed, t). Throws kUnstableStep if I + A_r dt has spectral radius >= 1 on
/// the deflated subspace.
SimulationEnsemble euler_maruyama(const StateSpace& ss, const InitialCondition& ic,
                                  const SimulationConfig& cfg);

/// Dispatches on cfg.scheme.
SimulationEnsemble simulate(const StateSpace& ss, const InitialCondition& ic,
                            const SimulationConfig& cfg);

struct H2Estimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Ensemble mean of the per-trial time averages, with the standard error of
/// that mean. Throws kInsufficientSamples with fewer than two trials.
H2Estimate empirical_h2(const SimulationEnsemble& ens);

}  // namespace gridh2
