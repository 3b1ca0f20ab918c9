#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "gridh2/random.hpp"

namespace gridh2 {

/// {x : lower <= x <= upper, w^T x = target} (or w^T x <= target when
/// `equality` is false). Weights must be strictly positive.
struct BoxHyperplane {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd weights;
  double target = 0.0;
  bool equality = true;

  bool feasible() const;
  /// Largest violation of any bound or of the linear constraint.
  double max_violation(const Eigen::VectorXd& x) const;
};

/// Euclidean projection. Solves for the multiplier mu of
/// clip(x - mu w, lower, upper) by bisection over its breakpoints and then
/// exactly on the identified linear piece.
Eigen::VectorXd project(const BoxHyperplane& set, const Eigen::VectorXd& x);

struct DykstraResult {
  Eigen::VectorXd point;
  int iterations = 0;
  bool converged = false;
};

/// Dykstra's alternating projections between the box and the hyperplane
/// (equality form only). Slower than project(); kept as an independent route.
DykstraResult dykstra_project(const BoxHyperplane& set, const Eigen::VectorXd& x,
                              double tolerance = 1e-10, int max_iterations = 100000);

/// Random point of the set: uniform in the box, then pulled onto the
/// hyperplane along the segment toward the lower or upper corner.
Eigen::VectorXd sample_feasible(const BoxHyperplane& set, Rng& rng);

struct SpgOptions {
  int max_iterations = 10000;
  double tolerance = 1e-8;  // on ||P(x - g) - x||_inf
  int memory = 10;          // nonmonotone line-search window
  double step_min = 1e-12;
  double step_max = 1e12;
};

struct SpgResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double projected_gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;  // objective value per iteration
};

/// Objective callback: returns f(x) and writes the gradient.
using ObjectiveFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;
using ProjectionFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Spectral projected gradient (Barzilai-Borwein steps with a nonmonotone
/// Armijo search along the projection arc). Returns the best iterate seen.
SpgResult spectral_projected_gradient(const ObjectiveFn& objective,
                                      const ProjectionFn& projection, Eigen::VectorXd x0,
                                      const SpgOptions& options = {});

}  // namespace gridh2
