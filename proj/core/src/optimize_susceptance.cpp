#include <cmath>
#include <set>
#include <sstream>

#include "gridh2/error.hpp"
#include "gridh2/optimize.hpp"

namespace gridh2 {

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidInput, std::string(name) + " must be positive");
  }
}

}  // namespace

void validate(const SusceptanceProblem& p) {
  if (p.n_nodes == 0) throw Error(ErrorCode::kInvalidInput, "problem needs at least one node");
  const auto m = static_cast<Eigen::Index>(p.edges.size());
  if (m == 0) throw Error(ErrorCode::kInvalidInput, "problem needs at least one edge");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t e = 0; e < p.edges.size(); ++e) {
    const auto [a, b] = p.edges[e];
    if (a >= p.n_nodes || b >= p.n_nodes || a == b) {
      throw Error(ErrorCode::kInvalidInput, "edge " + std::to_string(e) + " is not a valid node pair");
    }
    if (!seen.insert(std::minmax(a, b)).second) {
      throw Error(ErrorCode::kInvalidInput, "edge " + std::to_string(e) + " duplicates another edge");
    }
  }
  if (p.b_min.size() != m || p.b_max.size() != m || p.costs.size() != m) {
    throw Error(ErrorCode::kInvalidInput, "b_min, b_max and costs need one entry per edge");
  }
  if (p.theta_star.size() != static_cast<Eigen::Index>(p.n_nodes)) {
    throw Error(ErrorCode::kInvalidInput, "theta_star needs one entry per node");
  }
  if ((p.b_min.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "b_min must be positive");
  }
  if ((p.b_min.array() > p.b_max.array()).any()) {
    throw Error(ErrorCode::kInvalidInput, "b_min must not exceed b_max");
  }
  if ((p.costs.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "costs must be positive");
  }
  check_positive(p.budget, "budget");
  check_positive(p.m_min, "m_min");
  check_positive(p.d_min, "d_min");
  check_positive(p.gamma, "gamma");

  const double lo = p.costs.dot(p.b_min);
  const double hi = p.costs.dot(p.b_max);
  if (lo > p.budget * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "cost constraint: minimum spend " << lo << " exceeds budget " << p.budget;
    throw Error(ErrorCode::kInfeasible, msg.str());
  }
  if (p.cost_mode == CostMode::kEquality && hi < p.budget * (1.0 - 1e-12)) {
    std::ostringstream msg;
    msg << "cost constraint: maximum spend " << hi << " is below budget " << p.budget;
    throw Error(ErrorCode::kInfeasible, msg.str());
  }
}

BoxHyperplane budget_polytope(const SusceptanceProblem& p) {
  return {p.b_min, p.b_max, p.costs, p.budget, p.cost_mode == CostMode::kEquality};
}

ScenarioSolution solve_susceptance(const SusceptanceProblem& p) {
  validate(p);
  const Eigen::MatrixXd incidence = build_incidence(p.n_nodes, p.edges);
  const BoxHyperplane polytope = budget_polytope(p);

  const ObjectiveFn objective = [&](const Eigen::VectorXd& b, Eigen::VectorXd& grad) {
    ObjectiveValue v = spectral_objective(b, incidence, p.m_min, p.d_min, p.gamma);
    grad = std::move(v.gradient);
    return v.value;
  };
  const ProjectionFn projection = [&](const Eigen::VectorXd& x) { return project(polytope, x); };

  const Eigen::VectorXd start = Eigen::VectorXd::Constant(
      p.costs.size(), p.budget / p.costs.sum());
  SpgOptions options;
  options.max_iterations = p.max_iterations;
  options.tolerance = p.tolerance;
  const SpgResult run = spectral_projected_gradient(objective, projection, start, options);

  ScenarioSolution s;
  s.scenario = "susceptance";
  s.edges = p.edges;
  s.susceptances = run.x;
  s.objective = run.value;
  s.steady_power = incidence * run.x.asDiagonal() * incidence.transpose() * p.theta_star;
  s.iterations = run.iterations;
  s.converged = run.converged;
  s.kkt_residual = run.projected_gradient_norm;
  s.history = run.history;
  s.candidates_evaluated = 1;
  // The coupling matrix (B^T B) o (B^T B) is PSD (Schur product theorem),
  // so the objective is convex and a stationary point is a global minimum.
  s.certificate = run.converged
                      ? "projected-gradient stationarity on a convex quadratic (global optimum)"
                      : "iteration limit reached; best iterate returned";
  return s;
}

double feasibility_violation(const SusceptanceProblem& p, const ScenarioSolution& s) {
  double v = budget_polytope(p).max_violation(s.susceptances);
  const Eigen::MatrixXd lap =
      build_incidence(p.n_nodes, p.edges) * s.susceptances.asDiagonal() *
      build_incidence(p.n_nodes, p.edges).transpose();
  v = std::max(v, (lap * p.theta_star - s.steady_power).lpNorm<Eigen::Infinity>());
  return v;
}

}  // namespace gridh2
