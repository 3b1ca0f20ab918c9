#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gridh2/network.hpp"
#include "gridh2/projection.hpp"

namespace gridh2 {

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

enum class CostMode { kEquality, kInequality };
enum class SearchStrategy { kExhaustive, kGreedy };

std::string_view to_string(SearchStrategy s);
SearchStrategy parse_strategy(std::string_view name);

// ---------------------------------------------------------------------------
// Surrogate objective shared by the susceptance and assignment scenarios:
//
//   J(b) = gamma/(2 d_min) * (||lambda(L)||_2^2 + ||lambda(L)||_1 / m_min)
//
// evaluated in trace form, ||lambda||_2^2 = trace(L^2) and ||lambda||_1 =
// trace(L), so no eigendecomposition is needed.
// ---------------------------------------------------------------------------

struct ObjectiveValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

ObjectiveValue spectral_objective(const Eigen::VectorXd& susceptances,
                                  const Eigen::MatrixXd& incidence, double m_min, double d_min,
                                  double gamma);

/// Min-max surrogate n*gamma/(2 d_min) * (lambda_max^2 + lambda_max / m_min).
double minmax_objective(double lambda_max, std::size_t n, double m_min, double d_min,
                        double gamma);

/// Largest Laplacian eigenvalue of B diag(b) B^T and a subgradient with
/// respect to b: (a_e^T v)^2, averaged over the eigenvectors whose
/// eigenvalues lie within 1e-8 (relative) of the top one.
ObjectiveValue lambda_max_subgradient(const Eigen::VectorXd& susceptances,
                                      const Eigen::MatrixXd& incidence);

struct StartRecord {
  Eigen::VectorXd initial;
  double initial_objective = 0.0;
  Eigen::VectorXd final;
  double final_objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ScenarioSolution {
  std::string scenario;
  EdgeList edges;
  Eigen::VectorXd susceptances;
  // Converter (inertia, damping) for the allocation scenario.
  std::vector<std::size_t> converters;
  Eigen::VectorXd inertia;
  Eigen::VectorXd damping;

  double objective = 0.0;
  Eigen::VectorXd steady_power;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  std::string certificate;
  std::size_t candidates_evaluated = 0;
  std::vector<double> history;
  std::vector<StartRecord> starts;
};

// ---------------------------------------------------------------------------
// Susceptance allocation on a fixed topology.
// ---------------------------------------------------------------------------

struct SusceptanceProblem {
  std::size_t n_nodes = 0;
  EdgeList edges;
  Eigen::VectorXd theta_star;
  Eigen::VectorXd b_min;
  Eigen::VectorXd b_max;
  Eigen::VectorXd costs;  // linear cost c_e * b_e
  double budget = 0.0;
  double m_min = 1.0;
  double d_min = 1.0;
  double gamma = 1.0;
  CostMode cost_mode = CostMode::kEquality;
  int max_iterations = 10000;
  double tolerance = 1e-8;
};

void validate(const SusceptanceProblem& p);
BoxHyperplane budget_polytope(const SusceptanceProblem& p);
ScenarioSolution solve_susceptance(const SusceptanceProblem& p);

// ---------------------------------------------------------------------------
// Node-edge assignment: choose which node pairs carry the given lines.
// ---------------------------------------------------------------------------

struct AssignmentProblem {
  std::size_t n_nodes = 0;
  Eigen::VectorXd edge_susceptances;
  Eigen::VectorXd theta_star;
  double m_min = 1.0;
  double d_min = 1.0;
  double gamma = 1.0;
  bool require_connected = false;
  SearchStrategy strategy = SearchStrategy::kExhaustive;
  double max_evaluations = 1e7;
};

void validate(const AssignmentProblem& p);

/// Number of (edge subset, distinct susceptance placement) pairs the
/// exhaustive search visits.
double assignment_candidate_count(const AssignmentProblem& p);

ScenarioSolution solve_assignment(const AssignmentProblem& p);

// ---------------------------------------------------------------------------
// Combined min-max design: topology and susceptances together.
// ---------------------------------------------------------------------------

struct MinMaxProblem {
  std::size_t n_nodes = 0;
  // Per-line bounds and cost; the line count is b_min.size().
  Eigen::VectorXd b_min;
  Eigen::VectorXd b_max;
  Eigen::VectorXd costs;
  double budget = 0.0;
  CostMode cost_mode = CostMode::kEquality;
  Eigen::VectorXd theta_star;
  double m_min = 1.0;
  double d_min = 1.0;
  double gamma = 1.0;
  bool require_connected = true;
  SearchStrategy strategy = SearchStrategy::kExhaustive;
  std::optional<EdgeList> topology;  // fixes the outer search to one candidate
  int max_iterations = 4000;         // inner subgradient iterations per topology
  double max_topologies = 2e4;
};

void validate(const MinMaxProblem& p);

struct InnerMinMaxResult {
  Eigen::VectorXd susceptances;
  double lambda_max = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

/// Minimizes lambda_max(B diag(b) B^T) over the budget polytope by projected
/// subgradient descent with diminishing steps; returns the best iterate.
InnerMinMaxResult minimize_lambda_max(const Eigen::MatrixXd& incidence,
                                      const BoxHyperplane& polytope, int max_iterations);

ScenarioSolution solve_minmax(const MinMaxProblem& p);

// ---------------------------------------------------------------------------
// Inertia and damping allocation over grid-forming converters.
// ---------------------------------------------------------------------------

/// Squared H2 norm with its gradient with respect to every node's inertia
/// and damping, computed with one forward and one adjoint Lyapunov solve.
struct H2Sensitivity {
  double value = 0.0;
  Eigen::VectorXd d_inertia;
  Eigen::VectorXd d_damping;
};

H2Sensitivity h2_sensitivity(const Eigen::VectorXd& inertia, const Eigen::VectorXd& damping,
                             const SpectralData& spec, double gamma);

struct AllocationProblem {
  std::vector<std::size_t> converters;
  // Steady-state power of the remaining (machine) nodes, in node order.
  Eigen::VectorXd machine_power;
  Eigen::VectorXd m_lower;
  Eigen::VectorXd m_upper;
  Eigen::VectorXd d_lower;
  Eigen::VectorXd d_upper;
  double inertia_budget = 0.0;
  std::size_t starts = 8;
  std::uint64_t seed = 0;
  int max_iterations = 3000;
  double tolerance = 1e-9;
};

/// Quantities implied by power balance and sharing.
struct AllocationDerived {
  std::vector<std::size_t> machines;
  double p_bar = 0.0;          // -sum of machine power
  double sharing_ratio = 0.0;  // |P_G,i| / d_G,i, common to all machines
  double damping_sum = 0.0;    // p_bar / sharing_ratio
};

/// Checks every invariant of the allocation problem against `net` and
/// returns the derived sums. Throws kInvalidInput or kInfeasible.
AllocationDerived derive_allocation(const AllocationProblem& p, const PowerNetwork& net);

struct AllocationObjective {
  double value = 0.0;
  Eigen::VectorXd grad_inertia;  // per converter
  Eigen::VectorXd grad_damping;  // per converter
};

/// H2 objective of `net` with converter parameters replaced by (m_c, d_c).
AllocationObjective allocation_objective(const PowerNetwork& net,
                                         const std::vector<std::size_t>& converters,
                                         const Eigen::VectorXd& m_c,
                                         const Eigen::VectorXd& d_c);

ScenarioSolution solve_allocation(const AllocationProblem& p, const PowerNetwork& net);

/// Applies converter values from a solution to a copy of the network.
PowerNetwork with_converter_parameters(const PowerNetwork& net,
                                       const std::vector<std::size_t>& converters,
                                       const Eigen::VectorXd& m_c, const Eigen::VectorXd& d_c);

// ---------------------------------------------------------------------------
// Feasibility checks, independent of the solvers' own bookkeeping.
// ---------------------------------------------------------------------------

double feasibility_violation(const SusceptanceProblem& p, const ScenarioSolution& s);
double feasibility_violation(const AssignmentProblem& p, const ScenarioSolution& s);
double feasibility_violation(const MinMaxProblem& p, const ScenarioSolution& s);
double feasibility_violation(const AllocationProblem& p, const PowerNetwork& net,
                             const ScenarioSolution& s);

}  // namespace gridh2
