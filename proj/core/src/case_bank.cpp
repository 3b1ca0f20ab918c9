#include "gridh2/case_bank.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "gridh2/error.hpp"

namespace gridh2 {

namespace {

Node machine(std::string id, double m, double d) {
  return {std::move(id), NodeKind::kMachine, m, d, 0.0, std::nullopt};
}

Node converter(std::string id, double m, double d) {
  return {std::move(id), NodeKind::kConverter, m, d, 0.0, std::nullopt};
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

EdgeList edge_list(const PowerNetwork& net) {
  EdgeList out;
  for (const Edge& e : net.edges) out.emplace_back(e.from, e.to);
  return out;
}

// Minimum-norm angles reproducing the requested injections: theta = L^+ p.
void set_angles(PowerNetwork& net, const Eigen::VectorXd& injections) {
  const SpectralData spec = build_laplacian(net);
  const double tol = zero_eigenvalue_tolerance(spec.eigenvalues);
  Eigen::VectorXd coeff = spec.eigenvectors.transpose() * injections;
  for (Eigen::Index k = 0; k < coeff.size(); ++k) {
    coeff(k) = spec.eigenvalues(k) > tol ? coeff(k) / spec.eigenvalues(k) : 0.0;
  }
  const Eigen::VectorXd theta = spec.eigenvectors * coeff;
  for (std::size_t i = 0; i < net.size(); ++i) {
    net.nodes[i].angle_star = theta(static_cast<Eigen::Index>(i));
  }
}

CaseBankEntry two_node() {
  CaseBankEntry c;
  c.name = "two-node";
  c.description = "two unit nodes joined by one line";
  c.network.nodes = {machine("a", 1.0, 1.0), machine("b", 1.0, 1.0)};
  c.network.edges = {{0, 1, 1.0}};
  c.initial_condition = InitialCondition::at_rest(2);
  c.areas = {{0}, {1}};

  SusceptanceProblem s;
  s.n_nodes = 2;
  s.edges = edge_list(c.network);
  s.theta_star = c.network.angle_star();
  s.b_min = vec({0.5});
  s.b_max = vec({2.0});
  s.costs = vec({1.0});
  s.budget = 1.5;
  c.presets.susceptance = s;

  MinMaxProblem mm;
  mm.n_nodes = 2;
  mm.b_min = vec({0.5});
  mm.b_max = vec({2.0});
  mm.costs = vec({1.0});
  mm.budget = 1.0;
  mm.theta_star = c.network.angle_star();
  c.presets.minmax = mm;
  c.provenance = "analytic toy case";
  return c;
}

CaseBankEntry triangle() {
  CaseBankEntry c;
  c.name = "triangle";
  c.description = "three unit nodes on a unit triangle";
  c.network.nodes = {machine("a", 1.0, 1.0), machine("b", 1.0, 1.0), machine("c", 1.0, 1.0)};
  c.network.edges = {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}};
  c.initial_condition = InitialCondition::at_rest(3);
  c.areas = {{0, 1, 2}};

  SusceptanceProblem s;
  s.n_nodes = 3;
  s.edges = edge_list(c.network);
  s.theta_star = c.network.angle_star();
  s.b_min = Eigen::VectorXd::Constant(3, 0.1);
  s.b_max = Eigen::VectorXd::Constant(3, 2.0);
  s.costs = Eigen::VectorXd::Ones(3);
  s.budget = 3.0;
  c.presets.susceptance = s;
  c.provenance = "analytic toy case";
  return c;
}

CaseBankEntry four_node_lines() {
  CaseBankEntry c;
  c.name = "four-node-lines";
  c.description = "four unit nodes and three unit lines to place";
  c.network.nodes = {machine("a", 1.0, 1.0), machine("b", 1.0, 1.0), machine("c", 1.0, 1.0),
                     machine("d", 1.0, 1.0)};
  c.network.edges = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
  c.initial_condition = InitialCondition::at_rest(4);
  c.areas = {{0, 1, 2, 3}};

  AssignmentProblem a;
  a.n_nodes = 4;
  a.edge_susceptances = Eigen::VectorXd::Ones(3);
  a.theta_star = c.network.angle_star();
  c.presets.assignment = a;

  MinMaxProblem mm;
  mm.n_nodes = 4;
  mm.b_min = Eigen::VectorXd::Constant(3, 0.5);
  mm.b_max = Eigen::VectorXd::Constant(3, 2.0);
  mm.costs = Eigen::VectorXd::Ones(3);
  mm.budget = 3.0;
  mm.theta_star = c.network.angle_star();
  c.presets.minmax = mm;
  c.provenance = "analytic toy case";
  return c;
}

// Two areas, each with one synchronous machine and one grid-forming
// converter. Machine power and damping follow the reference two-area
// operating point; line data and machine inertia are a Kron-reduced
// surrogate.
constexpr double kMachinePower1 = -0.7778;
constexpr double kMachinePower3 = -0.798889;
constexpr double kConverterDampingSum = 40.0;
constexpr double kInertiaBudget = 120.0;

CaseBankEntry kundur_like() {
  const double p_bar = -(kMachinePower1 + kMachinePower3);
  const double ratio = p_bar / kConverterDampingSum;

  CaseBankEntry c;
  c.name = "kundur-like";
  c.description = "two-area system: machines G1, G3 and converters C2, C4";
  c.network.nodes = {machine("G1", 31.0, -kMachinePower1 / ratio), converter("C2", 60.0, 20.0),
                     machine("G3", 29.5, -kMachinePower3 / ratio), converter("C4", 60.0, 20.0)};
  c.network.edges = {{0, 1, 10.0}, {2, 3, 6.0}, {1, 2, 1.0}};
  c.network.gamma = 0.05;
  c.network.nominal_frequency = 2.0 * M_PI * 60.0;
  const double converter_power = ratio * 20.0;
  set_angles(c.network, vec({kMachinePower1, converter_power, kMachinePower3, converter_power}));
  c.areas = {{0, 1}, {2, 3}};

  // Initial deviation on the converter states only:
  // (theta_C2, theta_C4, omega_C2, omega_C4).
  InitialCondition ic;
  ic.mean = Eigen::VectorXd::Zero(8);
  ic.mean(1) = 93.077;
  ic.mean(3) = 69.3918;
  ic.mean(5) = 56.5361;
  ic.mean(7) = 45.6552;
  ic.cov_factor = Eigen::MatrixXd::Zero(8, 8);
  ic.cov_factor(1, 1) = ic.cov_factor(3, 3) = std::sqrt(0.07);
  ic.cov_factor(5, 5) = ic.cov_factor(7, 7) = std::sqrt(0.01);
  c.initial_condition = ic;

  AllocationProblem a;
  a.converters = {1, 3};
  a.machine_power = vec({kMachinePower1, kMachinePower3});
  a.m_lower = vec({10.0, 5.0});
  a.m_upper = vec({100.0, 100.0});
  a.d_lower = vec({10.0, 5.0});
  a.d_upper = vec({35.0, 35.0});
  a.inertia_budget = kInertiaBudget;
  a.seed = 7;
  c.presets.allocation = a;
  c.provenance =
      "machine power, sharing and budgets from the reference two-area case; "
      "line susceptances and machine inertia are a surrogate";
  return c;
}

CaseBankEntry symmetric_two_converter() {
  const double power = -0.78835;
  const double ratio = -2.0 * power / kConverterDampingSum;

  CaseBankEntry c;
  c.name = "symmetric-two-converter";
  c.description = "two tightly coupled machines, each with a loosely attached converter";
  c.network.nodes = {machine("G1", 30.0, -power / ratio), converter("C1", 60.0, 20.0),
                     machine("G2", 30.0, -power / ratio), converter("C2", 60.0, 20.0)};
  c.network.edges = {{0, 1, 0.2}, {2, 3, 0.2}, {0, 2, 8.0}};
  c.network.gamma = 0.05;
  c.network.nominal_frequency = 2.0 * M_PI * 60.0;
  set_angles(c.network, vec({power, ratio * 20.0, power, ratio * 20.0}));
  c.initial_condition = InitialCondition::at_rest(4);
  c.areas = {{0, 1}, {2, 3}};

  AllocationProblem a;
  a.converters = {1, 3};
  a.machine_power = vec({power, power});
  a.m_lower = vec({10.0, 10.0});
  a.m_upper = vec({110.0, 110.0});
  a.d_lower = vec({5.0, 5.0});
  a.d_upper = vec({35.0, 35.0});
  a.inertia_budget = kInertiaBudget;
  a.seed = 11;
  c.presets.allocation = a;
  c.provenance = "synthetic case, invariant under swapping (G1, C1) with (G2, C2)";
  return c;
}

}  // namespace

const std::vector<CaseBankEntry>& case_bank() {
  static const std::vector<CaseBankEntry> bank = {two_node(), triangle(), four_node_lines(),
                                                  kundur_like(), symmetric_two_converter()};
  return bank;
}

const CaseBankEntry& find_case(std::string_view name) {
  for (const CaseBankEntry& c : case_bank()) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown case '" + std::string(name) + "'");
}

}  // namespace gridh2
