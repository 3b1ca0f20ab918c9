#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gridh2/dynamics.hpp"
#include "gridh2/error.hpp"
#include "gridh2/gramian.hpp"
#include "gridh2/optimize.hpp"

namespace gridh2 {

H2Sensitivity h2_sensitivity(const Eigen::VectorXd& inertia, const Eigen::VectorXd& damping,
                             const SpectralData& spec, double gamma) {
  const StateSpace ss = assemble(inertia, damping, spec, gamma);
  const DeflatedSystem sys = deflate(ss);
  const Eigen::Index n = inertia.size();
  const Eigen::Index offset = n - 1;

  const Eigen::MatrixXd p = lyapunov_solve(sys.a_r, sys.r_r * sys.r_r.transpose());
  // Adjoint: A_r^T W + W A_r = -C_r^T C_r, so dJ = trace(W dQ) for any
  // perturbation dQ of the Lyapunov right-hand side.
  const Eigen::MatrixXd w = lyapunov_solve(sys.a_r.transpose(), sys.c_r.transpose() * sys.c_r);
  const Eigen::MatrixXd pw = p * w;
  const Eigen::MatrixXd rw = sys.r_r.transpose() * w;

  H2Sensitivity out;
  out.value = (sys.c_r * p * sys.c_r.transpose()).trace();
  out.d_inertia.resize(n);
  out.d_damping.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index row = offset + i;
    const double inv_m = 1.0 / inertia(i);
    // Row `row` of A_r and R_r is proportional to 1/m_i, so each derivative
    // is -1/m_i times the row itself.
    const double da = -inv_m * sys.a_r.row(row).dot(pw.col(row));
    const double dr = -inv_m * sys.r_r.row(row).dot(rw.col(row));
    out.d_inertia(i) = 2.0 * (da + dr);
    // d_i enters only the diagonal entry -d_i/m_i.
    out.d_damping(i) = 2.0 * (-inv_m * pw(row, row));
  }
  return out;
}

PowerNetwork with_converter_parameters(const PowerNetwork& net,
                                       const std::vector<std::size_t>& converters,
                                       const Eigen::VectorXd& m_c, const Eigen::VectorXd& d_c) {
  PowerNetwork out = net;
  for (std::size_t k = 0; k < converters.size(); ++k) {
    out.nodes.at(converters[k]).inertia = m_c(static_cast<Eigen::Index>(k));
    out.nodes.at(converters[k]).damping = d_c(static_cast<Eigen::Index>(k));
  }
  return out;
}

AllocationObjective allocation_objective(const PowerNetwork& net,
                                         const std::vector<std::size_t>& converters,
                                         const Eigen::VectorXd& m_c,
                                         const Eigen::VectorXd& d_c) {
  const PowerNetwork candidate = with_converter_parameters(net, converters, m_c, d_c);
  validate(candidate);
  const H2Sensitivity s = h2_sensitivity(candidate.inertia(), candidate.damping(),
                                         build_laplacian(candidate), candidate.gamma);
  AllocationObjective out;
  out.value = s.value;
  out.grad_inertia.resize(static_cast<Eigen::Index>(converters.size()));
  out.grad_damping.resize(static_cast<Eigen::Index>(converters.size()));
  for (std::size_t k = 0; k < converters.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(converters[k]);
    out.grad_inertia(static_cast<Eigen::Index>(k)) = s.d_inertia(i);
    out.grad_damping(static_cast<Eigen::Index>(k)) = s.d_damping(i);
  }
  return out;
}

AllocationDerived derive_allocation(const AllocationProblem& p, const PowerNetwork& net) {
  validate(net);
  if (!is_connected(net)) {
    throw Error(ErrorCode::kDisconnectedNetwork, "allocation: network is disconnected");
  }
  const std::size_t n = net.size();
  if (p.converters.empty()) throw Error(ErrorCode::kInvalidInput, "allocation needs at least one converter");
  std::set<std::size_t> conv(p.converters.begin(), p.converters.end());
  if (conv.size() != p.converters.size()) {
    throw Error(ErrorCode::kInvalidInput, "converter indices must be distinct");
  }
  if (*conv.rbegin() >= n) throw Error(ErrorCode::kInvalidInput, "converter index out of range");

  AllocationDerived out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!conv.count(i)) out.machines.push_back(i);
  }
  if (out.machines.empty()) {
    throw Error(ErrorCode::kInvalidInput, "allocation needs at least one machine to fix the sharing ratio");
  }
  const auto n_c = static_cast<Eigen::Index>(p.converters.size());
  if (p.machine_power.size() != static_cast<Eigen::Index>(out.machines.size())) {
    throw Error(ErrorCode::kInvalidInput, "machine_power needs one entry per machine");
  }
  if (p.m_lower.size() != n_c || p.m_upper.size() != n_c || p.d_lower.size() != n_c ||
      p.d_upper.size() != n_c) {
    throw Error(ErrorCode::kInvalidInput, "inertia and damping boxes need one entry per converter");
  }
  if ((p.m_lower.array() <= 0.0).any() || (p.d_lower.array() <= 0.0).any() ||
      (p.m_lower.array() > p.m_upper.array()).any() ||
      (p.d_lower.array() > p.d_upper.array()).any()) {
    throw Error(ErrorCode::kInvalidInput, "boxes must satisfy 0 < lower <= upper");
  }
  if (p.starts == 0) throw Error(ErrorCode::kInvalidInput, "starts must be positive");

  const double total = p.machine_power.sum();
  if (!(total < 0.0)) {
    throw Error(ErrorCode::kInfeasible, "power balance: total machine power must be negative");
  }
  out.p_bar = -total;
  const Eigen::VectorXd damping = net.damping();
  std::vector<double> ratios;
  for (std::size_t k = 0; k < out.machines.size(); ++k) {
    ratios.push_back(std::abs(p.machine_power(static_cast<Eigen::Index>(k))) /
                     damping(static_cast<Eigen::Index>(out.machines[k])));
  }
  out.sharing_ratio = ratios.front();
  for (double r : ratios) {
    if (std::abs(r - out.sharing_ratio) > 1e-9 * std::max(std::abs(out.sharing_ratio), 1e-300)) {
      std::ostringstream msg;
      msg << "power sharing: machine ratios |P|/d differ (" << out.sharing_ratio << " vs " << r << ")";
      throw Error(ErrorCode::kInfeasible, msg.str());
    }
  }
  if (!(out.sharing_ratio > 0.0)) {
    throw Error(ErrorCode::kInfeasible, "power sharing: ratio must be positive");
  }
  out.damping_sum = out.p_bar / out.sharing_ratio;
  const double slack = 1e-9 * std::max(1.0, out.damping_sum);
  if (out.damping_sum < p.d_lower.sum() - slack || out.damping_sum > p.d_upper.sum() + slack) {
    std::ostringstream msg;
    msg << "power sharing: implied converter damping sum " << out.damping_sum
        << " lies outside [" << p.d_lower.sum() << ", " << p.d_upper.sum() << "]";
    throw Error(ErrorCode::kInfeasible, msg.str());
  }
  const double kslack = 1e-9 * std::max(1.0, p.inertia_budget);
  if (p.inertia_budget < p.m_lower.sum() - kslack || p.inertia_budget > p.m_upper.sum() + kslack) {
    std::ostringstream msg;
    msg << "budget: inertia budget " << p.inertia_budget << " lies outside ["
        << p.m_lower.sum() << ", " << p.m_upper.sum() << "]";
    throw Error(ErrorCode::kInfeasible, msg.str());
  }
  return out;
}

ScenarioSolution solve_allocation(const AllocationProblem& p, const PowerNetwork& net) {
  const AllocationDerived derived = derive_allocation(p, net);
  const auto n_c = static_cast<Eigen::Index>(p.converters.size());
  const BoxHyperplane m_set{p.m_lower, p.m_upper, Eigen::VectorXd::Ones(n_c), p.inertia_budget, true};
  const BoxHyperplane d_set{p.d_lower, p.d_upper, Eigen::VectorXd::Ones(n_c), derived.damping_sum, true};
  const SpectralData spec = build_laplacian(net);
  Eigen::VectorXd inertia = net.inertia();
  Eigen::VectorXd damping = net.damping();

  const ObjectiveFn objective = [&](const Eigen::VectorXd& z, Eigen::VectorXd& grad) {
    for (Eigen::Index k = 0; k < n_c; ++k) {
      const auto i = static_cast<Eigen::Index>(p.converters[static_cast<std::size_t>(k)]);
      inertia(i) = z(k);
      damping(i) = z(n_c + k);
    }
    const H2Sensitivity s = h2_sensitivity(inertia, damping, spec, net.gamma);
    grad.resize(2 * n_c);
    for (Eigen::Index k = 0; k < n_c; ++k) {
      const auto i = static_cast<Eigen::Index>(p.converters[static_cast<std::size_t>(k)]);
      grad(k) = s.d_inertia(i);
      grad(n_c + k) = s.d_damping(i);
    }
    return s.value;
  };
  const ProjectionFn projection = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd out(2 * n_c);
    out.head(n_c) = project(m_set, z.head(n_c));
    out.tail(n_c) = project(d_set, z.tail(n_c));
    return out;
  };

  SpgOptions options;
  options.max_iterations = p.max_iterations;
  options.tolerance = p.tolerance;

  ScenarioSolution s;
  s.scenario = "allocation";
  s.converters = p.converters;
  std::size_t best = 0;
  SpgResult best_run;
  for (std::size_t start = 0; start < p.starts; ++start) {
    Eigen::VectorXd z0(2 * n_c);
    if (start == 0) {
      z0.head(n_c) = project(m_set, Eigen::VectorXd::Constant(n_c, p.inertia_budget / n_c));
      z0.tail(n_c) = project(d_set, Eigen::VectorXd::Constant(n_c, derived.damping_sum / n_c));
    } else {
      Rng rng = make_rng(p.seed, start, 2);
      z0.head(n_c) = sample_feasible(m_set, rng);
      z0.tail(n_c) = sample_feasible(d_set, rng);
    }
    Eigen::VectorXd g0;
    StartRecord record;
    record.initial = z0;
    record.initial_objective = objective(z0, g0);
    SpgResult run = spectral_projected_gradient(objective, projection, z0, options);
    record.final = run.x;
    record.final_objective = run.value;
    record.iterations = run.iterations;
    record.converged = run.converged;
    s.starts.push_back(record);
    if (start == 0 || run.value < best_run.value - 1e-15) {
      best = start;
      best_run = std::move(run);
    }
  }

  s.inertia = best_run.x.head(n_c);
  s.damping = best_run.x.tail(n_c);
  s.objective = best_run.value;
  s.iterations = best_run.iterations;
  s.converged = best_run.converged;
  s.kkt_residual = best_run.projected_gradient_norm;
  s.history = best_run.history;
  s.candidates_evaluated = p.starts;

  s.steady_power = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.size()));
  for (std::size_t k = 0; k < derived.machines.size(); ++k) {
    s.steady_power(static_cast<Eigen::Index>(derived.machines[k])) =
        p.machine_power(static_cast<Eigen::Index>(k));
  }
  for (Eigen::Index k = 0; k < n_c; ++k) {
    s.steady_power(static_cast<Eigen::Index>(p.converters[static_cast<std::size_t>(k)])) =
        derived.sharing_ratio * s.damping(k);
  }
  std::ostringstream cert;
  cert << "best of " << p.starts << " projected-gradient starts (start " << best
       << "); local optimum, no global certificate";
  s.certificate = cert.str();
  return s;
}

double feasibility_violation(const AllocationProblem& p, const PowerNetwork& net,
                             const ScenarioSolution& s) {
  const AllocationDerived derived = derive_allocation(p, net);
  double v = 0.0;
  v = std::max(v, (p.m_lower - s.inertia).maxCoeff());
  v = std::max(v, (s.inertia - p.m_upper).maxCoeff());
  v = std::max(v, (p.d_lower - s.damping).maxCoeff());
  v = std::max(v, (s.damping - p.d_upper).maxCoeff());
  v = std::max(v, std::abs(s.inertia.sum() - p.inertia_budget));
  // Power balance over converters and sharing across every unit.
  double converter_power = 0.0;
  for (std::size_t k = 0; k < p.converters.size(); ++k) {
    const double pk = s.steady_power(static_cast<Eigen::Index>(p.converters[k]));
    converter_power += pk;
    v = std::max(v, std::abs(std::abs(pk) / s.damping(static_cast<Eigen::Index>(k)) -
                             derived.sharing_ratio));
  }
  v = std::max(v, std::abs(converter_power - derived.p_bar));
  return v;
}

}  // namespace gridh2
