#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "gridh2/error.hpp"
#include "gridh2/optimize.hpp"

namespace gridh2 {

namespace {

BoxHyperplane line_polytope(const MinMaxProblem& p) {
  return {p.b_min, p.b_max, p.costs, p.budget, p.cost_mode == CostMode::kEquality};
}

double largest_eigenvalue(const Eigen::MatrixXd& incidence, const Eigen::VectorXd& b) {
  const Eigen::MatrixXd lap = incidence * b.asDiagonal() * incidence.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(lap.rows() - 1);
}

struct Candidate {
  EdgeList edges;  // edges[k] carries line k
  InnerMinMaxResult inner;
};

Candidate evaluate(const MinMaxProblem& p, const BoxHyperplane& polytope, EdgeList edges) {
  Candidate c;
  c.inner = minimize_lambda_max(build_incidence(p.n_nodes, edges), polytope, p.max_iterations);
  c.edges = std::move(edges);
  return c;
}

// Groups lines with identical (b_min, b_max, cost) so that placements that
// only swap interchangeable lines are visited once.
std::vector<int> line_types(const MinMaxProblem& p) {
  std::map<std::tuple<double, double, double>, int> ids;
  std::vector<int> types;
  for (Eigen::Index k = 0; k < p.b_min.size(); ++k) {
    const auto key = std::make_tuple(p.b_min(k), p.b_max(k), p.costs(k));
    const auto it = ids.try_emplace(key, static_cast<int>(ids.size())).first;
    types.push_back(it->second);
  }
  return types;
}

double log_count(std::size_t slots, const std::vector<int>& types) {
  const auto m = static_cast<double>(types.size());
  double out = std::lgamma(static_cast<double>(slots) + 1.0) - std::lgamma(m + 1.0) -
               std::lgamma(static_cast<double>(slots) - m + 1.0);
  out += std::lgamma(m + 1.0);
  std::map<int, int> mult;
  for (int t : types) ++mult[t];
  for (const auto& [t, c] : mult) out -= std::lgamma(static_cast<double>(c) + 1.0);
  return out;
}

EdgeList all_slots(std::size_t n) {
  EdgeList slots;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) slots.emplace_back(i, j);
  }
  return slots;
}

bool better(const Candidate& a, const Candidate& b) {
  return a.inner.lambda_max < b.inner.lambda_max - 1e-12;
}

std::vector<Candidate> exhaustive_candidates(const MinMaxProblem& p,
                                             const BoxHyperplane& polytope,
                                             std::size_t& visited) {
  const EdgeList slots = all_slots(p.n_nodes);
  const std::vector<int> types = line_types(p);
  const std::size_t m = types.size();
  if (std::exp(log_count(slots.size(), types)) > p.max_topologies) {
    std::ostringstream msg;
    msg << "min-max exhaustive search would visit about "
        << std::round(std::exp(log_count(slots.size(), types))) << " topologies (limit "
        << p.max_topologies << "); use the greedy strategy";
    throw Error(ErrorCode::kTooLarge, msg.str());
  }
  std::vector<int> sorted_types = types;
  std::sort(sorted_types.begin(), sorted_types.end());

  std::vector<std::size_t> pick(m);
  std::iota(pick.begin(), pick.end(), 0);
  std::vector<Candidate> best;
  while (true) {
    EdgeList subset(m);
    for (std::size_t k = 0; k < m; ++k) subset[k] = slots[pick[k]];
    if (!p.require_connected || count_components(p.n_nodes, subset) == 1) {
      std::vector<int> placement = sorted_types;
      do {
        // placement[k] is the line type on subset slot k; hand out concrete
        // line indices of each type in order.
        EdgeList edges(m);
        std::vector<bool> taken(m, false);
        for (std::size_t k = 0; k < m; ++k) {
          for (std::size_t line = 0; line < m; ++line) {
            if (!taken[line] && types[line] == placement[k]) {
              taken[line] = true;
              edges[line] = subset[k];
              break;
            }
          }
        }
        Candidate c = evaluate(p, polytope, std::move(edges));
        ++visited;
        if (best.empty() || better(c, best.front())) {
          best.clear();
          best.push_back(std::move(c));
        }
      } while (std::next_permutation(placement.begin(), placement.end()));
    }
    std::size_t i = m;
    while (i > 0 && pick[i - 1] == slots.size() - m + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < m; ++k) pick[k] = pick[k - 1] + 1;
  }
  return best;
}

Candidate greedy_candidate(const MinMaxProblem& p, const BoxHyperplane& polytope,
                           std::size_t& visited) {
  const EdgeList slots = all_slots(p.n_nodes);
  const auto m = static_cast<std::size_t>(p.b_min.size());
  const Eigen::VectorXd nominal =
      project(polytope, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m),
                                                  p.budget / p.costs.sum()));
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return nominal(static_cast<Eigen::Index>(a)) > nominal(static_cast<Eigen::Index>(b));
  });

  std::vector<bool> used(slots.size(), false);
  EdgeList placed;
  std::vector<double> placed_b;
  EdgeList edges(m);
  for (std::size_t step = 0; step < m; ++step) {
    const std::size_t line = order[step];
    const std::size_t remaining_after = m - step - 1;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_slot = slots.size();
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (used[s]) continue;
      placed.push_back(slots[s]);
      placed_b.push_back(nominal(static_cast<Eigen::Index>(line)));
      if (!p.require_connected || count_components(p.n_nodes, placed) - 1 <= remaining_after) {
        const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
            placed_b.data(), static_cast<Eigen::Index>(placed_b.size()));
        const double value = largest_eigenvalue(build_incidence(p.n_nodes, placed), b);
        ++visited;
        if (value < best - 1e-12) {
          best = value;
          best_slot = s;
        }
      }
      placed.pop_back();
      placed_b.pop_back();
    }
    if (best_slot == slots.size()) {
      throw Error(ErrorCode::kInfeasible, "connectivity: greedy found no viable line placement");
    }
    used[best_slot] = true;
    placed.push_back(slots[best_slot]);
    placed_b.push_back(nominal(static_cast<Eigen::Index>(line)));
    edges[line] = slots[best_slot];
  }
  return evaluate(p, polytope, std::move(edges));
}

}  // namespace

InnerMinMaxResult minimize_lambda_max(const Eigen::MatrixXd& incidence,
                                      const BoxHyperplane& polytope, int max_iterations) {
  constexpr int kStagnationWindow = 500;
  const Eigen::Index m = incidence.cols();
  Eigen::VectorXd x =
      project(polytope, Eigen::VectorXd::Constant(m, polytope.target / polytope.weights.sum()));
  const double width = (polytope.upper - polytope.lower).maxCoeff();
  const double step0 = 0.25 * std::max(width, 1e-12);

  InnerMinMaxResult out;
  out.susceptances = x;
  out.lambda_max = std::numeric_limits<double>::infinity();
  int last_improvement = 0;
  for (int it = 0; it < max_iterations; ++it) {
    const ObjectiveValue v = lambda_max_subgradient(x, incidence);
    out.iterations = it + 1;
    if (v.value < out.lambda_max - 1e-10 * std::max(1.0, std::abs(v.value))) {
      last_improvement = it;
    }
    if (v.value < out.lambda_max) {
      out.lambda_max = v.value;
      out.susceptances = x;
    }
    out.history.push_back(out.lambda_max);
    if (it - last_improvement >= kStagnationWindow) {
      out.converged = true;
      break;
    }
    const double norm = v.gradient.norm();
    if (norm == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::VectorXd next =
        project(polytope, x - step0 / std::sqrt(static_cast<double>(it) + 1.0) * v.gradient / norm);
    if ((next - x).lpNorm<Eigen::Infinity>() == 0.0) {
      // Projection pins the iterate (for example, a single budget-fixed line).
      out.converged = true;
      break;
    }
    x = next;
  }
  return out;
}

void validate(const MinMaxProblem& p) {
  if (p.n_nodes < 2) throw Error(ErrorCode::kInvalidInput, "min-max needs at least two nodes");
  const Eigen::Index m = p.b_min.size();
  if (m == 0) throw Error(ErrorCode::kInvalidInput, "min-max needs at least one line");
  if (p.b_max.size() != m || p.costs.size() != m) {
    throw Error(ErrorCode::kInvalidInput, "b_min, b_max and costs need one entry per line");
  }
  if (static_cast<std::size_t>(m) > p.n_nodes * (p.n_nodes - 1) / 2) {
    throw Error(ErrorCode::kInvalidInput, "more lines than node pairs");
  }
  if ((p.b_min.array() <= 0.0).any() || (p.b_min.array() > p.b_max.array()).any()) {
    throw Error(ErrorCode::kInvalidInput, "line bounds must satisfy 0 < b_min <= b_max");
  }
  if ((p.costs.array() <= 0.0).any()) throw Error(ErrorCode::kInvalidInput, "costs must be positive");
  if (p.theta_star.size() != static_cast<Eigen::Index>(p.n_nodes)) {
    throw Error(ErrorCode::kInvalidInput, "theta_star needs one entry per node");
  }
  if (!(p.m_min > 0.0) || !(p.d_min > 0.0) || !(p.gamma > 0.0) || !(p.budget > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "m_min, d_min, gamma and budget must be positive");
  }
  if (!line_polytope(p).feasible()) {
    throw Error(ErrorCode::kInfeasible, "cost constraint: budget outside the reachable spend range");
  }
  if (p.require_connected && static_cast<std::size_t>(m) + 1 < p.n_nodes) {
    throw Error(ErrorCode::kInfeasible, "connectivity: too few lines to connect every node");
  }
  if (p.topology) {
    if (p.topology->size() != static_cast<std::size_t>(m)) {
      throw Error(ErrorCode::kInvalidInput, "topology must list one node pair per line");
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [a, b] : *p.topology) {
      if (a >= p.n_nodes || b >= p.n_nodes || a == b || !seen.insert(std::minmax(a, b)).second) {
        throw Error(ErrorCode::kInvalidInput, "topology contains an invalid or repeated pair");
      }
    }
    if (p.require_connected && count_components(p.n_nodes, *p.topology) != 1) {
      throw Error(ErrorCode::kInfeasible, "connectivity: the fixed topology is disconnected");
    }
  }
}

ScenarioSolution solve_minmax(const MinMaxProblem& p) {
  validate(p);
  const BoxHyperplane polytope = line_polytope(p);
  std::size_t visited = 0;
  Candidate best;
  if (p.topology) {
    best = evaluate(p, polytope, *p.topology);
    visited = 1;
  } else if (p.strategy == SearchStrategy::kGreedy) {
    best = greedy_candidate(p, polytope, visited);
  } else {
    std::vector<Candidate> found = exhaustive_candidates(p, polytope, visited);
    if (found.empty()) {
      throw Error(ErrorCode::kInfeasible, "connectivity: no connected topology exists");
    }
    best = std::move(found.front());
  }

  ScenarioSolution s;
  s.scenario = "minmax";
  s.edges = best.edges;
  s.susceptances = best.inner.susceptances;
  s.objective = minmax_objective(best.inner.lambda_max, p.n_nodes, p.m_min, p.d_min, p.gamma);
  const Eigen::MatrixXd incidence = build_incidence(p.n_nodes, s.edges);
  s.steady_power = incidence * s.susceptances.asDiagonal() * incidence.transpose() * p.theta_star;
  s.iterations = best.inner.iterations;
  s.converged = best.inner.converged;
  s.candidates_evaluated = visited;
  s.history = best.inner.history;
  s.kkt_residual = 0.0;
  std::ostringstream cert;
  cert << (p.topology ? "fixed topology" : std::string(to_string(p.strategy)) + " topology search")
       << " over " << visited << " candidate(s); inner projected subgradient "
       << (best.inner.converged ? "stagnated (approximate optimum)" : "hit the iteration limit");
  s.certificate = cert.str();
  return s;
}

double feasibility_violation(const MinMaxProblem& p, const ScenarioSolution& s) {
  if (s.edges.size() != static_cast<std::size_t>(p.b_min.size())) return INFINITY;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [a, b] : s.edges) {
    if (a >= p.n_nodes || b >= p.n_nodes || a == b) return INFINITY;
    if (!seen.insert(std::minmax(a, b)).second) return INFINITY;
  }
  if (p.require_connected && count_components(p.n_nodes, s.edges) != 1) return INFINITY;
  double v = line_polytope(p).max_violation(s.susceptances);
  const Eigen::MatrixXd incidence = build_incidence(p.n_nodes, s.edges);
  const Eigen::VectorXd power =
      incidence * s.susceptances.asDiagonal() * incidence.transpose() * p.theta_star;
  return std::max(v, (power - s.steady_power).lpNorm<Eigen::Infinity>());
}

}  // namespace gridh2
