#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "gridh2/error.hpp"
#include "gridh2/optimize.hpp"

namespace gridh2 {

namespace {

EdgeList all_slots(std::size_t n) {
  EdgeList slots;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) slots.emplace_back(i, j);
  }
  return slots;
}

double log_binomial(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Surrogate objective straight from the edge list: trace(L^2) is the sum of
// squared degrees plus twice the sum of squared line susceptances.
class TraceEvaluator {
 public:
  TraceEvaluator(std::size_t n, double m_min, double d_min, double gamma)
      : degree_(n), m_min_(m_min), scale_(gamma / (2.0 * d_min)) {}

  double operator()(const EdgeList& edges, const std::vector<double>& b) {
    std::fill(degree_.begin(), degree_.end(), 0.0);
    double off = 0.0;
    double total = 0.0;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      degree_[edges[k].first] += b[k];
      degree_[edges[k].second] += b[k];
      off += b[k] * b[k];
      total += b[k];
    }
    double diag = 0.0;
    for (double d : degree_) diag += d * d;
    return scale_ * (diag + 2.0 * off + 2.0 * total / m_min_);
  }

 private:
  std::vector<double> degree_;
  double m_min_;
  double scale_;
};

ScenarioSolution finish(const AssignmentProblem& p, EdgeList edges, std::vector<double> b) {
  ScenarioSolution s;
  s.scenario = "assignment";
  s.edges = std::move(edges);
  s.susceptances = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::MatrixXd incidence = build_incidence(p.n_nodes, s.edges);
  s.objective = spectral_objective(s.susceptances, incidence, p.m_min, p.d_min, p.gamma).value;
  s.steady_power = incidence * s.susceptances.asDiagonal() * incidence.transpose() * p.theta_star;
  s.converged = true;
  return s;
}

ScenarioSolution exhaustive(const AssignmentProblem& p) {
  const EdgeList slots = all_slots(p.n_nodes);
  const std::size_t n_slots = slots.size();
  const auto m = static_cast<std::size_t>(p.edge_susceptances.size());
  std::vector<double> sorted(p.edge_susceptances.data(), p.edge_susceptances.data() + m);
  std::sort(sorted.begin(), sorted.end());

  TraceEvaluator eval(p.n_nodes, p.m_min, p.d_min, p.gamma);
  std::vector<std::size_t> pick(m);
  std::iota(pick.begin(), pick.end(), 0);
  EdgeList edges(m);
  double best = std::numeric_limits<double>::infinity();
  EdgeList best_edges;
  std::vector<double> best_b;
  std::size_t visited = 0;

  // Subsets in lexicographic order, placements in lexicographic order within
  // each subset: the first candidate to reach the minimum is the
  // lexicographically smallest among ties.
  while (true) {
    for (std::size_t k = 0; k < m; ++k) edges[k] = slots[pick[k]];
    if (!p.require_connected || count_components(p.n_nodes, edges) == 1) {
      std::vector<double> b = sorted;
      do {
        const double value = eval(edges, b);
        ++visited;
        if (value < best - 1e-12) {
          best = value;
          best_edges = edges;
          best_b = b;
        }
      } while (std::next_permutation(b.begin(), b.end()));
    }
    // Advance to the next m-subset of n_slots.
    std::size_t i = m;
    while (i > 0 && pick[i - 1] == n_slots - m + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < m; ++k) pick[k] = pick[k - 1] + 1;
  }

  if (best_edges.empty()) {
    throw Error(ErrorCode::kInfeasible, "connectivity: no connected edge set exists");
  }
  ScenarioSolution s = finish(p, std::move(best_edges), std::move(best_b));
  s.candidates_evaluated = visited;
  s.iterations = static_cast<int>(std::min<std::size_t>(visited, INT32_MAX));
  s.certificate = "exhaustive enumeration over " + std::to_string(visited) +
                  " candidates (global optimum)";
  return s;
}

ScenarioSolution greedy(const AssignmentProblem& p) {
  const EdgeList slots = all_slots(p.n_nodes);
  const auto m = static_cast<std::size_t>(p.edge_susceptances.size());
  std::vector<double> values(p.edge_susceptances.data(), p.edge_susceptances.data() + m);
  std::sort(values.begin(), values.end(), std::greater<>());

  TraceEvaluator eval(p.n_nodes, p.m_min, p.d_min, p.gamma);
  std::vector<bool> used(slots.size(), false);
  EdgeList edges;
  std::vector<double> b;
  std::size_t visited = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t remaining_after = m - k - 1;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_slot = slots.size();
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (used[s]) continue;
      edges.push_back(slots[s]);
      b.push_back(values[k]);
      // Keep enough lines in reserve to join the remaining components.
      const bool viable = !p.require_connected ||
                          count_components(p.n_nodes, edges) - 1 <= remaining_after;
      if (viable) {
        const double value = eval(edges, b);
        ++visited;
        if (value < best - 1e-12) {
          best = value;
          best_slot = s;
        }
      }
      edges.pop_back();
      b.pop_back();
    }
    if (best_slot == slots.size()) {
      throw Error(ErrorCode::kInfeasible, "connectivity: greedy found no viable line placement");
    }
    used[best_slot] = true;
    edges.push_back(slots[best_slot]);
    b.push_back(values[k]);
  }
  // Report edges in slot order, carrying their susceptances along.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::tie(edges[x], b[x]) < std::tie(edges[y], b[y]);
  });
  EdgeList sorted_edges;
  std::vector<double> sorted_b;
  for (std::size_t k : order) {
    sorted_edges.push_back(edges[k]);
    sorted_b.push_back(b[k]);
  }
  ScenarioSolution s = finish(p, std::move(sorted_edges), std::move(sorted_b));
  s.candidates_evaluated = visited;
  s.iterations = static_cast<int>(m);
  s.certificate = "greedy construction (heuristic, no optimality guarantee)";
  return s;
}

}  // namespace

void validate(const AssignmentProblem& p) {
  if (p.n_nodes < 2) throw Error(ErrorCode::kInvalidInput, "assignment needs at least two nodes");
  const auto m = static_cast<std::size_t>(p.edge_susceptances.size());
  if (m == 0) throw Error(ErrorCode::kInvalidInput, "assignment needs at least one line");
  if (m > p.n_nodes * (p.n_nodes - 1) / 2) {
    throw Error(ErrorCode::kInvalidInput, "more lines than node pairs");
  }
  if ((p.edge_susceptances.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "edge susceptances must be positive");
  }
  if (p.theta_star.size() != static_cast<Eigen::Index>(p.n_nodes)) {
    throw Error(ErrorCode::kInvalidInput, "theta_star needs one entry per node");
  }
  if (!(p.m_min > 0.0) || !(p.d_min > 0.0) || !(p.gamma > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "m_min, d_min and gamma must be positive");
  }
  if (p.require_connected && m + 1 < p.n_nodes) {
    throw Error(ErrorCode::kInfeasible, "connectivity: " + std::to_string(m) +
                                            " lines cannot connect " +
                                            std::to_string(p.n_nodes) + " nodes");
  }
}

double assignment_candidate_count(const AssignmentProblem& p) {
  const auto m = static_cast<std::size_t>(p.edge_susceptances.size());
  const double slots = static_cast<double>(p.n_nodes * (p.n_nodes - 1) / 2);
  double log_count = log_binomial(slots, static_cast<double>(m));
  // Distinct placements of a multiset: m! / prod(multiplicity!).
  std::vector<double> sorted(p.edge_susceptances.data(), p.edge_susceptances.data() + m);
  std::sort(sorted.begin(), sorted.end());
  log_count += std::lgamma(static_cast<double>(m) + 1.0);
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j < m && sorted[j] == sorted[i]) ++j;
    log_count -= std::lgamma(static_cast<double>(j - i) + 1.0);
    i = j;
  }
  return std::round(std::exp(log_count));
}

ScenarioSolution solve_assignment(const AssignmentProblem& p) {
  validate(p);
  if (p.strategy == SearchStrategy::kGreedy) return greedy(p);
  const double count = assignment_candidate_count(p);
  if (count > p.max_evaluations) {
    std::ostringstream msg;
    msg << "exhaustive search would visit " << count << " candidates (limit "
        << p.max_evaluations << "); use the greedy strategy";
    throw Error(ErrorCode::kTooLarge, msg.str());
  }
  return exhaustive(p);
}

double feasibility_violation(const AssignmentProblem& p, const ScenarioSolution& s) {
  double v = 0.0;
  if (s.edges.size() != static_cast<std::size_t>(p.edge_susceptances.size())) return INFINITY;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& [a, b] : s.edges) {
    if (a >= p.n_nodes || b >= p.n_nodes || a == b) return INFINITY;
    if (!seen.insert(std::minmax(a, b)).second) return INFINITY;
  }
  std::vector<double> want(p.edge_susceptances.data(),
                           p.edge_susceptances.data() + p.edge_susceptances.size());
  std::vector<double> got(s.susceptances.data(), s.susceptances.data() + s.susceptances.size());
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  for (std::size_t k = 0; k < want.size(); ++k) v = std::max(v, std::abs(want[k] - got[k]));
  if (p.require_connected && count_components(p.n_nodes, s.edges) != 1) return INFINITY;
  const Eigen::MatrixXd incidence = build_incidence(p.n_nodes, s.edges);
  const Eigen::VectorXd power =
      incidence * s.susceptances.asDiagonal() * incidence.transpose() * p.theta_star;
  v = std::max(v, (power - s.steady_power).lpNorm<Eigen::Infinity>());
  return v;
}

}  // namespace gridh2
