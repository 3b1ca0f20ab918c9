#include "gridh2/projection.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "gridh2/error.hpp"

namespace gridh2 {

namespace {

Eigen::VectorXd clip(const Eigen::VectorXd& x, const BoxHyperplane& set) {
  return x.cwiseMax(set.lower).cwiseMin(set.upper);
}

void check_shape(const BoxHyperplane& set, const Eigen::VectorXd& x) {
  if (set.lower.size() != x.size() || set.upper.size() != x.size() ||
      set.weights.size() != x.size()) {
    throw Error(ErrorCode::kInvalidInput, "projection: dimension mismatch");
  }
  if ((set.weights.array() <= 0.0).any()) {
    throw Error(ErrorCode::kInvalidInput, "projection: weights must be positive");
  }
}

// Equality-constrained projection; assumes the set is feasible.
Eigen::VectorXd project_onto_slice(const BoxHyperplane& set, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  auto phi = [&](double mu) {
    return set.weights.dot(clip(x - mu * set.weights, set));
  };
  std::vector<double> breaks;
  breaks.reserve(static_cast<std::size_t>(2 * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    breaks.push_back((x(i) - set.upper(i)) / set.weights(i));
    breaks.push_back((x(i) - set.lower(i)) / set.weights(i));
  }
  std::sort(breaks.begin(), breaks.end());
  // phi is non-increasing; phi(breaks.front()) is the box maximum and
  // phi(breaks.back()) the box minimum.
  std::size_t lo = 0;
  std::size_t hi = breaks.size() - 1;
  if (phi(breaks[lo]) <= set.target) return clip(x - breaks[lo] * set.weights, set);
  if (phi(breaks[hi]) >= set.target) return clip(x - breaks[hi] * set.weights, set);
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (phi(breaks[mid]) >= set.target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double mu_a = breaks[lo];
  const double mu_b = breaks[hi];
  const double phi_a = phi(mu_a);
  const double phi_b = phi(mu_b);
  double mu = mu_a;
  if (phi_a > phi_b) mu = mu_a + (phi_a - set.target) * (mu_b - mu_a) / (phi_a - phi_b);
  return clip(x - mu * set.weights, set);
}

}  // namespace

bool BoxHyperplane::feasible() const {
  if ((lower.array() > upper.array()).any()) return false;
  const double min_value = weights.dot(lower);
  const double max_value = weights.dot(upper);
  const double slack = 1e-12 * std::max(1.0, std::abs(target));
  if (equality) return min_value <= target + slack && target <= max_value + slack;
  return min_value <= target + slack;
}

double BoxHyperplane::max_violation(const Eigen::VectorXd& x) const {
  double v = 0.0;
  v = std::max(v, (lower - x).maxCoeff());
  v = std::max(v, (x - upper).maxCoeff());
  const double residual = weights.dot(x) - target;
  v = std::max(v, equality ? std::abs(residual) : residual);
  return v;
}

Eigen::VectorXd project(const BoxHyperplane& set, const Eigen::VectorXd& x) {
  check_shape(set, x);
  if (!set.feasible()) {
    throw Error(ErrorCode::kInfeasible, "projection: constraint set is empty");
  }
  if (!set.equality) {
    Eigen::VectorXd y = clip(x, set);
    if (set.weights.dot(y) <= set.target) return y;
  }
  return project_onto_slice(set, x);
}

DykstraResult dykstra_project(const BoxHyperplane& set, const Eigen::VectorXd& x,
                              double tolerance, int max_iterations) {
  check_shape(set, x);
  const double ww = set.weights.squaredNorm();
  auto onto_plane = [&](const Eigen::VectorXd& z) -> Eigen::VectorXd {
    return z - (set.weights.dot(z) - set.target) / ww * set.weights;
  };
  DykstraResult out;
  Eigen::VectorXd current = x;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(x.size());
  for (int it = 1; it <= max_iterations; ++it) {
    const Eigen::VectorXd y = clip(current + p, set);
    const Eigen::VectorXd p_next = current + p - y;
    const Eigen::VectorXd next = onto_plane(y + q);
    const Eigen::VectorXd q_next = y + q - next;
    // The iterate alone can stall while the corrections still move.
    const double change = std::max({(next - current).lpNorm<Eigen::Infinity>(),
                                    (p_next - p).lpNorm<Eigen::Infinity>(),
                                    (q_next - q).lpNorm<Eigen::Infinity>()});
    p = p_next;
    q = q_next;
    current = next;
    out.iterations = it;
    if (change < tolerance && set.max_violation(current) < tolerance) {
      out.converged = true;
      break;
    }
  }
  out.point = current;
  return out;
}

Eigen::VectorXd sample_feasible(const BoxHyperplane& set, Rng& rng) {
  if (!set.feasible()) throw Error(ErrorCode::kInfeasible, "sample_feasible: empty set");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(set.lower.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) = set.lower(i) + unit(rng) * (set.upper(i) - set.lower(i));
  }
  const double value = set.weights.dot(x);
  if (!set.equality && value <= set.target) return x;
  if (value > set.target) {
    const double span = set.weights.dot(x - set.lower);
    const double s = span > 0.0 ? (set.target - set.weights.dot(set.lower)) / span : 0.0;
    return set.lower + std::clamp(s, 0.0, 1.0) * (x - set.lower);
  }
  const double span = set.weights.dot(set.upper - x);
  const double s = span > 0.0 ? (set.weights.dot(set.upper) - set.target) / span : 0.0;
  return set.upper - std::clamp(s, 0.0, 1.0) * (set.upper - x);
}

SpgResult spectral_projected_gradient(const ObjectiveFn& objective,
                                      const ProjectionFn& projection, Eigen::VectorXd x0,
                                      const SpgOptions& options) {
  constexpr double kArmijo = 1e-4;
  SpgResult out;
  Eigen::VectorXd x = projection(x0);
  Eigen::VectorXd g(x.size());
  double f = objective(x, g);
  out.x = x;
  out.value = f;
  out.history.push_back(f);

  std::deque<double> recent{f};
  double pg = (projection(x - g) - x).lpNorm<Eigen::Infinity>();
  double alpha = pg > 0.0 ? std::clamp(1.0 / pg, options.step_min, options.step_max) : 1.0;

  Eigen::VectorXd g_new(x.size());
  for (int it = 0; it < options.max_iterations; ++it) {
    if (pg <= options.tolerance) {
      out.converged = true;
      break;
    }
    const Eigen::VectorXd d = projection(x - alpha * g) - x;
    const double gtd = g.dot(d);
    const double f_ref = *std::max_element(recent.begin(), recent.end());
    double lambda = 1.0;
    Eigen::VectorXd x_new = x + d;
    double f_new = objective(x_new, g_new);
    bool stalled = false;
    while (!(f_new <= f_ref + kArmijo * lambda * gtd)) {
      const double denom = f_new - f - lambda * gtd;
      double trial = denom > 0.0 ? -0.5 * lambda * lambda * gtd / denom : 0.5 * lambda;
      if (trial < 0.1 * lambda || trial > 0.9 * lambda) trial = 0.5 * lambda;
      lambda = trial;
      if (lambda < 1e-16) {
        stalled = true;
        break;
      }
      x_new = x + lambda * d;
      f_new = objective(x_new, g_new);
    }
    out.iterations = it + 1;
    if (stalled) break;

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    alpha = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, options.step_min, options.step_max)
                     : options.step_max;
    x = x_new;
    g = g_new;
    f = f_new;
    out.history.push_back(f);
    recent.push_back(f);
    if (static_cast<int>(recent.size()) > options.memory) recent.pop_front();
    if (f < out.value) {
      out.value = f;
      out.x = x;
    }
    pg = (projection(x - g) - x).lpNorm<Eigen::Infinity>();
  }
  // Report stationarity at the returned point.
  Eigen::VectorXd g_best(out.x.size());
  out.value = objective(out.x, g_best);
  out.projected_gradient_norm = (projection(out.x - g_best) - out.x).lpNorm<Eigen::Infinity>();
  if (out.projected_gradient_norm <= options.tolerance) out.converged = true;
  return out;
}

}  // namespace gridh2
