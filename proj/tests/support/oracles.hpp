#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "gridh2/network.hpp"
#include "gridh2/random.hpp"

namespace gridh2::testing {

// Dense solve of (I (x) a + a (x) I) vec(P) = -vec(q). O(n^6); n <= 40 only.
inline Eigen::MatrixXd kronecker_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd lift =
      Eigen::kroneckerProduct(eye, a).eval() + Eigen::kroneckerProduct(a, eye).eval();
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), n * n);
  const Eigen::VectorXd vec = lift.fullPivLu().solve(rhs);
  return Eigen::Map<const Eigen::MatrixXd>(vec.data(), n, n);
}

// Integral of ||C e^{At} R||_F^2 over [0, inf): five-point Gauss-Legendre on
// panels of width h, stepping with e^{Ah} until a whole panel contributes
// less than `tail` relative to the running total.
inline double quadrature_h2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& r,
                            const Eigen::MatrixXd& c, double h = 0.02, double tail = 1e-13) {
  static const double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                  0.5384693101056831, 0.9061798459386640};
  static const double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                    0.4786286704993665, 0.2369268850561891};
  std::vector<Eigen::MatrixXd> inner;
  for (double x : nodes) inner.push_back((a * (0.5 * h * (x + 1.0))).exp());
  const Eigen::MatrixXd step = (a * h).exp();
  Eigen::MatrixXd x = r;  // e^{A t_k} R
  double total = 0.0;
  for (int k = 0; k < 10000000; ++k) {
    double panel = 0.0;
    for (int j = 0; j < 5; ++j) panel += weights[j] * (c * inner[j] * x).squaredNorm();
    panel *= 0.5 * h;
    total += panel;
    if (k > 10 && panel < tail * total) break;
    x = step * x;
  }
  return total;
}

// Random connected network: a random tree plus independent extra edges.
inline PowerNetwork random_network(Rng& rng, std::size_t n, double lo, double hi,
                                   bool homogeneous = false, double extra = 0.3) {
  PowerNetwork net;
  const double m0 = log_uniform(rng, lo, hi);
  const double d0 = log_uniform(rng, lo, hi);
  for (std::size_t i = 0; i < n; ++i) {
    Node node;
    node.id = "n" + std::to_string(i);
    node.inertia = homogeneous ? m0 : log_uniform(rng, lo, hi);
    node.damping = homogeneous ? d0 : log_uniform(rng, lo, hi);
    net.nodes.push_back(node);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  for (std::size_t i = 1; i < n; ++i) {
    const auto j = static_cast<std::size_t>(u(rng) * static_cast<double>(i));
    net.edges.push_back({std::min(i, j), std::max(i, j), log_uniform(rng, lo, hi)});
    used[i][j] = used[j][i] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!used[i][j] && u(rng) < extra) net.edges.push_back({i, j, log_uniform(rng, lo, hi)});
    }
  }
  net.gamma = log_uniform(rng, lo, hi);
  return net;
}

inline PowerNetwork unit_network(std::size_t n,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  PowerNetwork net;
  for (std::size_t i = 0; i < n; ++i) net.nodes.push_back({"n" + std::to_string(i)});
  for (const auto& [a, b] : edges) net.edges.push_back({a, b, 1.0});
  return net;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace gridh2::testing
