#include "gridh2/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gridh2/error.hpp"

namespace gridh2 {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kDisconnectedNetwork: return "DisconnectedNetwork";
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kNonZeroFirstEigenvalue: return "NonZeroFirstEigenvalue";
    case ErrorCode::kUnstableStep: return "UnstableStep";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kTooLarge: return "TooLarge";
  }
  return "Unknown";
}

namespace {

template <typename Getter>
Eigen::VectorXd collect(const std::vector<Node>& nodes, Getter get) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = get(nodes[i]);
  }
  return out;
}

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidInput, what);
}

}  // namespace

Eigen::VectorXd PowerNetwork::inertia() const {
  return collect(nodes, [](const Node& n) { return n.inertia; });
}

Eigen::VectorXd PowerNetwork::damping() const {
  return collect(nodes, [](const Node& n) { return n.damping; });
}

Eigen::VectorXd PowerNetwork::angle_star() const {
  return collect(nodes, [](const Node& n) { return n.angle_star; });
}

Eigen::VectorXd PowerNetwork::susceptances() const {
  Eigen::VectorXd b(static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    b(static_cast<Eigen::Index>(e)) = edges[e].susceptance;
  }
  return b;
}

void validate(const PowerNetwork& net) {
  if (net.nodes.empty()) invalid("network must have at least one node");
  if (!(net.gamma > 0.0) || !std::isfinite(net.gamma)) {
    invalid("gamma must be positive and finite");
  }
  if (!(net.nominal_frequency > 0.0)) invalid("nominal_frequency must be positive");
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const Node& node = net.nodes[i];
    if (!(node.inertia > 0.0) || !std::isfinite(node.inertia)) {
      invalid("node " + std::to_string(i) + " ('" + node.id + "'): inertia must be positive");
    }
    if (!(node.damping > 0.0) || !std::isfinite(node.damping)) {
      invalid("node " + std::to_string(i) + " ('" + node.id + "'): damping must be positive");
    }
    if (!std::isfinite(node.angle_star)) {
      invalid("node " + std::to_string(i) + " ('" + node.id + "'): angle_star must be finite");
    }
    if (node.power_max && !(*node.power_max > 0.0)) {
      invalid("node " + std::to_string(i) + " ('" + node.id + "'): power_max must be positive");
    }
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const Edge& edge = net.edges[e];
    const std::string where = "edge " + std::to_string(e);
    if (edge.from >= net.nodes.size() || edge.to >= net.nodes.size()) {
      invalid(where + ": endpoint out of range");
    }
    if (edge.from == edge.to) invalid(where + ": self-loop");
    if (!(edge.susceptance > 0.0) || !std::isfinite(edge.susceptance)) {
      invalid(where + ": susceptance must be positive");
    }
    const auto key = std::minmax(edge.from, edge.to);
    if (!seen.insert({key.first, key.second}).second) {
      invalid(where + ": parallel edge (" + std::to_string(key.first) + "," +
              std::to_string(key.second) + ")");
    }
  }
}

Eigen::MatrixXd build_incidence(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                            static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [lo, hi] = std::minmax(edges[e].first, edges[e].second);
    b(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(e)) = 1.0;
    b(static_cast<Eigen::Index>(hi), static_cast<Eigen::Index>(e)) = -1.0;
  }
  return b;
}

Eigen::MatrixXd build_incidence(const PowerNetwork& net) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(net.edges.size());
  for (const Edge& e : net.edges) pairs.emplace_back(e.from, e.to);
  return build_incidence(net.size(), pairs);
}

Eigen::MatrixXd laplacian_matrix(const PowerNetwork& net) {
  const auto n = static_cast<Eigen::Index>(net.size());
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : net.edges) {
    const auto i = static_cast<Eigen::Index>(e.from);
    const auto j = static_cast<Eigen::Index>(e.to);
    lap(i, j) -= e.susceptance;
    lap(j, i) -= e.susceptance;
  }
  // Diagonal as the negated off-diagonal row sum keeps L*1 at exactly zero.
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) s += lap(i, j);
    }
    lap(i, i) = -s;
  }
  return lap;
}

SpectralData decompose_laplacian(const Eigen::MatrixXd& laplacian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(laplacian);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "symmetric eigensolver failed on the Laplacian");
  }
  SpectralData out;
  out.laplacian = laplacian;
  out.eigenvalues = eig.eigenvalues();
  out.eigenvectors = eig.eigenvectors();
  const double lambda_max =
      out.eigenvalues.size() > 0 ? out.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double clamp = 1e-12 * lambda_max;
  Eigen::VectorXd root = out.eigenvalues.unaryExpr(
      [clamp](double v) { return v <= clamp ? 0.0 : std::sqrt(v); });
  out.sqrt = out.eigenvectors * root.asDiagonal() * out.eigenvectors.transpose();
  out.sqrt = 0.5 * (out.sqrt + out.sqrt.transpose()).eval();
  return out;
}

SpectralData build_laplacian(const PowerNetwork& net) {
  return decompose_laplacian(laplacian_matrix(net));
}

std::size_t count_components(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::size_t components = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    ++components;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    seen[start] = true;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (std::size_t v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          frontier.push(v);
        }
      }
    }
  }
  return components;
}

bool is_connected(const PowerNetwork& net) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(net.edges.size());
  for (const Edge& e : net.edges) pairs.emplace_back(e.from, e.to);
  return count_components(net.size(), pairs) <= 1;
}

double zero_eigenvalue_tolerance(const Eigen::VectorXd& eigenvalues) {
  const double lambda_max = eigenvalues.size() > 0 ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  return 1e-9 * std::max(lambda_max, 1.0);
}

std::size_t count_zero_eigenvalues(const Eigen::VectorXd& eigenvalues) {
  const double tol = zero_eigenvalue_tolerance(eigenvalues);
  return static_cast<std::size_t>((eigenvalues.array().abs() <= tol).count());
}

}  // namespace gridh2
