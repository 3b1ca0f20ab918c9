#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gridh2 {

enum class NodeKind { kMachine, kConverter };

/// A generation unit (bus) of the Kron-reduced network. Voltage magnitudes
/// are fixed at 1 p.u. and do not appear in the model.
struct Node {
  std::string id;
  NodeKind kind = NodeKind::kMachine;
  double inertia = 1.0;     // m_i > 0
  double damping = 1.0;     // d_i > 0
  double angle_star = 0.0;  // steady-state angle (rad)
  std::optional<double> power_max;
};

/// Undirected, purely inductive line between two distinct nodes.
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double susceptance = 1.0;
};

struct PowerNetwork {
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  double gamma = 1.0;
  double nominal_frequency = 1.0;

  std::size_t size() const { return nodes.size(); }
  Eigen::VectorXd inertia() const;
  Eigen::VectorXd damping() const;
  Eigen::VectorXd angle_star() const;
  Eigen::VectorXd susceptances() const;
};

/// Throws Error(kInvalidInput) naming the first violated invariant: empty
/// node set, non-positive parameters, self-loops, dangling indices, or
/// parallel edges.
void validate(const PowerNetwork& net);

/// Laplacian with its symmetric eigendecomposition and principal square root.
struct SpectralData {
  Eigen::MatrixXd laplacian;
  Eigen::VectorXd eigenvalues;   // non-decreasing
  Eigen::MatrixXd eigenvectors;  // orthogonal, columns match eigenvalues
  Eigen::MatrixXd sqrt;          // L^{1/2}
};

/// Signed n x m incidence matrix. Column e carries +1 at the lower node index
/// and -1 at the higher one.
Eigen::MatrixXd build_incidence(const PowerNetwork& net);

/// Same orientation convention for a bare edge list over `n` nodes.
Eigen::MatrixXd build_incidence(std::size_t n,
                                const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// L = B diag(b) B^T assembled edge by edge, so row sums vanish exactly.
Eigen::MatrixXd laplacian_matrix(const PowerNetwork& net);

SpectralData build_laplacian(const PowerNetwork& net);

/// Spectral data for an arbitrary symmetric PSD matrix (used by the
/// optimizers, which build Laplacians from candidate susceptances).
SpectralData decompose_laplacian(const Eigen::MatrixXd& laplacian);

/// Breadth-first connectivity; a single node counts as connected.
bool is_connected(const PowerNetwork& net);

std::size_t count_components(std::size_t n,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Eigenvalues below this magnitude are treated as zero.
double zero_eigenvalue_tolerance(const Eigen::VectorXd& eigenvalues);

std::size_t count_zero_eigenvalues(const Eigen::VectorXd& eigenvalues);

}  // namespace gridh2
