#pragma once

#include <Eigen/Core>

#include "gridh2/network.hpp"

namespace gridh2 {

/// Linearized swing dynamics driven by spatially correlated noise:
///
///   d[theta; omega] = A [theta; omega] dt + R dW,   y = C [theta; omega]
///
/// with A = [[0, I], [-M^-1 L, -M^-1 D]], R = [0; M^-1 sqrt(gamma) L^{1/2}] and
/// C = blockdiag(L, I). A has a single zero eigenvalue (the common angle shift)
/// that the noise cannot excite.
struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::MatrixXd r;
  Eigen::MatrixXd c;
  Eigen::VectorXd m_diag;
  Eigen::VectorXd d_diag;
  Eigen::MatrixXd laplacian;
  Eigen::MatrixXd laplacian_sqrt;
  double gamma = 1.0;

  Eigen::Index nodes() const { return m_diag.size(); }
};

/// Realization with the common-angle mode removed. Angles are kept as
/// theta_tilde = U^T theta while frequencies stay full, so the state has
/// dimension 2n - 1 and C_r x_tilde reproduces C x exactly.
struct DeflatedSystem {
  Eigen::MatrixXd u_basis;  // n x (n-1), orthonormal, orthogonal to ones
  Eigen::MatrixXd a_r;
  Eigen::MatrixXd r_r;
  Eigen::MatrixXd c_r;
  double spectral_abscissa = 0.0;
};

StateSpace assemble(const PowerNetwork& net, const SpectralData& spec);

/// Same as above but with explicit parameters; the optimizers use this to
/// evaluate candidate (m, d) without rebuilding a PowerNetwork.
StateSpace assemble(const Eigen::VectorXd& inertia, const Eigen::VectorXd& damping,
                    const SpectralData& spec, double gamma);

/// Deterministic Helmert basis of the complement of the all-ones vector.
/// Column k-1 (k = 1..n-1) has 1/sqrt(k(k+1)) in rows 0..k-1 and
/// -k/sqrt(k(k+1)) in row k.
Eigen::MatrixXd helmert_basis(Eigen::Index n);

/// Throws kDisconnectedNetwork if L has more than one zero eigenvalue and
/// kNotHurwitz if the reduced drift has spectral abscissa >= -1e-9.
DeflatedSystem deflate(const StateSpace& ss);

/// Deflation against a caller-supplied orthonormal basis of 1-perp.
DeflatedSystem deflate(const StateSpace& ss, const Eigen::MatrixXd& u_basis);

double spectral_abscissa(const Eigen::MatrixXd& a);

}  // namespace gridh2
