#pragma once

#include <Eigen/Core>

#include "gridh2/dynamics.hpp"
#include "gridh2/network.hpp"

namespace gridh2 {

/// Solves a P + P a^T = -q for Hurwitz `a` (Bartels-Stewart on the complex
/// Schur form of `a`). The result is symmetrized. Throws kNotHurwitz when
/// the spectral abscissa of `a` is non-negative and kNumericalFailure when
/// the Schur factorization breaks down.
Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// ||a P + P a^T + q||_F / max(1, ||q||_F).
double lyapunov_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& p,
                         const Eigen::MatrixXd& q);

struct GramianResult {
  Eigen::MatrixXd gramian;   // controllability Gramian of the deflated system
  double h2_squared = 0.0;   // trace(C_r P_r C_r^T)
  double residual = 0.0;     // relative Lyapunov residual
};

GramianResult h2_norm(const DeflatedSystem& sys);
GramianResult h2_norm(const PowerNetwork& net);

/// Squared H2 norm of the homogeneous network (uniform m, d) from the
/// Laplacian spectrum: gamma/(2d) * sum_{i>=2} (lambda_i^2 + lambda_i/m).
/// Exactly one (the first) eigenvalue is skipped; throws
/// kNonZeroFirstEigenvalue if it is not zero within tolerance.
double closed_form_h2(const Eigen::VectorXd& laplacian_eigenvalues, double m, double d,
                      double gamma);

struct H2Bounds {
  double lower = 0.0;  // homogeneous norm at (max m, max d)
  double upper = 0.0;  // homogeneous norm at (min m, min d)
  double m_max = 0.0;
  double m_min = 0.0;
  double d_max = 0.0;
  double d_min = 0.0;
  double gap_estimate = 0.0;
};

H2Bounds h2_bounds(const PowerNetwork& net);

/// Same bounds from explicit parameter vectors and a spectrum.
H2Bounds h2_bounds(const Eigen::VectorXd& laplacian_eigenvalues,
                   const Eigen::VectorXd& inertia, const Eigen::VectorXd& damping,
                   double gamma);

/// Per-mode centralities f_i = gamma/d * lambda_i (lambda_i + 1/m), i = 2..n,
/// in eigenvalue order. Half their sum is closed_form_h2(.., m, d, ..).
Eigen::VectorXd mode_centrality(const PowerNetwork& net, double m, double d);

struct SpectrumNorms {
  double inf = 0.0;
  double two = 0.0;
  double one = 0.0;
};

SpectrumNorms spectrum_norms(const Eigen::VectorXd& laplacian_eigenvalues);

}  // namespace gridh2
