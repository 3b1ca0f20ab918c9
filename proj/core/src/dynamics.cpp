#include "gridh2/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gridh2/error.hpp"

namespace gridh2 {

StateSpace assemble(const Eigen::VectorXd& inertia, const Eigen::VectorXd& damping,
                    const SpectralData& spec, double gamma) {
  const Eigen::Index n = inertia.size();
  StateSpace ss;
  ss.m_diag = inertia;
  ss.d_diag = damping;
  ss.laplacian = spec.laplacian;
  ss.laplacian_sqrt = spec.sqrt;
  ss.gamma = gamma;

  const Eigen::VectorXd m_inv = inertia.cwiseInverse();
  ss.a = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ss.a.topRightCorner(n, n).setIdentity();
  ss.a.bottomLeftCorner(n, n) = -(m_inv.asDiagonal() * spec.laplacian);
  ss.a.bottomRightCorner(n, n) = (-m_inv.cwiseProduct(damping)).asDiagonal();

  ss.r = Eigen::MatrixXd::Zero(2 * n, n);
  ss.r.bottomRows(n) = std::sqrt(gamma) * (m_inv.asDiagonal() * spec.sqrt);

  ss.c = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  ss.c.topLeftCorner(n, n) = spec.laplacian;
  ss.c.bottomRightCorner(n, n).setIdentity();
  return ss;
}

StateSpace assemble(const PowerNetwork& net, const SpectralData& spec) {
  return assemble(net.inertia(), net.damping(), spec, net.gamma);
}

Eigen::MatrixXd helmert_basis(Eigen::Index n) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index k = 1; k < n; ++k) {
    const double kd = static_cast<double>(k);
    const double scale = 1.0 / std::sqrt(kd * (kd + 1.0));
    u.col(k - 1).head(k).setConstant(scale);
    u(k, k - 1) = -kd * scale;
  }
  return u;
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::EigenSolver<Eigen::MatrixXd> eig(a, /*computeEigenvectors=*/false);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "eigenvalue computation failed");
  }
  return eig.eigenvalues().real().maxCoeff();
}

DeflatedSystem deflate(const StateSpace& ss, const Eigen::MatrixXd& u_basis) {
  const Eigen::Index n = ss.nodes();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> lap_eig(ss.laplacian,
                                                         Eigen::EigenvaluesOnly);
  const std::size_t zeros = count_zero_eigenvalues(lap_eig.eigenvalues());
  if (zeros > 1) {
    throw Error(ErrorCode::kDisconnectedNetwork,
                "network has " + std::to_string(zeros) +
                    " connected components; the H2 norm is undefined");
  }

  DeflatedSystem out;
  out.u_basis = u_basis;
  const Eigen::Index k = n - 1;
  const Eigen::VectorXd m_inv = ss.m_diag.cwiseInverse();

  out.a_r = Eigen::MatrixXd::Zero(k + n, k + n);
  out.a_r.topRightCorner(k, n) = u_basis.transpose();
  out.a_r.bottomLeftCorner(n, k) = -(m_inv.asDiagonal() * ss.laplacian * u_basis);
  out.a_r.bottomRightCorner(n, n) = (-m_inv.cwiseProduct(ss.d_diag)).asDiagonal();

  out.r_r = Eigen::MatrixXd::Zero(k + n, n);
  out.r_r.bottomRows(n) = ss.r.bottomRows(n);

  out.c_r = Eigen::MatrixXd::Zero(2 * n, k + n);
  out.c_r.topLeftCorner(n, k) = ss.laplacian * u_basis;
  out.c_r.bottomRightCorner(n, n).setIdentity();

  out.spectral_abscissa = spectral_abscissa(out.a_r);
  if (!(out.spectral_abscissa < -1e-9)) {
    std::ostringstream msg;
    msg << "deflated drift is not Hurwitz (spectral abscissa " << out.spectral_abscissa << ")";
    throw Error(ErrorCode::kNotHurwitz, msg.str());
  }
  return out;
}

DeflatedSystem deflate(const StateSpace& ss) {
  return deflate(ss, helmert_basis(ss.nodes()));
}

}  // namespace gridh2
