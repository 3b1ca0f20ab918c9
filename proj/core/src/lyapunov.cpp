#include <complex>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "gridh2/error.hpp"
#include "gridh2/gramian.hpp"

namespace gridh2 {

Eigen::MatrixXd lyapunov_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols()) {
    throw Error(ErrorCode::kInvalidInput, "lyapunov_solve: dimension mismatch");
  }
  const Eigen::Index n = a.rows();
  if (n == 0) return Eigen::MatrixXd(0, 0);

  using Complex = std::complex<double>;
  Eigen::ComplexSchur<Eigen::MatrixXd> schur(a);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "lyapunov_solve: Schur factorization failed");
  }
  const Eigen::MatrixXcd& t = schur.matrixT();
  const Eigen::MatrixXcd& u = schur.matrixU();

  const double abscissa = t.diagonal().real().maxCoeff();
  if (!(abscissa < 0.0)) {
    std::ostringstream msg;
    msg << "lyapunov_solve: matrix is not Hurwitz (spectral abscissa " << abscissa << ")";
    throw Error(ErrorCode::kNotHurwitz, msg.str());
  }

  // With a = U T U^*, the transformed unknown X = U^* P U satisfies
  // T X + X T^* = F, F = -U^* q U. T^* is lower triangular, so column j of X
  // depends only on columns k > j: back-substitute from the last column.
  const Eigen::MatrixXcd f = -(u.adjoint() * q.cast<Complex>() * u);
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd shifted = t;
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = f.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) {
      rhs -= std::conj(t(j, k)) * x.col(k);
    }
    const Complex shift = std::conj(t(j, j));
    shifted.diagonal() = t.diagonal().array() + shift;
    x.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }

  Eigen::MatrixXd p = (u * x * u.adjoint()).real();
  return 0.5 * (p + p.transpose());
}

double lyapunov_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& p,
                         const Eigen::MatrixXd& q) {
  const double res = (a * p + p * a.transpose() + q).norm();
  return res / std::max(1.0, q.norm());
}

}  // namespace gridh2
