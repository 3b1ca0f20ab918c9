#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "gridh2/error.hpp"
#include "gridh2/optimize.hpp"

namespace gridh2 {

std::string_view to_string(SearchStrategy s) {
  return s == SearchStrategy::kGreedy ? "greedy" : "exhaustive";
}

SearchStrategy parse_strategy(std::string_view name) {
  if (name == "exhaustive") return SearchStrategy::kExhaustive;
  if (name == "greedy") return SearchStrategy::kGreedy;
  throw Error(ErrorCode::kInvalidInput, "unknown strategy '" + std::string(name) + "'");
}

ObjectiveValue spectral_objective(const Eigen::VectorXd& susceptances,
                                  const Eigen::MatrixXd& incidence, double m_min, double d_min,
                                  double gamma) {
  if (susceptances.size() != incidence.cols()) {
    throw Error(ErrorCode::kInvalidInput, "spectral_objective: dimension mismatch");
  }
  // trace(L^2) = sum_{e,f} b_e b_f (a_e^T a_f)^2 and trace(L) = sum_e b_e |a_e|^2.
  const Eigen::MatrixXd cross = incidence.transpose() * incidence;
  const Eigen::MatrixXd coupling = cross.cwiseAbs2();
  const Eigen::VectorXd coupled = coupling * susceptances;
  const double scale = gamma / (2.0 * d_min);
  ObjectiveValue out;
  out.value = scale * (susceptances.dot(coupled) + cross.diagonal().dot(susceptances) / m_min);
  out.gradient = scale * (2.0 * coupled + cross.diagonal() / m_min);
  return out;
}

double minmax_objective(double lambda_max, std::size_t n, double m_min, double d_min,
                        double gamma) {
  return static_cast<double>(n) * gamma / (2.0 * d_min) *
         (lambda_max * lambda_max + lambda_max / m_min);
}

ObjectiveValue lambda_max_subgradient(const Eigen::VectorXd& susceptances,
                                      const Eigen::MatrixXd& incidence) {
  const Eigen::MatrixXd lap = incidence * susceptances.asDiagonal() * incidence.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericalFailure, "lambda_max_subgradient: eigensolver failed");
  }
  const Eigen::Index n = lap.rows();
  const double top = eig.eigenvalues()(n - 1);
  const double tol = 1e-8 * std::max(1.0, std::abs(top));
  ObjectiveValue out;
  out.value = top;
  out.gradient = Eigen::VectorXd::Zero(incidence.cols());
  int count = 0;
  for (Eigen::Index k = n - 1; k >= 0 && top - eig.eigenvalues()(k) <= tol; --k) {
    const Eigen::VectorXd proj = incidence.transpose() * eig.eigenvectors().col(k);
    out.gradient += proj.cwiseAbs2();
    ++count;
  }
  out.gradient /= static_cast<double>(count);
  return out;
}

}  // namespace gridh2
