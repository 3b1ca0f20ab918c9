#include "gridh2/gramian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gridh2/error.hpp"

namespace gridh2 {

GramianResult h2_norm(const DeflatedSystem& sys) {
  const Eigen::MatrixXd q = sys.r_r * sys.r_r.transpose();
  GramianResult out;
  out.gramian = lyapunov_solve(sys.a_r, q);
  const double q_norm = q.norm();
  const double abs_res =
      (sys.a_r * out.gramian + out.gramian * sys.a_r.transpose() + q).norm();
  out.residual = q_norm > 0.0 ? abs_res / q_norm : abs_res;
  out.h2_squared = (sys.c_r * out.gramian * sys.c_r.transpose()).trace();
  if (out.h2_squared < 0.0) {
    // Only reachable through round-off when R_r is numerically zero.
    out.h2_squared = 0.0;
  }
  return out;
}

GramianResult h2_norm(const PowerNetwork& net) {
  validate(net);
  const SpectralData spec = build_laplacian(net);
  return h2_norm(deflate(assemble(net, spec)));
}

double closed_form_h2(const Eigen::VectorXd& laplacian_eigenvalues, double m, double d,
                      double gamma) {
  const Eigen::Index n = laplacian_eigenvalues.size();
  if (n == 0) return 0.0;
  const double tol = zero_eigenvalue_tolerance(laplacian_eigenvalues);
  if (std::abs(laplacian_eigenvalues(0)) > tol) {
    std::ostringstream msg;
    msg << "closed_form_h2: first eigenvalue " << laplacian_eigenvalues(0)
        << " is not zero (tolerance " << tol << ")";
    throw Error(ErrorCode::kNonZeroFirstEigenvalue, msg.str());
  }
  double sum = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double lambda = laplacian_eigenvalues(i);
    sum += lambda * lambda + lambda / m;
  }
  return gamma / (2.0 * d) * sum;
}

SpectrumNorms spectrum_norms(const Eigen::VectorXd& laplacian_eigenvalues) {
  SpectrumNorms out;
  if (laplacian_eigenvalues.size() == 0) return out;
  out.inf = laplacian_eigenvalues.cwiseAbs().maxCoeff();
  out.two = laplacian_eigenvalues.norm();
  out.one = laplacian_eigenvalues.cwiseAbs().sum();
  return out;
}

H2Bounds h2_bounds(const Eigen::VectorXd& laplacian_eigenvalues,
                   const Eigen::VectorXd& inertia, const Eigen::VectorXd& damping,
                   double gamma) {
  H2Bounds b;
  b.m_max = inertia.maxCoeff();
  b.m_min = inertia.minCoeff();
  b.d_max = damping.maxCoeff();
  b.d_min = damping.minCoeff();
  b.lower = closed_form_h2(laplacian_eigenvalues, b.m_max, b.d_max, gamma);
  b.upper = closed_form_h2(laplacian_eigenvalues, b.m_min, b.d_min, gamma);

  // Norms over the nonzero modes, the same sums the closed form runs over.
  const Eigen::VectorXd modes = laplacian_eigenvalues.tail(laplacian_eigenvalues.size() - 1);
  const double two_sq = modes.squaredNorm();
  const double one = modes.cwiseAbs().sum();
  const double delta_d = b.d_max - b.d_min;
  const double delta_md = b.d_max * b.m_max - b.m_min * b.d_min;
  b.gap_estimate = gamma / (2.0 * b.d_max * b.d_min) *
                   (delta_d * two_sq + delta_md * one / (b.m_min * b.m_max));
  return b;
}

H2Bounds h2_bounds(const PowerNetwork& net) {
  validate(net);
  if (!is_connected(net)) {
    throw Error(ErrorCode::kDisconnectedNetwork, "h2_bounds: network is disconnected");
  }
  const SpectralData spec = build_laplacian(net);
  return h2_bounds(spec.eigenvalues, net.inertia(), net.damping(), net.gamma);
}

Eigen::VectorXd mode_centrality(const PowerNetwork& net, double m, double d) {
  validate(net);
  if (!is_connected(net)) {
    throw Error(ErrorCode::kDisconnectedNetwork, "mode_centrality: network is disconnected");
  }
  const SpectralData spec = build_laplacian(net);
  const Eigen::Index n = spec.eigenvalues.size();
  Eigen::VectorXd f(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 1; i < n; ++i) {
    const double lambda = spec.eigenvalues(i);
    f(i - 1) = net.gamma / d * lambda * (lambda + 1.0 / m);
  }
  return f;
}

}  // namespace gridh2
