#include <algorithm>
#include <complex>

#include <Eigen/Dense>
#include <Eigen/QR>
#include <gtest/gtest.h>

#include "gridh2/dynamics.hpp"
#include "gridh2/error.hpp"
#include "gridh2/gramian.hpp"
#include "oracles.hpp"

namespace gridh2 {
namespace {

using testing::unit_network;

StateSpace assemble_net(const PowerNetwork& net) { return assemble(net, build_laplacian(net)); }

TEST(Assemble, TwoNodeDrift) {
  const StateSpace ss = assemble_net(unit_network(2, {{0, 1}}));
  Eigen::Matrix4d expected;
  expected << 0, 0, 1, 0, 0, 0, 0, 1, -1, 1, -1, 0, 1, -1, 0, -1;
  EXPECT_LE((ss.a - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(ss.r.rows(), 4);
  EXPECT_EQ(ss.r.cols(), 2);
  EXPECT_TRUE(ss.r.topRows(2).isZero(0.0));
  // C = blockdiag(L, I).
  EXPECT_EQ(ss.c.topLeftCorner(2, 2), ss.laplacian);
  EXPECT_EQ(ss.c.bottomRightCorner(2, 2), Eigen::Matrix2d::Identity());
}

TEST(Assemble, HeterogeneousLowerLeftBlock) {
  PowerNetwork net = unit_network(2, {{0, 1}});
  net.nodes[0].inertia = 2.0;
  net.nodes[1].inertia = 4.0;
  net.nodes[0].damping = 1.0;
  net.nodes[1].damping = 3.0;
  const StateSpace ss = assemble_net(net);
  Eigen::Matrix2d expected;
  expected << -0.5, 0.5, 0.25, -0.25;
  EXPECT_LE((ss.a.bottomLeftCorner(2, 2) - expected).cwiseAbs().maxCoeff(), 1e-15);
  Eigen::Matrix2d damping;
  damping << -0.5, 0, 0, -0.75;
  EXPECT_LE((ss.a.bottomRightCorner(2, 2) - damping).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Assemble, ZeroModeEigenvectors) {
  for (std::uint64_t i = 0; i < 40; ++i) {
    Rng rng = make_rng(21, i);
    const auto n = static_cast<Eigen::Index>(2 + i % 7);
    const PowerNetwork net = testing::random_network(rng, static_cast<std::size_t>(n), 0.1, 10.0);
    const StateSpace ss = assemble_net(net);
    Eigen::VectorXd k0 = Eigen::VectorXd::Zero(2 * n);
    k0.head(n).setOnes();
    EXPECT_LE((ss.a * k0).norm(), 1e-10);
    Eigen::VectorXd left(2 * n);
    left << ss.d_diag, ss.m_diag;
    EXPECT_LE((left.transpose() * ss.a).norm(), 1e-10 * std::max(1.0, ss.a.norm()));
    EXPECT_LE((left.transpose() * ss.r).norm(), 1e-8);
  }
}

TEST(Assemble, GammaScalesNoiseOnly) {
  Rng rng = make_rng(22, 0);
  PowerNetwork net = testing::random_network(rng, 5, 0.1, 10.0);
  const StateSpace base = assemble_net(net);
  net.gamma *= 3.0;
  const StateSpace scaled = assemble_net(net);
  EXPECT_EQ(base.a, scaled.a);
  EXPECT_EQ(base.c, scaled.c);
  EXPECT_LE((scaled.r - std::sqrt(3.0) * base.r).norm(), 1e-14 * scaled.r.norm());
}

TEST(Helmert, TwoNodes) {
  const Eigen::MatrixXd u = helmert_basis(2);
  ASSERT_EQ(u.rows(), 2);
  ASSERT_EQ(u.cols(), 1);
  EXPECT_NEAR(u(0, 0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(u(1, 0), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Helmert, OrthonormalComplementOfOnes) {
  for (Eigen::Index n = 2; n <= 12; ++n) {
    const Eigen::MatrixXd u = helmert_basis(n);
    EXPECT_LE((u.transpose() * u - Eigen::MatrixXd::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((u.transpose() * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-12);
    // Closed form of column k - 1.
    for (Eigen::Index k = 1; k < n; ++k) {
      const double s = std::sqrt(static_cast<double>(k * (k + 1)));
      for (Eigen::Index i = 0; i < n; ++i) {
        const double want = i < k ? 1.0 / s : (i == k ? -static_cast<double>(k) / s : 0.0);
        EXPECT_NEAR(u(i, k - 1), want, 1e-15);
      }
    }
  }
}

TEST(Deflate, TwoNodeShapes) {
  const DeflatedSystem sys = deflate(assemble_net(unit_network(2, {{0, 1}})));
  EXPECT_EQ(sys.a_r.rows(), 3);
  EXPECT_EQ(sys.a_r.cols(), 3);
  EXPECT_EQ(sys.r_r.rows(), 3);
  EXPECT_EQ(sys.r_r.cols(), 2);
  EXPECT_EQ(sys.c_r.rows(), 4);
  EXPECT_EQ(sys.c_r.cols(), 3);
  EXPECT_LT(sys.spectral_abscissa, 0.0);
}

TEST(Deflate, TriangleEigenvalues) {
  // Modes s^2 + s + 3 = 0 (twice) plus the frequency mode s = -1.
  const DeflatedSystem sys = deflate(assemble_net(unit_network(3, {{0, 1}, {1, 2}, {0, 2}})));
  Eigen::EigenSolver<Eigen::MatrixXd> eig(sys.a_r);
  ASSERT_EQ(eig.info(), Eigen::Success);
  int oscillatory = 0;
  int real = 0;
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    const std::complex<double> s = eig.eigenvalues()(k);
    EXPECT_LT(s.real(), 0.0);
    if (std::abs(s.imag()) > 1e-6) {
      EXPECT_NEAR(std::abs(s * s + s + 3.0), 0.0, 1e-8);
      ++oscillatory;
    } else {
      EXPECT_NEAR(s.real(), -1.0, 1e-8);
      ++real;
    }
  }
  EXPECT_EQ(oscillatory, 4);
  EXPECT_EQ(real, 1);
}

TEST(Deflate, DisconnectedRejected) {
  try {
    deflate(assemble_net(unit_network(4, {{0, 1}, {2, 3}})));
    FAIL() << "expected DisconnectedNetwork";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDisconnectedNetwork);
  }
}

TEST(Deflate, RemovesExactlyTheZeroEigenvalue) {
  for (std::uint64_t i = 0; i < 40; ++i) {
    Rng rng = make_rng(23, i);
    const auto n = static_cast<Eigen::Index>(2 + i % 7);
    const StateSpace ss =
        assemble_net(testing::random_network(rng, static_cast<std::size_t>(n), 0.1, 10.0));
    const DeflatedSystem sys = deflate(ss);
    Eigen::EigenSolver<Eigen::MatrixXd> full(ss.a, false);
    Eigen::EigenSolver<Eigen::MatrixXd> reduced(sys.a_r, false);
    std::vector<std::complex<double>> want;
    std::vector<std::complex<double>> got;
    // Drop the eigenvalue of smallest magnitude from the full system.
    Eigen::Index drop = 0;
    for (Eigen::Index k = 0; k < full.eigenvalues().size(); ++k) {
      if (std::abs(full.eigenvalues()(k)) < std::abs(full.eigenvalues()(drop))) drop = k;
    }
    EXPECT_LE(std::abs(full.eigenvalues()(drop)), 1e-8);
    for (Eigen::Index k = 0; k < full.eigenvalues().size(); ++k) {
      if (k != drop) want.push_back(full.eigenvalues()(k));
    }
    for (Eigen::Index k = 0; k < reduced.eigenvalues().size(); ++k) got.push_back(reduced.eigenvalues()(k));
    ASSERT_EQ(want.size(), got.size());
    // Greedy multiset matching.
    std::vector<bool> taken(got.size(), false);
    for (const auto& w : want) {
      std::size_t best = got.size();
      double dist = 1e300;
      for (std::size_t j = 0; j < got.size(); ++j) {
        if (!taken[j] && std::abs(got[j] - w) < dist) {
          dist = std::abs(got[j] - w);
          best = j;
        }
      }
      ASSERT_LT(best, got.size());
      taken[best] = true;
      EXPECT_LE(dist, 1e-7 * std::max(1.0, std::abs(w))) << "instance " << i;
    }
    EXPECT_LT(sys.spectral_abscissa, 0.0);
  }
}

TEST(Deflate, OutputReconstruction) {
  Rng rng = make_rng(24, 0);
  const Eigen::Index n = 6;
  const StateSpace ss = assemble_net(testing::random_network(rng, 6, 0.1, 10.0));
  const DeflatedSystem sys = deflate(ss);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd reduced(2 * n - 1);
    for (Eigen::Index k = 0; k < reduced.size(); ++k) reduced(k) = z(rng);
    Eigen::VectorXd full(2 * n);
    full << sys.u_basis * reduced.head(n - 1), reduced.tail(n);
    EXPECT_LE((sys.c_r * reduced - ss.c * full).norm(), 1e-12 * (ss.c * full).norm());
  }
}

TEST(Deflate, NormIndependentOfBasis) {
  for (std::uint64_t i = 0; i < 10; ++i) {
    Rng rng = make_rng(25, i);
    const auto n = static_cast<Eigen::Index>(3 + i % 5);
    const StateSpace ss =
        assemble_net(testing::random_network(rng, static_cast<std::size_t>(n), 0.1, 10.0));
    // Random orthonormal basis of 1-perp: rotate the Helmert basis.
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd g(n - 1, n - 1);
    for (Eigen::Index r = 0; r < g.size(); ++r) g.data()[r] = z(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    const Eigen::MatrixXd u = helmert_basis(n) * q;
    const double a = h2_norm(deflate(ss)).h2_squared;
    const double b = h2_norm(deflate(ss, u)).h2_squared;
    EXPECT_LE(testing::relative_error(a, b), 1e-8);
  }
}

}  // namespace
}  // namespace gridh2
