#include <algorithm>
#include <numeric>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "gridh2/error.hpp"
#include "gridh2/network.hpp"
#include "oracles.hpp"

namespace gridh2 {
namespace {

using testing::unit_network;

TEST(Incidence, SingleEdgeColumn) {
  const Eigen::MatrixXd b = build_incidence(unit_network(2, {{0, 1}}));
  ASSERT_EQ(b.rows(), 2);
  ASSERT_EQ(b.cols(), 1);
  EXPECT_EQ(b(0, 0), 1.0);
  EXPECT_EQ(b(1, 0), -1.0);
}

TEST(Incidence, OrientationFollowsIndexOrder) {
  // Edge listed as (1, 0) still puts +1 on node 0.
  PowerNetwork net = unit_network(2, {});
  net.edges.push_back({1, 0, 1.0});
  const Eigen::MatrixXd b = build_incidence(net);
  EXPECT_EQ(b(0, 0), 1.0);
  EXPECT_EQ(b(1, 0), -1.0);
}

TEST(Incidence, TriangleColumnsSumToZero) {
  const Eigen::MatrixXd b = build_incidence(unit_network(3, {{0, 1}, {1, 2}, {0, 2}}));
  ASSERT_EQ(b.cols(), 3);
  EXPECT_TRUE(b.colwise().sum().isZero(0.0));
  EXPECT_EQ(b.cwiseAbs().sum(), 6.0);
}

TEST(Incidence, PathMatrix) {
  Eigen::MatrixXd expected(3, 2);
  expected << 1, 0, -1, 1, 0, -1;
  EXPECT_EQ(build_incidence(unit_network(3, {{0, 1}, {1, 2}})), expected);
}

TEST(Laplacian, TwoNodes) {
  PowerNetwork net = unit_network(2, {{0, 1}});
  net.edges[0].susceptance = 2.0;
  const SpectralData s = build_laplacian(net);
  Eigen::Matrix2d expected;
  expected << 2, -2, -2, 2;
  EXPECT_EQ(s.laplacian, expected);
  EXPECT_NEAR(s.eigenvalues(0), 0.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues(1), 4.0, 1e-14);
}

TEST(Laplacian, TriangleSpectrum) {
  const SpectralData s = build_laplacian(unit_network(3, {{0, 1}, {1, 2}, {0, 2}}));
  Eigen::Matrix3d expected;
  expected << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  EXPECT_EQ(s.laplacian, expected);
  EXPECT_NEAR(s.eigenvalues(0), 0.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues(1), 3.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues(2), 3.0, 1e-14);
}

TEST(Laplacian, PathSpectrumMatchesCharacteristicPolynomial) {
  // det(L - sI) = -s (s - 1)(s - 3) for the unit path on three nodes.
  const SpectralData s = build_laplacian(unit_network(3, {{0, 1}, {1, 2}}));
  EXPECT_NEAR(s.eigenvalues(0), 0.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues(1), 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues(2), 3.0, 1e-14);
}

TEST(Laplacian, ZeroEigenvaluesCountComponents) {
  const PowerNetwork net = unit_network(5, {{0, 1}, {2, 3}});
  const SpectralData s = build_laplacian(net);
  EXPECT_EQ(count_zero_eigenvalues(s.eigenvalues), 3u);
  EXPECT_EQ(count_components(5, {{0, 1}, {2, 3}}), 3u);
}

TEST(Laplacian, RandomNetworkInvariants) {
  for (std::uint64_t i = 0; i < 60; ++i) {
    Rng rng = make_rng(11, i);
    const std::size_t n = 2 + i % 9;
    const PowerNetwork net = testing::random_network(rng, n, 0.1, 10.0);
    const SpectralData s = build_laplacian(net);
    const double lmax = s.eigenvalues.maxCoeff();
    // Row sums vanish.
    EXPECT_LE(s.laplacian.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, lmax));
    // Reconstruction and square root.
    const Eigen::MatrixXd rec = s.eigenvectors * s.eigenvalues.asDiagonal() * s.eigenvectors.transpose();
    EXPECT_LE((rec - s.laplacian).norm(), 1e-10 * s.laplacian.norm());
    EXPECT_LE((s.sqrt * s.sqrt - s.laplacian).norm(), 1e-8 * s.laplacian.norm());
    EXPECT_LE((s.eigenvectors.transpose() * s.eigenvectors -
               Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)))
                  .norm(),
              1e-10);
    // Positive semidefinite, sorted, trace identity.
    EXPECT_GE(s.eigenvalues(0), -1e-10 * lmax);
    EXPECT_TRUE(std::is_sorted(s.eigenvalues.data(), s.eigenvalues.data() + n));
    EXPECT_NEAR(s.laplacian.trace(), 2.0 * net.susceptances().sum(), 1e-12 * s.laplacian.trace());
    // Connected: exactly one zero eigenvalue.
    EXPECT_EQ(count_zero_eigenvalues(s.eigenvalues), 1u);
    EXPECT_GT(s.eigenvalues(1), 0.0);
  }
}

TEST(Laplacian, ComponentCountMatchesZeroEigenvaluesOnRandomForests) {
  for (std::uint64_t i = 0; i < 60; ++i) {
    Rng rng = make_rng(12, i);
    const std::size_t n = 2 + i % 8;
    PowerNetwork net = unit_network(n, {});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (u(rng) < 0.25) net.edges.push_back({a, b, log_uniform(rng, 0.1, 10.0)});
      }
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const Edge& e : net.edges) pairs.emplace_back(e.from, e.to);
    const SpectralData s = build_laplacian(net);
    EXPECT_EQ(count_zero_eigenvalues(s.eigenvalues), count_components(n, pairs)) << "instance " << i;
    EXPECT_EQ(is_connected(net), count_components(n, pairs) == 1);
  }
}

TEST(Laplacian, PermutationInvariance) {
  Rng rng = make_rng(13, 0);
  const PowerNetwork net = testing::random_network(rng, 7, 0.1, 10.0);
  std::vector<std::size_t> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  PowerNetwork shuffled = net;
  for (std::size_t i = 0; i < 7; ++i) shuffled.nodes[perm[i]] = net.nodes[i];
  for (Edge& e : shuffled.edges) {
    e.from = perm[e.from];
    e.to = perm[e.to];
  }
  const SpectralData a = build_laplacian(net);
  const SpectralData b = build_laplacian(shuffled);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 7; ++j) {
      EXPECT_DOUBLE_EQ(a.laplacian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                       b.laplacian(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])));
    }
  }
  EXPECT_LE((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff(), 1e-10 * a.eigenvalues.maxCoeff());
}

TEST(Laplacian, SqrtClampsRoundOff) {
  const SpectralData s = build_laplacian(unit_network(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}));
  EXPECT_TRUE(s.sqrt.allFinite());
  EXPECT_LE((s.sqrt - s.sqrt.transpose()).norm(), 1e-14);
}

TEST(Connectivity, Examples) {
  EXPECT_TRUE(is_connected(unit_network(3, {{0, 1}, {1, 2}, {0, 2}})));
  EXPECT_FALSE(is_connected(unit_network(4, {{0, 1}, {2, 3}})));
  EXPECT_TRUE(is_connected(unit_network(1, {})));
}

TEST(Validate, RejectsBrokenNetworks) {
  auto code_of = [](const PowerNetwork& net) {
    try {
      validate(net);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kNumericalFailure;  // sentinel: nothing thrown
  };
  EXPECT_EQ(code_of(PowerNetwork{}), ErrorCode::kInvalidInput);
  PowerNetwork loop = unit_network(2, {});
  loop.edges.push_back({1, 1, 1.0});
  EXPECT_EQ(code_of(loop), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of(unit_network(2, {{0, 1}, {1, 0}})), ErrorCode::kInvalidInput);
  EXPECT_EQ(code_of(unit_network(2, {{0, 2}})), ErrorCode::kInvalidInput);
  PowerNetwork bad = unit_network(2, {{0, 1}});
  bad.nodes[0].inertia = 0.0;
  EXPECT_EQ(code_of(bad), ErrorCode::kInvalidInput);
  bad = unit_network(2, {{0, 1}});
  bad.nodes[1].damping = -1.0;
  EXPECT_EQ(code_of(bad), ErrorCode::kInvalidInput);
  bad = unit_network(2, {{0, 1}});
  bad.edges[0].susceptance = 0.0;
  EXPECT_EQ(code_of(bad), ErrorCode::kInvalidInput);
  bad = unit_network(2, {{0, 1}});
  bad.gamma = 0.0;
  EXPECT_EQ(code_of(bad), ErrorCode::kInvalidInput);
  EXPECT_NO_THROW(validate(unit_network(3, {{0, 1}, {1, 2}})));
}

}  // namespace
}  // namespace gridh2
