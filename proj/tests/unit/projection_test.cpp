#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "gridh2/projection.hpp"
#include "gridh2/random.hpp"

namespace gridh2 {
namespace {

BoxHyperplane random_set(Rng& rng, Eigen::Index n, bool equality) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BoxHyperplane set;
  set.lower.resize(n);
  set.upper.resize(n);
  set.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    set.lower(i) = 0.1 + u(rng);
    set.upper(i) = set.lower(i) + 0.1 + 2.0 * u(rng);
    set.weights(i) = log_uniform(rng, 0.2, 5.0);
  }
  const double lo = set.weights.dot(set.lower);
  const double hi = set.weights.dot(set.upper);
  set.target = lo + (0.05 + 0.9 * u(rng)) * (hi - lo);
  set.equality = equality;
  return set;
}

Eigen::VectorXd random_point(Rng& rng, Eigen::Index n, double scale) {
  std::normal_distribution<double> z(0.0, scale);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = z(rng);
  return x;
}

TEST(Projection, FeasiblePointIsFixed) {
  Rng rng = make_rng(41, 0);
  const BoxHyperplane set = random_set(rng, 6, true);
  const Eigen::VectorXd x = sample_feasible(set, rng);
  EXPECT_LE(set.max_violation(x), 1e-10);
  EXPECT_LE((project(set, x) - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Projection, MatchesDykstra) {
  for (std::uint64_t i = 0; i < 40; ++i) {
    Rng rng = make_rng(42, i);
    const auto n = static_cast<Eigen::Index>(1 + i % 10);
    const BoxHyperplane set = random_set(rng, n, true);
    const Eigen::VectorXd x = random_point(rng, n, 3.0);
    const Eigen::VectorXd p = project(set, x);
    const DykstraResult d = dykstra_project(set, x);
    EXPECT_TRUE(d.converged);
    EXPECT_LE(set.max_violation(p), 1e-10);
    EXPECT_LE((p - d.point).cwiseAbs().maxCoeff(), 1e-7) << "instance " << i;
  }
}

TEST(Projection, VariationalInequality) {
  // p = P(x) iff (x - p)^T (y - p) <= 0 for every feasible y.
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = make_rng(43, i);
    const auto n = static_cast<Eigen::Index>(2 + i % 8);
    for (bool equality : {true, false}) {
      const BoxHyperplane set = random_set(rng, n, equality);
      const Eigen::VectorXd x = random_point(rng, n, 4.0);
      const Eigen::VectorXd p = project(set, x);
      EXPECT_LE(set.max_violation(p), 1e-10);
      for (int k = 0; k < 50; ++k) {
        const Eigen::VectorXd y = sample_feasible(set, rng);
        EXPECT_LE((x - p).dot(y - p), 1e-9 * std::max(1.0, (x - p).norm() * (y - p).norm()));
      }
    }
  }
}

TEST(Projection, InequalityKeepsInteriorClip) {
  BoxHyperplane set;
  set.lower = Eigen::Vector2d(0, 0);
  set.upper = Eigen::Vector2d(1, 1);
  set.weights = Eigen::Vector2d(1, 1);
  set.target = 1.5;
  set.equality = false;
  // Clipping already satisfies the budget: result is the clip.
  EXPECT_EQ(project(set, Eigen::Vector2d(0.2, 2.0)), Eigen::Vector2d(0.2, 1.0));
  // Otherwise the budget binds.
  const Eigen::VectorXd p = project(set, Eigen::Vector2d(2.0, 2.0));
  EXPECT_NEAR(p(0), 0.75, 1e-12);
  EXPECT_NEAR(p(1), 0.75, 1e-12);
}

TEST(Projection, SampleFeasibleStaysFeasible) {
  Rng rng = make_rng(44, 0);
  for (int k = 0; k < 100; ++k) {
    const BoxHyperplane set = random_set(rng, 5, k % 2 == 0);
    EXPECT_LE(set.max_violation(sample_feasible(set, rng)), 1e-10);
  }
}

TEST(Spg, ConvexQuadraticOnSimplexSlice) {
  // min ||x - c||^2 over the set: the answer is the projection of c.
  Rng rng = make_rng(45, 0);
  const BoxHyperplane set = random_set(rng, 6, true);
  const Eigen::VectorXd c = random_point(rng, 6, 2.0);
  const ObjectiveFn f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2.0 * (x - c);
    return (x - c).squaredNorm();
  };
  const ProjectionFn proj = [&](const Eigen::VectorXd& x) { return project(set, x); };
  const SpgResult r = spectral_projected_gradient(f, proj, sample_feasible(set, rng));
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.x - project(set, c)).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LE(r.projected_gradient_norm, 1e-8);
  ASSERT_FALSE(r.history.empty());
  EXPECT_LE(r.value, r.history.front());
}

TEST(Spg, IterationLimitReportsBestIterate) {
  BoxHyperplane set;
  set.lower = Eigen::VectorXd::Constant(3, -10);
  set.upper = Eigen::VectorXd::Constant(3, 10);
  set.weights = Eigen::VectorXd::Ones(3);
  set.target = 0.0;
  // Rosenbrock-like valley: not solved in two iterations.
  const ObjectiveFn f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double a = x(1) - x(0) * x(0);
    g.resize(3);
    g(0) = -400.0 * x(0) * a - 2.0 * (1.0 - x(0));
    g(1) = 200.0 * a;
    g(2) = 2.0 * x(2);
    return 100.0 * a * a + (1.0 - x(0)) * (1.0 - x(0)) + x(2) * x(2);
  };
  const ProjectionFn proj = [&](const Eigen::VectorXd& x) { return project(set, x); };
  SpgOptions opts;
  opts.max_iterations = 2;
  const SpgResult r = spectral_projected_gradient(f, proj, Eigen::Vector3d(-3, 1, 2), opts);
  EXPECT_FALSE(r.converged);
  EXPECT_LE(r.iterations, 2);
  EXPECT_LE(set.max_violation(r.x), 1e-10);
}

}  // namespace
}  // namespace gridh2
