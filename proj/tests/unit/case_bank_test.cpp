#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "gridh2/case_bank.hpp"
#include "gridh2/error.hpp"
#include "gridh2/gramian.hpp"
#include "gridh2/optimize.hpp"

namespace gridh2 {
namespace {

TEST(CaseBank, EveryCaseIsValidAndConnected) {
  std::set<std::string> names;
  for (const CaseBankEntry& c : case_bank()) {
    SCOPED_TRACE(c.name);
    EXPECT_TRUE(names.insert(c.name).second);
    EXPECT_NO_THROW(validate(c.network));
    EXPECT_TRUE(is_connected(c.network));
    EXPECT_NO_THROW(validate(c.initial_condition, static_cast<Eigen::Index>(c.network.size())));
    EXPECT_FALSE(c.description.empty());
    EXPECT_GT(h2_norm(c.network).h2_squared, 0.0);
    // Steady state balances: L theta* sums to zero.
    EXPECT_NEAR((laplacian_matrix(c.network) * c.network.angle_star()).sum(), 0.0, 1e-10);
    std::set<std::size_t> covered;
    for (const auto& area : c.areas) covered.insert(area.begin(), area.end());
    if (!c.areas.empty()) EXPECT_EQ(covered.size(), c.network.size());
  }
  EXPECT_EQ(&find_case("triangle"), &find_case("triangle"));
}

TEST(CaseBank, UnknownNameIsInvalidInput) {
  try {
    find_case("no-such-case");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(CaseBank, PresetsAreSolvableAndFeasible) {
  for (const CaseBankEntry& c : case_bank()) {
    SCOPED_TRACE(c.name);
    const ScenarioPresets& p = c.presets;
    if (p.susceptance) EXPECT_LE(feasibility_violation(*p.susceptance, solve_susceptance(*p.susceptance)), 1e-6);
    if (p.assignment) EXPECT_LE(feasibility_violation(*p.assignment, solve_assignment(*p.assignment)), 1e-9);
    if (p.minmax) EXPECT_LE(feasibility_violation(*p.minmax, solve_minmax(*p.minmax)), 1e-6);
    if (p.allocation) {
      EXPECT_NO_THROW(derive_allocation(*p.allocation, c.network));
      EXPECT_LE(feasibility_violation(*p.allocation, c.network, solve_allocation(*p.allocation, c.network)), 1e-6);
    }
  }
}

TEST(CaseBank, KundurLikeLayout) {
  const CaseBankEntry& c = find_case("kundur-like");
  const PowerNetwork& net = c.network;
  ASSERT_EQ(net.size(), 4u);
  EXPECT_EQ(net.nodes[0].id, "G1");
  EXPECT_EQ(net.nodes[1].id, "C2");
  EXPECT_EQ(net.nodes[2].id, "G3");
  EXPECT_EQ(net.nodes[3].id, "C4");
  EXPECT_EQ(net.nodes[0].kind, NodeKind::kMachine);
  EXPECT_EQ(net.nodes[1].kind, NodeKind::kConverter);
  EXPECT_EQ(net.nodes[2].kind, NodeKind::kMachine);
  EXPECT_EQ(net.nodes[3].kind, NodeKind::kConverter);
  EXPECT_DOUBLE_EQ(net.gamma, 0.05);
  EXPECT_DOUBLE_EQ(net.nodes[0].inertia, 31.0);
  EXPECT_DOUBLE_EQ(net.nodes[2].inertia, 29.5);
  // Machine dampings follow the common sharing ratio.
  const AllocationProblem& a = *c.presets.allocation;
  const AllocationDerived d = derive_allocation(a, net);
  EXPECT_NEAR(d.p_bar, 1.576689, 1e-12);
  EXPECT_NEAR(net.nodes[0].damping + net.nodes[2].damping, 40.0, 1e-9);
  EXPECT_EQ(a.converters, (std::vector<std::size_t>{1, 3}));
  EXPECT_DOUBLE_EQ(a.inertia_budget, 120.0);

  const InitialCondition& ic = c.initial_condition;
  ASSERT_EQ(ic.mean.size(), 8);
  EXPECT_DOUBLE_EQ(ic.mean(1), 93.077);
  EXPECT_DOUBLE_EQ(ic.mean(3), 69.3918);
  EXPECT_DOUBLE_EQ(ic.mean(5), 56.5361);
  EXPECT_DOUBLE_EQ(ic.mean(7), 45.6552);
  EXPECT_NEAR(ic.cov_factor(1, 1) * ic.cov_factor(1, 1), 0.07, 1e-15);
  EXPECT_NEAR(ic.cov_factor(7, 7) * ic.cov_factor(7, 7), 0.01, 1e-15);
}

TEST(CaseBank, SmallCaseValues) {
  EXPECT_NEAR(h2_norm(find_case("two-node").network).h2_squared, 3.0, 1e-12);
  EXPECT_NEAR(h2_norm(find_case("triangle").network).h2_squared, 12.0, 1e-12);
}

}  // namespace
}  // namespace gridh2
