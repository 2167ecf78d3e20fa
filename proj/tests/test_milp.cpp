#include <random>

#include <gtest/gtest.h>

#include "pcov/milp.hpp"
#include "support/programs.hpp"

using namespace pcov;

using fixtures::enumerate_binaries;
using fixtures::random_mixed;

TEST(SolveMilp, KnapsackExample) {
  // max 5a + 4b + 3c s.t. 2a + 3b + c <= 5: taking all three weighs 6, so a + b = 9.
  MixedIntegerProgram m;
  m.base.objective = {-5, -4, -3};
  m.base.lower = {0, 0, 0};
  m.base.upper = {1, 1, 1};
  m.base.ub_matrix = {{2, 3, 1}};
  m.base.ub_rhs = {5};
  m.binaries = {0, 1, 2};
  const auto s = solve_milp(m);
  ASSERT_EQ(s.status, MipStatus::optimal);
  EXPECT_NEAR(s.objective_value, -9.0, 1e-9);
}

TEST(SolveMilp, InfeasibleParity) {
  // x + y = 1.5 has no binary solution.
  MixedIntegerProgram m;
  m.base.objective = {1, 1};
  m.base.lower = {0, 0};
  m.base.upper = {1, 1};
  m.base.eq_matrix = {{1, 1}};
  m.base.eq_rhs = {1.5};
  m.binaries = {0, 1};
  EXPECT_EQ(solve_milp(m).status, MipStatus::infeasible);
}

TEST(SolveMilp, NoBinariesMatchesLp) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    MixedIntegerProgram m = random_mixed(rng, 0, 5, 4);
    const auto lp = solve_lp(m.base);
    const auto s = solve_milp(m);
    if (lp.status != LpStatus::optimal) {
      EXPECT_FALSE(s.has_solution());
      continue;
    }
    ASSERT_EQ(s.status, MipStatus::optimal);
    EXPECT_NEAR(s.objective_value, lp.objective_value, 1e-9);
    EXPECT_EQ(s.nodes_explored, 1u);
  }
}

TEST(SolveMilp, RejectsBadBinaryBounds) {
  MixedIntegerProgram m;
  m.base.objective = {1};
  m.base.lower = {0};
  m.base.upper = {2};
  m.binaries = {0};
  EXPECT_THROW(solve_milp(m), std::invalid_argument);
  m.binaries = {3};
  EXPECT_THROW(solve_milp(m), std::invalid_argument);
}

TEST(SolveMilp, MatchesEnumerationOnMixedPrograms) {
  std::mt19937 rng(77);
  std::uniform_int_distribution<int> nbin(1, 12);
  int feasible_count = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t nb = trial < 10 ? 12 : static_cast<std::size_t>(nbin(rng));
    MixedIntegerProgram m = random_mixed(rng, nb, 3, 5);
    bool feasible = false;
    const double oracle = enumerate_binaries(m, feasible);
    const auto s = solve_milp(m);
    if (!feasible) {
      EXPECT_EQ(s.status, MipStatus::infeasible) << "trial " << trial;
      continue;
    }
    ++feasible_count;
    ASSERT_EQ(s.status, MipStatus::optimal) << "trial " << trial;
    EXPECT_NEAR(s.objective_value, oracle, 1e-6) << "trial " << trial;
    for (std::size_t b : m.binaries) EXPECT_TRUE(s.values[b] == 0.0 || s.values[b] == 1.0);
    EXPECT_LE(max_violation(m.base, s.values), 1e-7);
  }
  EXPECT_GT(feasible_count, 20);
}

TEST(SolveMilp, PureBinaryBruteForce) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    MixedIntegerProgram m = random_mixed(rng, 8, 0, 4);
    double best = kInf;
    for (std::uint32_t mask = 0; mask < 256; ++mask) {
      std::vector<double> x(8);
      for (int k = 0; k < 8; ++k) x[k] = (mask >> k) & 1u;
      if (max_violation(m.base, x) > 1e-12) continue;
      double obj = 0.0;
      for (int k = 0; k < 8; ++k) obj += m.base.objective[k] * x[k];
      best = std::min(best, obj);
    }
    const auto s = solve_milp(m);
    if (best == kInf) {
      EXPECT_EQ(s.status, MipStatus::infeasible);
    } else {
      ASSERT_EQ(s.status, MipStatus::optimal);
      EXPECT_NEAR(s.objective_value, best, 1e-9);
    }
  }
}

TEST(SolveMilp, IncumbentsImproveMonotonically) {
  std::mt19937 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = solve_milp(random_mixed(rng, 12, 2, 6));
    for (std::size_t k = 1; k < s.incumbent_history.size(); ++k)
      EXPECT_LT(s.incumbent_history[k], s.incumbent_history[k - 1]);
    if (s.has_solution()) {
      EXPECT_DOUBLE_EQ(s.incumbent_history.back(), s.objective_value);
    }
  }
}

TEST(SolveMilp, NodeLimitReportsStatus) {
  std::mt19937 rng(4);
  MipOptions opt;
  opt.node_limit = 1;
  int seen = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = solve_milp(random_mixed(rng, 10, 0, 5), opt);
    EXPECT_LE(s.nodes_explored, 1u);
    if (s.status == MipStatus::node_limit || s.status == MipStatus::no_incumbent) ++seen;
  }
  EXPECT_GT(seen, 0);
}
