#include <random>

#include <gtest/gtest.h>

#include "pcov/lp.hpp"

using namespace pcov;

namespace {

LinearProgram random_feasible(std::mt19937& rng, std::size_t n, std::size_t m_ub, std::size_t m_eq, bool boxed) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LinearProgram p;
  std::vector<double> x0(n);
  for (std::size_t j = 0; j < n; ++j) {
    p.objective.push_back(coef(rng));
    p.lower.push_back(boxed ? -3.0 : 0.0);
    p.upper.push_back(boxed ? 4.0 : kInf);
    x0[j] = boxed ? -3.0 + 7.0 * unit(rng) : 3.0 * unit(rng);
  }
  auto row_at = [&](std::vector<double>& row) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row.push_back(coef(rng));
      acc += row.back() * x0[j];
    }
    return acc;
  };
  for (std::size_t r = 0; r < m_ub; ++r) {
    std::vector<double> row;
    const double v = row_at(row);
    p.ub_matrix.push_back(row);
    p.ub_rhs.push_back(v + 2.0 * unit(rng));
  }
  for (std::size_t r = 0; r < m_eq; ++r) {
    std::vector<double> row;
    p.eq_rhs.push_back(row_at(row));
    p.eq_matrix.push_back(row);
  }
  if (!boxed) {
    // Keep the region bounded: sum x <= 20.
    p.ub_matrix.push_back(std::vector<double>(n, 1.0));
    p.ub_rhs.push_back(20.0);
  }
  return p;
}

// Gaussian elimination with partial pivoting; false when singular.
bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-10) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.resize(n);
  for (std::size_t r = 0; r < n; ++r) x[r] = b[r] / a[r][r];
  return true;
}

// Vertex enumeration oracle for bounded programs: every choice of n active
// constraints (equalities always active) is solved and checked.
double vertex_enumeration(const LinearProgram& p, bool& feasible) {
  const std::size_t n = p.num_vars();
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  for (std::size_t r = 0; r < p.ub_matrix.size(); ++r) rows.push_back(p.ub_matrix[r]), rhs.push_back(p.ub_rhs[r]);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    if (std::isfinite(p.upper[j])) rows.push_back(e), rhs.push_back(p.upper[j]);
    e[j] = -1.0;
    if (std::isfinite(p.lower[j])) rows.push_back(e), rhs.push_back(-p.lower[j]);
  }
  const std::size_t need = n - p.eq_matrix.size();
  double best = INFINITY;
  feasible = false;
  std::vector<int> pick(rows.size(), 0);
  std::fill(pick.end() - static_cast<std::ptrdiff_t>(need), pick.end(), 1);
  do {
    std::vector<std::vector<double>> a = p.eq_matrix;
    std::vector<double> b = p.eq_rhs;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (pick[r]) a.push_back(rows[r]), b.push_back(rhs[r]);
    std::vector<double> x;
    if (!solve_square(a, b, x)) continue;
    if (max_violation(p, x) > 1e-9) continue;
    feasible = true;
    double obj = 0.0;
    for (std::size_t j = 0; j < n; ++j) obj += p.objective[j] * x[j];
    best = std::min(best, obj);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

// KKT certificate: primal feasibility, dual sign, complementary slackness and
// reduced-cost consistency with the bounds.
void expect_kkt(const LinearProgram& p, const LpSolution& s, double tol) {
  const std::size_t n = p.num_vars();
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_LE(max_violation(p, s.values), 1e-7);
  std::vector<double> rc = p.objective;
  for (std::size_t r = 0; r < p.eq_matrix.size(); ++r)
    for (std::size_t j = 0; j < n; ++j) rc[j] -= s.eq_duals[r] * p.eq_matrix[r][j];
  for (std::size_t r = 0; r < p.ub_matrix.size(); ++r) {
    EXPECT_LE(s.ub_duals[r], tol);
    double act = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      rc[j] -= s.ub_duals[r] * p.ub_matrix[r][j];
      act += p.ub_matrix[r][j] * s.values[j];
    }
    EXPECT_NEAR(s.ub_duals[r] * (p.ub_rhs[r] - act), 0.0, tol);
  }
  for (std::size_t j = 0; j < n; ++j) {
    const bool at_lo = std::isfinite(p.lower[j]) && std::abs(s.values[j] - p.lower[j]) < 1e-9;
    const bool at_hi = std::isfinite(p.upper[j]) && std::abs(s.values[j] - p.upper[j]) < 1e-9;
    if (!at_lo) {
      EXPECT_LE(rc[j], tol) << "var " << j;
    }
    if (!at_hi) {
      EXPECT_GE(rc[j], -tol) << "var " << j;
    }
  }
}

}  // namespace

TEST(SolveLp, SimpleBound) {
  LinearProgram p;
  p.objective = {-1.0};
  p.lower = {0.0};
  p.upper = {kInf};
  p.ub_matrix = {{1.0}};
  p.ub_rhs = {1.0};
  const auto s = solve_lp(p);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.values[0], 1.0, 1e-12);
  EXPECT_NEAR(s.objective_value, -1.0, 1e-12);
}

TEST(SolveLp, Infeasible) {
  LinearProgram p;
  p.objective = {1.0};
  p.lower = {-kInf};
  p.upper = {kInf};
  p.ub_matrix = {{-1.0}, {1.0}};
  p.ub_rhs = {-2.0, 1.0};
  EXPECT_EQ(solve_lp(p).status, LpStatus::infeasible);
}

TEST(SolveLp, Unbounded) {
  LinearProgram p;
  p.objective = {-1.0, 0.0};
  p.lower = {0.0, -kInf};
  p.upper = {kInf, kInf};
  p.ub_matrix = {{1.0, -1.0}};
  p.ub_rhs = {1.0};
  EXPECT_EQ(solve_lp(p).status, LpStatus::unbounded);
}

TEST(SolveLp, DimensionMismatchThrows) {
  LinearProgram p;
  p.objective = {1.0, 2.0};
  p.lower = {0.0};
  p.upper = {1.0, 1.0};
  EXPECT_THROW(solve_lp(p), std::invalid_argument);
  p.lower = {0.0, 0.0};
  p.ub_matrix = {{1.0}};
  p.ub_rhs = {1.0};
  EXPECT_THROW(solve_lp(p), std::invalid_argument);
  p.ub_matrix = {{1.0, 1.0}};
  p.lower = {2.0, 0.0};
  EXPECT_THROW(solve_lp(p), std::invalid_argument);
}

TEST(SolveLp, FreeFixedAndMirroredVariables) {
  // Free, fixed and upper-bounded-only variables in one program.
  LinearProgram p;
  p.objective = {1.0, -1.0, 1.0};
  p.lower = {-kInf, 2.0, -kInf};
  p.upper = {kInf, 2.0, 5.0};
  p.ub_matrix = {{-1.0, 0.0, 0.0}, {0.0, 0.0, -1.0}};
  p.ub_rhs = {3.0, 1.0};
  const auto s = solve_lp(p);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.values[0], -3.0, 1e-12);
  EXPECT_NEAR(s.values[1], 2.0, 1e-12);
  EXPECT_NEAR(s.values[2], -1.0, 1e-12);
  expect_kkt(p, s, 1e-9);
}

TEST(SolveLp, DegenerateProgramTerminates) {
  // Classic cycling example (Beale); Bland's rule must terminate.
  LinearProgram p;
  p.objective = {-0.75, 150.0, -0.02, 6.0};
  p.lower = {0, 0, 0, 0};
  p.upper = {kInf, kInf, kInf, kInf};
  p.ub_matrix = {{0.25, -60.0, -0.04, 9.0}, {0.5, -90.0, -0.02, 3.0}, {0.0, 0.0, 1.0, 0.0}};
  p.ub_rhs = {0.0, 0.0, 1.0};
  const auto s = solve_lp(p);
  ASSERT_EQ(s.status, LpStatus::optimal);
  EXPECT_NEAR(s.objective_value, -0.05, 1e-9);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> nv(2, 6), nub(1, 6), neq(0, 1);
  int infeasible_agreed = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = static_cast<std::size_t>(nv(rng));
    LinearProgram p = random_feasible(rng, n, static_cast<std::size_t>(nub(rng)), static_cast<std::size_t>(neq(rng)), true);
    if (trial % 10 == 0) {
      // Break feasibility: x0 >= 5 is outside the box.
      std::vector<double> row(n, 0.0);
      row[0] = -1.0;
      p.ub_matrix.push_back(row);
      p.ub_rhs.push_back(-5.0);
    }
    bool feasible = false;
    const double oracle = vertex_enumeration(p, feasible);
    const auto s = solve_lp(p);
    if (!feasible) {
      EXPECT_EQ(s.status, LpStatus::infeasible);
      ++infeasible_agreed;
      continue;
    }
    ASSERT_EQ(s.status, LpStatus::optimal) << "trial " << trial;
    EXPECT_NEAR(s.objective_value, oracle, 1e-6) << "trial " << trial;
  }
  EXPECT_EQ(infeasible_agreed, 20);
}

TEST(SolveLp, RandomMediumProgramsSatisfyKkt) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const LinearProgram p = random_feasible(rng, 20, 10, trial % 3, trial % 2 == 0);
    const auto s = solve_lp(p);
    expect_kkt(p, s, 1e-6);
  }
}
