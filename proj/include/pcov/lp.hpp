#pragma once
// Dense two-phase primal simplex with Bland's rule.
//
//   minimize    c'x
//   subject to  A_eq x  = b_eq
//               A_ub x <= b_ub
//               lo <= x <= hi      (bounds may be infinite)
//
// Variables with lo == hi are substituted out before the tableau is built.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcov {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> eq_matrix;
  std::vector<double> eq_rhs;
  std::vector<std::vector<double>> ub_matrix;
  std::vector<double> ub_rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }

  /// Adds a variable with the given cost and bounds; returns its index.
  std::size_t add_variable(double cost, double lo, double hi) {
    objective.push_back(cost);
    lower.push_back(lo);
    upper.push_back(hi);
    for (auto& row : eq_matrix) row.push_back(0.0);
    for (auto& row : ub_matrix) row.push_back(0.0);
    return objective.size() - 1;
  }
};

enum class LpStatus { optimal, infeasible, unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "?";
}

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> values;
  double objective_value = 0.0;
  // Row duals of the original constraints (minimization sign convention:
  // ub duals are <= 0). Populated when optimal.
  std::vector<double> eq_duals;
  std::vector<double> ub_duals;
  std::size_t iterations = 0;
  double max_violation = 0.0;
};

struct LpOptions {
  double pivot_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double feasibility_tolerance = 1e-7;
  std::size_t iteration_limit = 1'000'000;
};

class LpNumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest constraint or bound violation of x, each row scaled by max(1, |rhs|).
inline double max_violation(const LinearProgram& p, const std::vector<double>& x) {
  double worst = 0.0;
  auto dot = [&](const std::vector<double>& row) {
    double acc = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * x[j];
    return acc;
  };
  for (std::size_t r = 0; r < p.eq_matrix.size(); ++r)
    worst = std::max(worst, std::abs(dot(p.eq_matrix[r]) - p.eq_rhs[r]) / std::max(1.0, std::abs(p.eq_rhs[r])));
  for (std::size_t r = 0; r < p.ub_matrix.size(); ++r)
    worst = std::max(worst, (dot(p.ub_matrix[r]) - p.ub_rhs[r]) / std::max(1.0, std::abs(p.ub_rhs[r])));
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (std::isfinite(p.lower[j])) worst = std::max(worst, (p.lower[j] - x[j]) / std::max(1.0, std::abs(p.lower[j])));
    if (std::isfinite(p.upper[j])) worst = std::max(worst, (x[j] - p.upper[j]) / std::max(1.0, std::abs(p.upper[j])));
  }
  return worst;
}

/// Sparse copy of the rows of a program for repeated feasibility checks
/// (same measure as max_violation, with the bounds passed separately).
class RowChecker {
 public:
  explicit RowChecker(const LinearProgram& p) {
    auto load = [](const std::vector<std::vector<double>>& m, auto& into) {
      for (const auto& row : m) {
        into.emplace_back();
        for (std::size_t j = 0; j < row.size(); ++j)
          if (row[j] != 0.0) into.back().push_back({j, row[j]});
      }
    };
    load(p.eq_matrix, eq_);
    load(p.ub_matrix, ub_);
    eq_rhs_ = p.eq_rhs;
    ub_rhs_ = p.ub_rhs;
  }

  double max_violation(const std::vector<double>& x, const std::vector<double>& lower,
                       const std::vector<double>& upper) const {
    double worst = 0.0;
    auto dot = [&](const std::vector<std::pair<std::size_t, double>>& row) {
      double acc = 0.0;
      for (const auto& [j, a] : row) acc += a * x[j];
      return acc;
    };
    for (std::size_t r = 0; r < eq_.size(); ++r)
      worst = std::max(worst, std::abs(dot(eq_[r]) - eq_rhs_[r]) / std::max(1.0, std::abs(eq_rhs_[r])));
    for (std::size_t r = 0; r < ub_.size(); ++r)
      worst = std::max(worst, (dot(ub_[r]) - ub_rhs_[r]) / std::max(1.0, std::abs(ub_rhs_[r])));
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (std::isfinite(lower[j])) worst = std::max(worst, (lower[j] - x[j]) / std::max(1.0, std::abs(lower[j])));
      if (std::isfinite(upper[j])) worst = std::max(worst, (x[j] - upper[j]) / std::max(1.0, std::abs(upper[j])));
    }
    return worst;
  }

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> eq_, ub_;
  std::vector<double> eq_rhs_, ub_rhs_;
};

namespace detail {

inline void check_dimensions(const LinearProgram& p) {
  const std::size_t n = p.num_vars();
  auto fail = [](const std::string& what) { throw std::invalid_argument("solve_lp: dimension mismatch: " + what); };
  if (p.lower.size() != n || p.upper.size() != n) fail("bounds");
  if (p.eq_matrix.size() != p.eq_rhs.size()) fail("equality rhs");
  if (p.ub_matrix.size() != p.ub_rhs.size()) fail("inequality rhs");
  for (const auto& row : p.eq_matrix)
    if (row.size() != n) fail("equality row width");
  for (const auto& row : p.ub_matrix)
    if (row.size() != n) fail("inequality row width");
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(p.lower[j]) || std::isnan(p.upper[j]) || p.lower[j] > p.upper[j])
      throw std::invalid_argument("solve_lp: invalid bounds on variable " + std::to_string(j));
    if (!std::isfinite(p.objective[j])) throw std::invalid_argument("solve_lp: non-finite cost");
  }
}

// How an original variable maps onto nonnegative tableau columns.
struct ColumnMap {
  enum Kind { fixed, shifted, mirrored, split } kind = fixed;
  int col = -1;
  int col2 = -1;
  double offset = 0.0;
};

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  double& cost(std::size_t c) { return at(rows_, c); }  // reduced-cost row
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const std::size_t stride = cols_ + 1;
    double* prow = &data_[pr * stride];
    const double inv = 1.0 / prow[pc];
    for (std::size_t c = 0; c < stride; ++c) prow[c] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      double* row = &data_[r * stride];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < stride; ++c) row[c] -= f * prow[c];
      row[pc] = 0.0;
    }
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& p, const LpOptions& opt = {}) {
  using detail::ColumnMap;
  detail::check_dimensions(p);
  const std::size_t n = p.num_vars();

  std::vector<ColumnMap> map(n);
  int ncols = 0;
  std::vector<std::pair<int, double>> bound_rows;  // column <= value
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = p.lower[j], hi = p.upper[j];
    auto& m = map[j];
    if (lo == hi) {
      m.kind = ColumnMap::fixed;
      m.offset = lo;
    } else if (std::isfinite(lo)) {
      m.kind = ColumnMap::shifted;
      m.col = ncols++;
      m.offset = lo;
      if (std::isfinite(hi)) bound_rows.emplace_back(m.col, hi - lo);
    } else if (std::isfinite(hi)) {
      m.kind = ColumnMap::mirrored;
      m.col = ncols++;
      m.offset = hi;
    } else {
      m.kind = ColumnMap::split;
      m.col = ncols++;
      m.col2 = ncols++;
    }
  }

  // Assemble rows over structural columns: eq rows, ub rows, bound rows.
  const std::size_t n_eq = p.eq_matrix.size();
  const std::size_t n_ub = p.ub_matrix.size() + bound_rows.size();
  const std::size_t m = n_eq + n_ub;
  std::vector<std::vector<double>> rows(m, std::vector<double>(static_cast<std::size_t>(ncols), 0.0));
  std::vector<double> rhs(m, 0.0);
  auto load_row = [&](std::size_t r, const std::vector<double>& a, double b) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = a[j];
      if (v == 0.0) continue;
      const auto& cm = map[j];
      switch (cm.kind) {
        case ColumnMap::fixed: b -= v * cm.offset; break;
        case ColumnMap::shifted: rows[r][static_cast<std::size_t>(cm.col)] += v; b -= v * cm.offset; break;
        case ColumnMap::mirrored: rows[r][static_cast<std::size_t>(cm.col)] -= v; b -= v * cm.offset; break;
        case ColumnMap::split:
          rows[r][static_cast<std::size_t>(cm.col)] += v;
          rows[r][static_cast<std::size_t>(cm.col2)] -= v;
          break;
      }
    }
    rhs[r] = b;
  };
  for (std::size_t r = 0; r < n_eq; ++r) load_row(r, p.eq_matrix[r], p.eq_rhs[r]);
  for (std::size_t r = 0; r < p.ub_matrix.size(); ++r) load_row(n_eq + r, p.ub_matrix[r], p.ub_rhs[r]);
  for (std::size_t k = 0; k < bound_rows.size(); ++k) {
    const std::size_t r = n_eq + p.ub_matrix.size() + k;
    rows[r][static_cast<std::size_t>(bound_rows[k].first)] = 1.0;
    rhs[r] = bound_rows[k].second;
  }

  // Column layout: structural | slacks (one per ub row) | artificials.
  const std::size_t n_struct = static_cast<std::size_t>(ncols);
  const std::size_t slack0 = n_struct;
  std::vector<double> flip(m, 1.0);
  std::vector<int> art_of_row(m, -1);
  std::size_t n_art = 0;
  for (std::size_t r = 0; r < m; ++r) {
    if (rhs[r] < 0.0) flip[r] = -1.0;
    if (r < n_eq || flip[r] < 0.0) art_of_row[r] = static_cast<int>(n_art++);
  }
  const std::size_t art0 = slack0 + n_ub;
  const std::size_t total = art0 + n_art;

  detail::Tableau t(m, total);
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n_struct; ++c) t.at(r, c) = flip[r] * rows[r][c];
    if (r >= n_eq) t.at(r, slack0 + (r - n_eq)) = flip[r];
    t.rhs(r) = flip[r] * rhs[r];
    if (art_of_row[r] >= 0) {
      t.at(r, art0 + static_cast<std::size_t>(art_of_row[r])) = 1.0;
      basis[r] = art0 + static_cast<std::size_t>(art_of_row[r]);
    } else {
      basis[r] = slack0 + (r - n_eq);
    }
  }

  LpSolution sol;
  auto run = [&](bool allow_artificial) -> LpStatus {
    while (true) {
      if (sol.iterations++ > opt.iteration_limit) throw LpNumericalError("solve_lp: iteration limit exceeded");
      std::size_t enter = total;
      const std::size_t limit = allow_artificial ? total : art0;
      for (std::size_t c = 0; c < limit; ++c)
        if (t.cost(c) < -opt.optimality_tolerance) {
          enter = c;
          break;
        }
      if (enter == total) return LpStatus::optimal;
      std::size_t leave = m;
      double best = kInf;
      for (std::size_t r = 0; r < m; ++r) {
        const double a = t.at(r, enter);
        if (a <= opt.pivot_tolerance) continue;
        const double ratio = t.rhs(r) / a;
        // Bland: among minimum-ratio rows, the lowest basic variable leaves.
        if (leave == m || ratio < best - 1e-12) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + 1e-12 && basis[r] < basis[leave]) {
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave == m) return LpStatus::unbounded;
      t.pivot(leave, enter);
      basis[leave] = enter;
    }
  };

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    for (std::size_t c = 0; c <= total; ++c) t.at(m, c) = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (art_of_row[r] < 0) continue;
      for (std::size_t c = 0; c <= total; ++c) t.at(m, c) -= t.at(r, c);
    }
    for (std::size_t a = 0; a < n_art; ++a) t.cost(art0 + a) = 0.0;
    run(true);
    double infeas = 0.0;
    for (std::size_t r = 0; r < m; ++r)
      if (basis[r] >= art0) infeas += t.rhs(r);
    double scale = 1.0;
    for (double b : rhs) scale = std::max(scale, std::abs(b));
    if (infeas > opt.feasibility_tolerance * scale) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for (std::size_t r = 0; r < m; ++r) {
      if (basis[r] < art0) continue;
      for (std::size_t c = 0; c < art0; ++c)
        if (std::abs(t.at(r, c)) > opt.pivot_tolerance) {
          t.pivot(r, c);
          basis[r] = c;
          break;
        }
    }
  }

  // Phase 2 costs over structural columns.
  std::vector<double> cost(total, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& cm = map[j];
    const double c = p.objective[j];
    switch (cm.kind) {
      case ColumnMap::fixed: break;
      case ColumnMap::shifted: cost[static_cast<std::size_t>(cm.col)] += c; break;
      case ColumnMap::mirrored: cost[static_cast<std::size_t>(cm.col)] -= c; break;
      case ColumnMap::split:
        cost[static_cast<std::size_t>(cm.col)] += c;
        cost[static_cast<std::size_t>(cm.col2)] -= c;
        break;
    }
  }
  for (std::size_t c = 0; c < total; ++c) t.cost(c) = cost[c];
  t.at(m, total) = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    const double cb = cost[basis[r]];
    if (cb == 0.0) continue;
    for (std::size_t c = 0; c <= total; ++c) t.at(m, c) -= cb * t.at(r, c);
  }
  if (run(false) == LpStatus::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }

  std::vector<double> y(total, 0.0);
  for (std::size_t r = 0; r < m; ++r) y[basis[r]] = t.rhs(r);
  sol.values.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& cm = map[j];
    switch (cm.kind) {
      case ColumnMap::fixed: sol.values[j] = cm.offset; break;
      case ColumnMap::shifted: sol.values[j] = cm.offset + y[static_cast<std::size_t>(cm.col)]; break;
      case ColumnMap::mirrored: sol.values[j] = cm.offset - y[static_cast<std::size_t>(cm.col)]; break;
      case ColumnMap::split:
        sol.values[j] = y[static_cast<std::size_t>(cm.col)] - y[static_cast<std::size_t>(cm.col2)];
        break;
    }
    // Snap round-off against the bounds.
    if (std::isfinite(p.lower[j])) sol.values[j] = std::max(sol.values[j], p.lower[j]);
    if (std::isfinite(p.upper[j])) sol.values[j] = std::min(sol.values[j], p.upper[j]);
  }
  sol.objective_value = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective_value += p.objective[j] * sol.values[j];

  // Duals from reduced costs of slack / artificial columns.
  sol.eq_duals.assign(n_eq, 0.0);
  sol.ub_duals.assign(p.ub_matrix.size(), 0.0);
  for (std::size_t r = 0; r < n_eq; ++r)
    sol.eq_duals[r] = -flip[r] * t.cost(art0 + static_cast<std::size_t>(art_of_row[r]));
  for (std::size_t r = 0; r < p.ub_matrix.size(); ++r) sol.ub_duals[r] = -t.cost(slack0 + r);

  sol.max_violation = max_violation(p, sol.values);
  if (sol.max_violation > opt.feasibility_tolerance)
    throw LpNumericalError("solve_lp: returned point violates constraints by " + std::to_string(sol.max_violation));
  sol.status = LpStatus::optimal;
  return sol;
}

}  // namespace pcov
