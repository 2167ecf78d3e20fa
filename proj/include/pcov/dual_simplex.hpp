#pragma once
// Bounded-variable dual simplex, revised form: sparse constraint matrix and
// a product-form inverse of the basis (eta file) that is rebuilt from scratch
// every so often. Meant for branch and bound: bounds can change between
// solves and the previous basis is reused, which stays dual feasible as long
// as the changed variables are boxed.

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcov/lp.hpp"

namespace pcov {

enum class DualStatus { optimal, infeasible, trouble };

struct DualSimplexOptions {
  double primal_tolerance = 1e-9;
  double dual_tolerance = 1e-9;
  double pivot_tolerance = 1e-9;
  std::size_t refactor_interval = 80;
  std::size_t iteration_limit = 0;  // 0: 20 * (rows + columns) + 100
};

class DualSimplex {
 public:
  explicit DualSimplex(const LinearProgram& p, DualSimplexOptions opt = {}) : opt_(opt) {
    n_ = p.num_vars();
    m_ = p.eq_matrix.size() + p.ub_matrix.size();
    lo_.assign(n_ + m_, 0.0);
    hi_.assign(n_ + m_, kInf);
    cost_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) lo_[j] = p.lower[j], hi_[j] = p.upper[j], cost_[j] = p.objective[j];
    for (std::size_t r = 0; r < p.eq_matrix.size(); ++r) hi_[n_ + r] = 0.0;
    rows_.resize(m_);
    cols_.resize(n_);
    b_.assign(m_, 0.0);
    auto load = [&](std::size_t r, const std::vector<double>& a, double rhs) {
      for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j] != 0.0) {
          rows_[r].push_back({j, a[j]});
          cols_[j].push_back({r, a[j]});
        }
      b_[r] = rhs;
    };
    std::size_t r = 0;
    for (std::size_t e = 0; e < p.eq_matrix.size(); ++e) load(r++, p.eq_matrix[e], p.eq_rhs[e]);
    for (std::size_t u = 0; u < p.ub_matrix.size(); ++u) load(r++, p.ub_matrix[u], p.ub_rhs[u]);
    start();
  }

  std::size_t rows() const { return m_; }
  std::size_t iterations() const { return iterations_; }

  void set_bounds(std::size_t j, double lo, double hi) {
    lo_[j] = lo;
    hi_[j] = hi;
    if (in_basis_[j]) return;
    const double value = resting_value(j, d_[j]);
    const double delta = value - x_[j];
    if (delta == 0.0) return;
    x_[j] = value;
    // Basic values move by -B^-1 a_j * delta.
    std::vector<double>& col = work_col_;
    column(j, col);
    ftran(col);
    for (std::size_t i = 0; i < m_; ++i)
      if (col[i] != 0.0) x_[basic_[i]] -= col[i] * delta;
  }

  /// Re-optimizes from the current basis. Values are those of the original
  /// variables.
  DualStatus solve(std::vector<double>& values, double& objective) {
    if (artificial_ || singular_) return DualStatus::trouble;
    const std::size_t limit = opt_.iteration_limit ? opt_.iteration_limit : 20 * (m_ + n_) + 100;
    std::size_t steps = 0;
    std::vector<double>& rho = work_row_;
    std::vector<double>& alpha = work_alpha_;
    std::vector<double>& col = work_col_;
    while (true) {
      std::size_t r = m_;
      double worst = opt_.primal_tolerance;
      for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t v = basic_[i];
        const double viol = std::max(lo_[v] - x_[v], x_[v] - hi_[v]);
        if (viol > worst) {
          worst = viol;
          r = i;
        }
      }
      if (r == m_) break;
      if (++steps > limit) return DualStatus::trouble;
      ++iterations_;
      const std::size_t leaving = basic_[r];
      const bool to_lower = x_[leaving] < lo_[leaving];
      const double target = to_lower ? lo_[leaving] : hi_[leaving];

      // Row r of B^-1 [A I].
      rho.assign(m_, 0.0);
      rho[r] = 1.0;
      btran(rho);
      alpha.assign(n_ + m_, 0.0);
      for (std::size_t i = 0; i < m_; ++i) {
        const double ri = rho[i];
        if (ri == 0.0) continue;
        alpha[n_ + i] = ri;
        for (const auto& [j, a] : rows_[i]) alpha[j] += ri * a;
      }

      // Eligible columns move x_leaving toward its violated bound; Harris
      // two-pass ratio test keeps reduced costs within tolerance.
      auto eligible = [&](std::size_t j) {
        if (in_basis_[j]) return false;
        const double a = alpha[j];
        if (std::abs(a) <= opt_.pivot_tolerance) return false;
        if (lo_[j] == hi_[j]) return false;
        const bool can_up = x_[j] < hi_[j], can_down = x_[j] > lo_[j];
        const bool need_up = to_lower ? a < 0.0 : a > 0.0;
        return need_up ? can_up : can_down;
      };
      double bound = kInf;
      for (std::size_t j = 0; j < n_ + m_; ++j)
        if (eligible(j)) bound = std::min(bound, (std::abs(d_[j]) + opt_.dual_tolerance) / std::abs(alpha[j]));
      if (bound == kInf) return DualStatus::infeasible;
      std::size_t enter = n_ + m_;
      double best = 0.0;
      for (std::size_t j = 0; j < n_ + m_; ++j)
        if (eligible(j) && std::abs(d_[j]) / std::abs(alpha[j]) <= bound && std::abs(alpha[j]) > best) {
          best = std::abs(alpha[j]);
          enter = j;
        }

      column(enter, col);
      ftran(col);
      const double pivot = col[r];
      if (std::abs(pivot) <= opt_.pivot_tolerance ||
          std::abs(pivot - alpha[enter]) > 1e-7 * std::max(1.0, std::abs(pivot))) {
        // Row and column disagree: the eta file has drifted.
        if (!refactor()) return DualStatus::trouble;
        continue;
      }
      const double step = (target - x_[leaving]) / -pivot;
      x_[enter] += step;
      for (std::size_t i = 0; i < m_; ++i)
        if (col[i] != 0.0) x_[basic_[i]] -= col[i] * step;
      x_[leaving] = target;

      const double theta = d_[enter] / alpha[enter];
      if (theta != 0.0)
        for (std::size_t j = 0; j < n_ + m_; ++j)
          if (!in_basis_[j] && alpha[j] != 0.0) d_[j] -= theta * alpha[j];
      d_[enter] = 0.0;
      d_[leaving] = -theta;

      push_eta(r, col);
      basic_[r] = enter;
      in_basis_[enter] = true;
      in_basis_[leaving] = false;
      if (etas_.size() >= base_etas_ + opt_.refactor_interval && !refactor()) return DualStatus::trouble;
    }
    values.assign(x_.begin(), x_.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) values[j] = std::max(values[j], lo_[j]);
      if (std::isfinite(hi_[j])) values[j] = std::min(values[j], hi_[j]);
    }
    objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) objective += cost_[j] * values[j];
    return DualStatus::optimal;
  }

 private:
  struct Eta {
    std::size_t row;
    double pivot;
    std::vector<std::pair<std::size_t, double>> others;
  };

  // Column j of [A I] as a dense vector.
  void column(std::size_t j, std::vector<double>& out) const {
    out.assign(m_, 0.0);
    if (j >= n_) {
      out[j - n_] = 1.0;
      return;
    }
    for (const auto& [i, a] : cols_[j]) out[i] = a;
  }

  void ftran(std::vector<double>& v) const {
    for (const Eta& e : etas_) {
      double& vp = v[e.row];
      if (vp == 0.0) continue;
      vp /= e.pivot;
      for (const auto& [i, a] : e.others) v[i] -= a * vp;
    }
  }

  void btran(std::vector<double>& u) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = u[it->row];
      for (const auto& [i, a] : it->others) acc -= a * u[i];
      u[it->row] = acc / it->pivot;
    }
  }

  void push_eta(std::size_t r, const std::vector<double>& col) {
    Eta e{r, col[r], {}};
    for (std::size_t i = 0; i < m_; ++i)
      if (i != r && std::abs(col[i]) > 1e-14) e.others.push_back({i, col[i]});
    etas_.push_back(std::move(e));
  }

  // Slack basis, free columns pivoted in, nonbasic variables at the bound
  // their reduced cost prefers.
  void start() {
    basic_.resize(m_);
    in_basis_.assign(n_ + m_, false);
    for (std::size_t i = 0; i < m_; ++i) basic_[i] = n_ + i, in_basis_[n_ + i] = true;
    etas_.clear();
    std::vector<double> col;
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j]) || std::isfinite(hi_[j])) continue;
      column(j, col);
      ftran(col);
      std::size_t best_row = m_;
      double best = opt_.pivot_tolerance;
      for (std::size_t i = 0; i < m_; ++i)
        if (basic_[i] >= n_ && std::abs(col[i]) > best) best = std::abs(col[i]), best_row = i;
      if (best_row == m_) continue;
      push_eta(best_row, col);
      in_basis_[basic_[best_row]] = false;
      basic_[best_row] = j;
      in_basis_[j] = true;
    }
    base_etas_ = etas_.size();
    x_.assign(n_ + m_, 0.0);
    compute_duals();
    for (std::size_t j = 0; j < n_ + m_; ++j)
      if (!in_basis_[j]) x_[j] = resting_value(j, d_[j]);
    compute_basics();
  }

  double resting_value(std::size_t v, double d) {
    const double lo = lo_[v], hi = hi_[v];
    if (lo == hi) return lo;
    const bool prefer_low = d >= 0.0;
    if (prefer_low && std::isfinite(lo)) return lo;
    if (!prefer_low && std::isfinite(hi)) return hi;
    // Dual infeasible at the only finite bound (or free and not pivotable):
    // this start is unusable and the caller has to use the cold solver.
    if (std::abs(d) > opt_.dual_tolerance) artificial_ = true;
    return std::isfinite(lo) ? lo : std::isfinite(hi) ? hi : 0.0;
  }

  void compute_duals() {
    std::vector<double> y(m_);
    for (std::size_t i = 0; i < m_; ++i) y[i] = cost_[basic_[i]];
    btran(y);
    d_.assign(n_ + m_, 0.0);
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (in_basis_[j]) continue;
      double v = cost_[j];
      if (j >= n_) {
        v -= y[j - n_];
      } else {
        for (const auto& [i, a] : cols_[j]) v -= y[i] * a;
      }
      d_[j] = v;
    }
  }

  void compute_basics() {
    std::vector<double> rhs = b_;
    for (std::size_t j = 0; j < n_ + m_; ++j) {
      if (in_basis_[j] || x_[j] == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] -= x_[j];
      } else {
        for (const auto& [i, a] : cols_[j]) rhs[i] -= a * x_[j];
      }
    }
    ftran(rhs);
    for (std::size_t i = 0; i < m_; ++i) x_[basic_[i]] = rhs[i];
  }

  // Rebuilds the eta file for the current basis from the identity, placing
  // structural columns sparsest first with partial pivoting.
  bool refactor() {
    std::vector<std::size_t> structural;
    for (std::size_t i = 0; i < m_; ++i)
      if (basic_[i] < n_) structural.push_back(basic_[i]);
    std::sort(structural.begin(), structural.end(),
              [&](std::size_t a, std::size_t b) { return cols_[a].size() < cols_[b].size(); });
    std::vector<std::size_t> holder(m_);  // variable owning each row position
    std::vector<bool> row_free(m_, true);
    for (std::size_t i = 0; i < m_; ++i) holder[i] = n_ + i;
    for (std::size_t i = 0; i < m_; ++i)
      if (basic_[i] >= n_) row_free[basic_[i] - n_] = false;  // basic slacks keep their own row
    etas_.clear();
    std::vector<double> col;
    for (std::size_t j : structural) {
      column(j, col);
      ftran(col);
      std::size_t best_row = m_;
      double best = 0.0;
      for (std::size_t i = 0; i < m_; ++i)
        if (row_free[i] && std::abs(col[i]) > best) best = std::abs(col[i]), best_row = i;
      if (best_row == m_ || best < 1e-11) {
        singular_ = true;
        return false;
      }
      push_eta(best_row, col);
      holder[best_row] = j;
      row_free[best_row] = false;
    }
    basic_ = holder;
    base_etas_ = etas_.size();
    compute_duals();
    compute_basics();
    return true;
  }

  DualSimplexOptions opt_;
  std::size_t n_ = 0, m_ = 0;
  std::vector<double> lo_, hi_, cost_, b_;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows_, cols_;
  std::vector<Eta> etas_;
  std::size_t base_etas_ = 0;  // etas produced by the last refactorization
  std::vector<std::size_t> basic_;
  std::vector<bool> in_basis_;
  std::vector<double> x_;  // values of structural and slack variables
  std::vector<double> d_;  // reduced costs (zero for basic variables)
  std::vector<double> work_row_, work_alpha_, work_col_;
  bool artificial_ = false;
  bool singular_ = false;
  std::size_t iterations_ = 0;
};

}  // namespace pcov
