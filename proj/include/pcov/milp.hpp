#pragma once
// Best-first branch and bound over lp.hpp relaxations for programs whose
// integer variables are all binary.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "pcov/dual_simplex.hpp"
#include "pcov/lp.hpp"

namespace pcov {

struct MixedIntegerProgram {
  LinearProgram base;
  std::vector<std::size_t> binaries;  // indices constrained to {0, 1}
  std::vector<int> priority;          // per binary (optional): higher classes are branched on first
};

enum class MipStatus {
  optimal,         // search completed; incumbent is optimal
  node_limit,      // node limit hit; best incumbent returned
  infeasible,      // search completed without an integral point
  no_incumbent,    // node limit hit before any integral point was found
  unbounded,       // root relaxation unbounded
};

inline const char* to_string(MipStatus s) {
  switch (s) {
    case MipStatus::optimal: return "optimal";
    case MipStatus::node_limit: return "node_limit";
    case MipStatus::infeasible: return "infeasible";
    case MipStatus::no_incumbent: return "no_incumbent";
    case MipStatus::unbounded: return "unbounded";
  }
  return "?";
}

struct MipSolution {
  MipStatus status = MipStatus::infeasible;
  std::vector<double> values;
  double objective_value = kInf;
  std::size_t nodes_explored = 0;
  std::vector<double> incumbent_history;  // objective of each new incumbent, in discovery order

  bool has_solution() const { return status == MipStatus::optimal || status == MipStatus::node_limit; }
};

struct MipOptions {
  std::size_t node_limit = 200'000;
  double integrality_tolerance = 1e-6;
  double prune_tolerance = 1e-9;
  LpOptions lp;
  // Reuse the previous node's basis (bounded dual simplex); nodes that run
  // into numerical trouble are re-solved from scratch with solve_lp.
  bool warm_start = true;
  // Optional completion of a relaxation into a full candidate point. It is
  // accepted only if integral on the binaries and feasible for every row.
  std::function<std::optional<std::vector<double>>(const std::vector<double>&)> heuristic;
  // Optional starting incumbent, subject to the same checks.
  std::optional<std::vector<double>> initial_point;
};

namespace detail {

struct BbNode {
  double bound = 0.0;
  std::size_t depth = 0;
  std::size_t id = 0;
  std::vector<std::int8_t> fix;  // per binary: -1 free, 0 or 1 fixed
};

struct BbOrder {
  // priority_queue pops the "largest"; we want the lowest bound, then the
  // deepest node, then the oldest.
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (std::abs(a.bound - b.bound) > 1e-12) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

}  // namespace detail

inline MipSolution solve_milp(const MixedIntegerProgram& prog, const MipOptions& opt = {}) {
  const std::size_t nb = prog.binaries.size();
  LinearProgram lp = prog.base;
  for (std::size_t b : prog.binaries) {
    if (b >= lp.num_vars()) throw std::invalid_argument("solve_milp: binary index out of range");
    if (lp.lower[b] < 0.0 || lp.upper[b] > 1.0)
      throw std::invalid_argument("solve_milp: binary variable " + std::to_string(b) + " has bounds outside [0, 1]");
  }
  if (!prog.priority.empty() && prog.priority.size() != nb)
    throw std::invalid_argument("solve_milp: priority must have one entry per binary");
  const std::vector<double> base_lo = lp.lower, base_hi = lp.upper;

  MipSolution out;
  std::priority_queue<detail::BbNode, std::vector<detail::BbNode>, detail::BbOrder> open;
  std::size_t next_id = 0;
  open.push({-kInf, 0, next_id++, std::vector<std::int8_t>(nb, -1)});

  auto apply = [&](const std::vector<std::int8_t>& fix) {
    lp.lower = base_lo;
    lp.upper = base_hi;
    for (std::size_t k = 0; k < nb; ++k)
      if (fix[k] >= 0) lp.lower[prog.binaries[k]] = lp.upper[prog.binaries[k]] = fix[k];
  };

  const RowChecker checker(prog.base);
  std::unique_ptr<DualSimplex> warm;
  std::vector<double> warm_lo, warm_hi;  // binary bounds the warm solver currently holds
  auto relax = [&]() -> LpSolution {
    if (opt.warm_start) {
      if (!warm) {
        warm = std::make_unique<DualSimplex>(prog.base);
        warm_lo.assign(nb, 0.0);
        warm_hi.assign(nb, 1.0);
        for (std::size_t k = 0; k < nb; ++k) warm_lo[k] = base_lo[prog.binaries[k]], warm_hi[k] = base_hi[prog.binaries[k]];
      }
      for (std::size_t k = 0; k < nb; ++k) {
        const std::size_t v = prog.binaries[k];
        if (lp.lower[v] != warm_lo[k] || lp.upper[v] != warm_hi[k]) {
          warm->set_bounds(v, lp.lower[v], lp.upper[v]);
          warm_lo[k] = lp.lower[v];
          warm_hi[k] = lp.upper[v];
        }
      }
      LpSolution sol;
      const DualStatus st = warm->solve(sol.values, sol.objective_value);
      if (st == DualStatus::infeasible) {
        sol.status = LpStatus::infeasible;
        return sol;
      }
      if (st == DualStatus::optimal) {
        sol.max_violation = checker.max_violation(sol.values, lp.lower, lp.upper);
        if (sol.max_violation <= opt.lp.feasibility_tolerance) {
          sol.status = LpStatus::optimal;
          return sol;
        }
      }
      warm.reset();  // rebuilt from the base program at the next node
    }
    try {
      return solve_lp(lp, opt.lp);
    } catch (const LpNumericalError&) {
      return LpSolution{};  // treated as infeasible node
    }
  };

  auto offer = [&](const std::vector<double>& cand) {
    if (cand.size() != prog.base.num_vars()) return;
    for (std::size_t b : prog.binaries)
      if (cand[b] != 0.0 && cand[b] != 1.0) return;
    if (checker.max_violation(cand, base_lo, base_hi) > opt.lp.feasibility_tolerance) return;
    double obj = 0.0;
    for (std::size_t j = 0; j < cand.size(); ++j) obj += prog.base.objective[j] * cand[j];
    if (obj < out.objective_value - opt.prune_tolerance) {
      out.objective_value = obj;
      out.values = cand;
      out.incumbent_history.push_back(obj);
    }
  };

  if (opt.initial_point) offer(*opt.initial_point);

  bool limit_hit = false;
  while (!open.empty()) {
    if (out.nodes_explored >= opt.node_limit) {
      limit_hit = true;
      break;
    }
    detail::BbNode node = open.top();
    open.pop();
    if (node.bound >= out.objective_value - opt.prune_tolerance) continue;

    apply(node.fix);
    ++out.nodes_explored;
    const LpSolution rel = relax();
    if (rel.status == LpStatus::unbounded) {
      if (node.depth == 0) {
        out.status = MipStatus::unbounded;
        return out;
      }
      continue;
    }
    if (rel.status != LpStatus::optimal) continue;
    if (rel.objective_value >= out.objective_value - opt.prune_tolerance) continue;
    if (opt.heuristic)
      if (auto cand = opt.heuristic(rel.values)) {
        offer(*cand);
        if (rel.objective_value >= out.objective_value - opt.prune_tolerance) continue;
      }

    // Most fractional binary of the highest priority class that has one;
    // ties go to the lowest index.
    std::size_t branch = nb;
    double best_frac = opt.integrality_tolerance;
    int best_class = std::numeric_limits<int>::min();
    for (std::size_t k = 0; k < nb; ++k) {
      const double v = rel.values[prog.binaries[k]];
      const double frac = std::abs(v - std::round(v));
      if (frac <= opt.integrality_tolerance) continue;
      const int cls = prog.priority.empty() ? 0 : prog.priority[k];
      if (cls > best_class || (cls == best_class && frac > best_frac + 1e-15)) {
        best_class = cls;
        best_frac = frac;
        branch = k;
      }
    }

    if (branch == nb) {
      // Integral within tolerance: round and re-solve with binaries fixed so
      // the continuous part is exact for the rounded assignment.
      std::vector<std::int8_t> fix(nb);
      for (std::size_t k = 0; k < nb; ++k) fix[k] = static_cast<std::int8_t>(std::lround(rel.values[prog.binaries[k]]));
      apply(fix);
      const LpSolution polished = relax();
      if (polished.status != LpStatus::optimal) continue;
      if (polished.objective_value < out.objective_value) {
        out.objective_value = polished.objective_value;
        out.values = polished.values;
        out.incumbent_history.push_back(out.objective_value);
      }
      continue;
    }

    const double v = rel.values[prog.binaries[branch]];
    const std::int8_t first = v >= 0.5 ? 1 : 0;
    for (std::int8_t side : {first, static_cast<std::int8_t>(1 - first)}) {
      detail::BbNode child{rel.objective_value, node.depth + 1, next_id++, node.fix};
      child.fix[branch] = side;
      open.push(std::move(child));
    }
  }

  if (out.values.empty()) {
    out.status = limit_hit ? MipStatus::no_incumbent : MipStatus::infeasible;
    return out;
  }
  out.status = limit_hit ? MipStatus::node_limit : MipStatus::optimal;

  for (std::size_t b : prog.binaries)
    if (out.values[b] != 0.0 && out.values[b] != 1.0) throw LpNumericalError("solve_milp: non-integral binary in result");
  const double viol = max_violation(prog.base, out.values);
  if (viol > opt.lp.feasibility_tolerance)
    throw LpNumericalError("solve_milp: result violates constraints by " + std::to_string(viol));
  return out;
}

}  // namespace pcov
