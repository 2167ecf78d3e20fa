#pragma once
// Brute-force references for small instances. They share no optimization
// code with the solvers they check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pcov/coverage.hpp"
#include "pcov/schedule.hpp"
#include "pcov/simulator.hpp"

namespace pcov {

class OracleGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  double resolution = 0.01;
  double max_evaluations = 1e8;
};

struct BruteForceTimes {
  bool feasible = false;
  double cost = kInf;
  CoverageAssignment best;
  std::size_t evaluations = 0;
};

namespace detail {

inline double binomial(double n, double k) {
  double r = 1.0;
  for (int i = 1; i <= static_cast<int>(k); ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

/// Upper bound on grid points visited by brute_force_times.
inline double brute_force_times_size(const std::vector<Path>& paths, double resolution) {
  double total = 1.0;
  for (const auto& p : paths) {
    const double steps = std::floor(std::clamp(1.0 - p.normalized_moving_time, 0.0, 1.0) / resolution + 1e-9);
    total *= detail::binomial(steps + static_cast<double>(p.size()), static_cast<double>(p.size()));
  }
  return total;
}

/// Grid over coverage times (multiples of the resolution within each agent's
/// budget); productions are then exact: per point, the cheapest production
/// per unit of delivered rate is filled first (fractional knapsack).
inline BruteForceTimes brute_force_times(const Scenario& s, const std::vector<Path>& paths, const CostFunction& cost,
                                         const GridSpec& grid, bool allow_shared_coverage = false) {
  if (!(grid.resolution > 0.0)) throw std::invalid_argument("brute_force_times: resolution must be positive");
  if (brute_force_times_size(paths, grid.resolution) > grid.max_evaluations)
    throw OracleGuardError("brute_force_times: grid too large");
  const auto coef = detail::cost_coefficients(cost, s, paths, CoverageOptions{}.distance_floor);

  struct Slot {
    std::size_t path, index;
    int point;
    double rmax, time_cost, rate_cost;
  };
  std::vector<Slot> slots;
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t j = 0; j < paths[p].size(); ++j) {
      const int q = paths[p].order[j];
      slots.push_back({p, j, q, s.agent(paths[p].agent_id).max_rate(q), coef[p][j].time, coef[p][j].rate});
    }

  BruteForceTimes out;
  std::vector<int> ticks(slots.size(), 0);
  std::vector<int> agent_used(paths.size(), 0), point_used(s.points.size(), 0);
  std::vector<int> budget(paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p)
    budget[p] = static_cast<int>(
        std::floor(std::clamp(1.0 - paths[p].normalized_moving_time, 0.0, 1.0) / grid.resolution + 1e-9));
  const int point_cap = static_cast<int>(std::floor(1.0 / grid.resolution + 1e-9));

  std::vector<std::vector<std::size_t>> at_point(s.points.size());
  for (std::size_t k = 0; k < slots.size(); ++k) at_point[static_cast<std::size_t>(slots[k].point)].push_back(k);
  std::vector<double> theta(slots.size()), rho(slots.size());
  std::vector<std::size_t> members;

  auto evaluate = [&]() {
    ++out.evaluations;
    for (std::size_t k = 0; k < slots.size(); ++k) theta[k] = ticks[k] * grid.resolution, rho[k] = 0.0;
    double total = 0.0;
    for (const auto& pt : s.points) {
      members.clear();
      for (std::size_t k : at_point[static_cast<std::size_t>(pt.id)])
        if (theta[k] > 0.0) members.push_back(k);
      std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return slots[a].rate_cost / theta[a] < slots[b].rate_cost / theta[b];
      });
      double remaining = pt.required_rate;
      for (std::size_t k : members) {
        const double r = std::min(slots[k].rmax, remaining / theta[k]);
        rho[k] = r;
        remaining -= r * theta[k];
        if (remaining <= 0.0) break;
      }
      if (remaining > 1e-9 * std::max(1.0, pt.required_rate)) return;
    }
    for (std::size_t k = 0; k < slots.size(); ++k) total += slots[k].time_cost * theta[k] + slots[k].rate_cost * rho[k];
    if (total < out.cost) {
      out.feasible = true;
      out.cost = total;
      out.best.theta.assign(paths.size(), {});
      out.best.rho.assign(paths.size(), {});
      for (std::size_t k = 0; k < slots.size(); ++k) {
        out.best.theta[slots[k].path].push_back(theta[k]);
        out.best.rho[slots[k].path].push_back(rho[k]);
      }
      out.best.cost_value = total;
    }
  };

  std::function<void(std::size_t)> descend = [&](std::size_t k) {
    if (k == slots.size()) {
      evaluate();
      return;
    }
    const Slot& sl = slots[k];
    const std::size_t q = static_cast<std::size_t>(sl.point);
    for (int t = 0; agent_used[sl.path] + t <= budget[sl.path]; ++t) {
      if (!allow_shared_coverage && point_used[q] + t > point_cap) break;
      ticks[k] = t;
      agent_used[sl.path] += t;
      point_used[q] += t;
      descend(k + 1);
      agent_used[sl.path] -= t;
      point_used[q] -= t;
    }
    ticks[k] = 0;
  };
  descend(0);
  return out;
}

struct ShiftGrid {
  double step = 1e-3;
  double max_evaluations = 1e8;
};

struct BruteForceShifts {
  bool feasible = false;
  double objective = kInf;
  std::vector<double> phi;       // per path; empty paths stay at 0
  std::size_t evaluations = 0;   // partial assignments examined
};

/// Grid search over the shifts of every scheduled agent but the first.
/// Intervals are unrolled onto the line (copies shifted by -1, 0, +1) and
/// checked for epsilon separation directly; the objective is the summed
/// line overlap of movement copies. Partial assignments that already
/// collide or cannot beat the best objective are cut off.
inline BruteForceShifts brute_force_shifts(const ConflictSet& conflicts, const std::vector<Path>& paths,
                                           const Timeline& tl, double epsilon, const ShiftGrid& grid = {}) {
  if (!(grid.step > 0.0 && grid.step <= 1.0)) throw std::invalid_argument("brute_force_shifts: bad step");
  std::vector<std::size_t> agents;
  for (std::size_t p = 0; p < paths.size(); ++p)
    if (!paths[p].empty()) agents.push_back(p);
  const auto steps = static_cast<std::size_t>(std::llround(1.0 / grid.step));
  if (agents.size() > 1 && std::pow(static_cast<double>(steps), static_cast<double>(agents.size() - 1)) > grid.max_evaluations)
    throw OracleGuardError("brute_force_shifts: grid too large");

  // Level of each path in the enumeration order.
  std::vector<std::size_t> level(paths.size(), 0);
  for (std::size_t k = 0; k < agents.size(); ++k) level[agents[k]] = k;

  struct Pair {
    double s1, e1, s2, e2;  // local times
    std::size_t p1, p2;
  };
  auto later = [&](const IntervalRef& a, const IntervalRef& b) { return level[a.path] > level[b.path] ? a.path : b.path; };
  std::vector<std::vector<Pair>> checks(agents.size()), overlaps(agents.size());
  auto local = [&](const IntervalRef& r) { return local_interval(tl, r); };
  auto push = [&](std::vector<std::vector<Pair>>& into, const IntervalRef& a, const IntervalRef& b) {
    const auto [s1, e1] = local(a);
    const auto [s2, e2] = local(b);
    into[level[later(a, b)]].push_back({s1, e1, s2, e2, a.path, b.path});
  };
  for (const auto* set : {&conflicts.coverage_pairs, &conflicts.movement_pairs, &conflicts.move_cover_pairs})
    for (const auto& [a, b] : *set) push(checks, a, b);
  for (std::size_t p1 = 0; p1 < paths.size(); ++p1)
    for (std::size_t p2 = p1 + 1; p2 < paths.size(); ++p2)
      for (std::size_t j1 = 0; j1 < paths[p1].size(); ++j1)
        for (std::size_t j2 = 0; j2 < paths[p2].size(); ++j2)
          push(overlaps, {p1, j1, IntervalKind::movement}, {p2, j2, IntervalKind::movement});

  BruteForceShifts out;
  std::vector<double> phi(paths.size(), 0.0);
  auto separated = [&](const Pair& q) {
    const double a0 = phi[q.p1] + q.s1, a1 = phi[q.p1] + q.e1;
    for (int k = -2; k <= 2; ++k) {
      const double b0 = phi[q.p2] + q.s2 + k, b1 = phi[q.p2] + q.e2 + k;
      if (!(b0 >= a1 + epsilon - 1e-9 || a0 >= b1 + epsilon - 1e-9)) return false;
    }
    return true;
  };
  auto overlap = [&](const Pair& q) {
    const double a0 = phi[q.p1] + q.s1, a1 = phi[q.p1] + q.e1;
    double total = 0.0;
    for (int k = -2; k <= 2; ++k) {
      const double b0 = phi[q.p2] + q.s2 + k, b1 = phi[q.p2] + q.e2 + k;
      total += std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
    }
    return total;
  };

  std::function<void(std::size_t, double)> descend = [&](std::size_t k, double partial) {
    if (k == agents.size()) {
      if (partial < out.objective) {
        out.feasible = true;
        out.objective = partial;
        out.phi = phi;
      }
      return;
    }
    const std::size_t count = k == 0 ? 1 : steps;
    for (std::size_t g = 0; g < count; ++g) {
      phi[agents[k]] = static_cast<double>(g) * grid.step;
      ++out.evaluations;
      bool ok = true;
      for (const Pair& q : checks[k])
        if (!separated(q)) {
          ok = false;
          break;
        }
      if (!ok) continue;
      double value = partial;
      for (const Pair& q : overlaps[k]) value += overlap(q);
      if (value >= out.objective) continue;
      descend(k + 1, value);
    }
    phi[agents[k]] = 0.0;
  };
  descend(0, 0.0);
  if (!out.feasible) out.phi.assign(paths.size(), 0.0);
  return out;
}

struct CensusOptions {
  CostFunction cost;
  PeriodRule period;
  CoverageOptions coverage;
  ScheduleOptions schedule;
  double horizon = 0.0;                 // seconds for the quality integral; 0 uses 10 of the longest feasible period
  double max_combinations = 1e5;
};

struct CensusEntry {
  std::vector<std::vector<int>> orders;  // per agent, empty when unused
  std::vector<Path> paths;
  CoverageAssignment assignment;
  std::vector<double> phi;
  double period = 0.0;
  double quality = 0.0;
};

struct Census {
  std::size_t combinations = 0;
  std::size_t coverage_feasible = 0;
  std::size_t feasible = 0;  // coverage and schedule both found
  std::vector<CensusEntry> entries;  // feasible ones
  double horizon = 0.0;
  std::optional<std::size_t> best;   // index into entries, lowest quality integral

  double best_quality() const { return best ? entries[*best].quality : kInf; }
};

namespace detail {

// Distinct closed tours through a set: rotations fixed by starting at the
// smallest id, reflections dropped by requiring order[1] < order.back().
inline std::vector<std::vector<int>> distinct_cycles(std::vector<int> set) {
  std::vector<std::vector<int>> out;
  if (set.size() <= 2) {
    out.push_back(set);
    return out;
  }
  std::sort(set.begin(), set.end());
  std::vector<int> rest(set.begin() + 1, set.end());
  do {
    if (rest.front() < rest.back()) {
      std::vector<int> cycle{set.front()};
      cycle.insert(cycle.end(), rest.begin(), rest.end());
      out.push_back(std::move(cycle));
    }
  } while (std::next_permutation(rest.begin(), rest.end()));
  return out;
}

inline std::vector<std::vector<int>> agent_tour_options(const Agent& a) {
  std::vector<std::vector<int>> out;
  const std::size_t k = a.reachable.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
    std::vector<int> set;
    for (std::size_t b = 0; b < k; ++b)
      if (mask >> b & 1) set.push_back(a.reachable[b]);
    if (set.empty()) {
      out.push_back({});
      continue;
    }
    for (auto& c : distinct_cycles(set)) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace detail

/// Tries every combination of per-agent visit sets and visiting orders that
/// covers all points. Each one gets a period, times and productions, and a
/// schedule; feasible ones are ranked by their quality integral over a common
/// horizon.
inline Census enumerate_tour_combinations(const Scenario& s, const CensusOptions& opt = {}) {
  if (s.agents.size() > 3 || s.points.size() > 6)
    throw OracleGuardError("enumerate_tour_combinations: at most 3 agents and 6 points");
  std::vector<std::vector<std::vector<int>>> options;
  double total = 1.0;
  for (const auto& a : s.agents) {
    options.push_back(detail::agent_tour_options(a));
    total *= static_cast<double>(options.back().size());
  }
  if (total > opt.max_combinations) throw OracleGuardError("enumerate_tour_combinations: too many combinations");

  Census out;
  std::vector<std::size_t> pick(s.agents.size(), 0);
  std::vector<int> seen(s.points.size(), 0);
  const std::function<void(std::size_t)> walk = [&](std::size_t i) {
    if (i == s.agents.size()) {
      if (std::count(seen.begin(), seen.end(), 0) > 0) return;
      ++out.combinations;
      CensusEntry e;
      for (std::size_t k = 0; k < s.agents.size(); ++k) {
        e.orders.push_back(options[k][pick[k]]);
        e.paths.push_back(make_path(s, s.agents[k], e.orders.back()));
      }
      e.period = apply_period(e.paths, opt.period);
      try {
        e.assignment = optimize_times_productions(s, e.paths, opt.cost, opt.coverage);
      } catch (const CoverageInfeasible&) {
        return;
      }
      ++out.coverage_feasible;
      const TeamSchedule ts = solve_schedule(s, e.paths, e.assignment, opt.schedule);
      if (!ts.has_solution()) return;
      ++out.feasible;
      e.paths = ts.paths;
      e.assignment = ts.assignment;
      e.phi = ts.phi;
      out.entries.push_back(std::move(e));
      return;
    }
    for (std::size_t c = 0; c < options[i].size(); ++c) {
      pick[i] = c;
      for (int q : options[i][c]) ++seen[static_cast<std::size_t>(q)];
      walk(i + 1);
      for (int q : options[i][c]) --seen[static_cast<std::size_t>(q)];
    }
  };
  walk(0);

  out.horizon = opt.horizon;
  if (!(out.horizon > 0.0))
    for (const auto& e : out.entries) out.horizon = std::max(out.horizon, 10.0 * e.period);
  for (std::size_t k = 0; k < out.entries.size(); ++k) {
    auto& e = out.entries[k];
    const TeamPlan plan(s, e.paths, e.assignment, e.phi, e.period);
    e.quality = quality_integral(plan, out.horizon / e.period);
    if (!out.best || e.quality < out.entries[*out.best].quality) out.best = k;
  }
  return out;
}

}  // namespace pcov
