#pragma once
// Coverage times and productions for fixed tours, path shortening and the
// per-agent timeline inside one normalized period.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcov/lp.hpp"
#include "pcov/scenario.hpp"
#include "pcov/tour.hpp"

namespace pcov {

enum class CostKind { f1, f2, f3, f4, f5, f6 };

inline const char* to_string(CostKind k) {
  static const char* names[] = {"f1", "f2", "f3", "f4", "f5", "f6"};
  return names[static_cast<int>(k)];
}

inline CostKind parse_cost_kind(const std::string& name) {
  for (int k = 0; k < 6; ++k)
    if (name == to_string(static_cast<CostKind>(k))) return static_cast<CostKind>(k);
  throw std::invalid_argument("unknown cost function '" + name + "' (expected f1..f6)");
}

struct CostFunction {
  CostKind kind = CostKind::f1;
  std::map<std::pair<int, int>, double> weights;  // (agent, point) -> omega, f5/f6 only
};

/// theta[p][j] and rho[p][j] belong to paths[p].order[j].
struct CoverageAssignment {
  std::vector<std::vector<double>> theta;
  std::vector<std::vector<double>> rho;
  double cost_value = 0.0;
  std::vector<double> cost_history;  // cost after each alternating round
};

struct CoverageOptions {
  bool allow_shared_coverage = false;  // drops the per-point time limit
  double improvement_tolerance = 1e-8;
  int max_rounds = 50;
  // Lower bound on the normalized home distance used by f3/f4, so a point at
  // the agent's home does not get an infinite weight.
  double distance_floor = 0.1;
  LpOptions lp;
};

class CoverageInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct PairCost {
  double time = 0.0;  // coefficient of theta
  double rate = 0.0;  // coefficient of rho
};

inline Point2 reference_position(const Scenario& s, const Agent& a) {
  if (a.home) return *a.home;
  return s.point(a.reachable.front()).position;
}

inline double normalized_home_distance(const Scenario& s, const Agent& a, int point, double floor) {
  const Point2 ref = reference_position(s, a);
  double reach = 0.0;
  for (int q : a.reachable) reach = std::max(reach, distance(ref, s.point(q).position));
  if (reach <= 0.0) return 1.0;
  return std::max(distance(ref, s.point(point).position) / reach, floor);
}

inline std::vector<std::vector<PairCost>> cost_coefficients(const CostFunction& cost, const Scenario& s,
                                                            const std::vector<Path>& paths, double distance_floor) {
  std::vector<std::vector<PairCost>> out(paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const Agent& a = s.agent(paths[p].agent_id);
    for (int q : paths[p].order) {
      const double rmax = a.max_rate(q);
      const double demand = s.point(q).required_rate;
      double omega = 1.0;
      if (cost.kind == CostKind::f5 || cost.kind == CostKind::f6) {
        auto it = cost.weights.find({a.id, q});
        if (it == cost.weights.end())
          throw std::invalid_argument(std::string(to_string(cost.kind)) + " needs a weight for agent " +
                                      std::to_string(a.id) + " point " + std::to_string(q));
        omega = it->second;
      }
      PairCost c;
      switch (cost.kind) {
        case CostKind::f1: c = {-1.0, 1.0 / rmax}; break;
        case CostKind::f2: c = {0.0, 1.0 / rmax}; break;
        case CostKind::f3: c = {-1.0 / normalized_home_distance(s, a, q, distance_floor), 1.0 / rmax}; break;
        case CostKind::f4: c = {-1.0 / normalized_home_distance(s, a, q, distance_floor), demand / (rmax * rmax)}; break;
        case CostKind::f5: c = {-omega, 0.0}; break;
        case CostKind::f6: c = {-omega, demand / (rmax * rmax)}; break;
      }
      out[p].push_back(c);
    }
  }
  return out;
}

// Flattened (path, tour index) pairs.
struct PairIndex {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::map<int, std::vector<std::size_t>> by_point;
  std::vector<std::vector<std::size_t>> by_path;

  explicit PairIndex(const std::vector<Path>& paths) : by_path(paths.size()) {
    for (std::size_t p = 0; p < paths.size(); ++p)
      for (std::size_t j = 0; j < paths[p].order.size(); ++j) {
        by_point[paths[p].order[j]].push_back(pairs.size());
        by_path[p].push_back(pairs.size());
        pairs.push_back({p, j});
      }
  }
};

inline std::string infeasibility_detail(const Scenario& s, const std::vector<Path>& paths, const PairIndex& idx) {
  std::ostringstream os;
  bool named = false;
  for (const auto& pt : s.points) {
    auto it = idx.by_point.find(pt.id);
    double deliverable = 0.0;
    if (it != idx.by_point.end())
      for (std::size_t k : it->second) {
        const auto [p, j] = idx.pairs[k];
        const Agent& a = s.agent(paths[p].agent_id);
        deliverable += a.max_rate(pt.id) * std::clamp(1.0 - paths[p].normalized_moving_time, 0.0, 1.0);
      }
    if (deliverable < pt.required_rate) {
      os << "point " << pt.id << ": required rate " << pt.required_rate << " exceeds deliverable " << deliverable
         << " at max production; ";
      named = true;
    }
  }
  for (std::size_t p = 0; p < paths.size(); ++p)
    if (paths[p].normalized_moving_time >= 1.0) {
      os << "agent " << paths[p].agent_id << ": no time left for coverage (normalized moving time "
         << paths[p].normalized_moving_time << "); ";
      named = true;
    }
  if (!named) os << "agent time budgets cannot serve every point's demand at once";
  return os.str();
}

}  // namespace detail

inline double evaluate_cost(const CostFunction& cost, const CoverageAssignment& x, const Scenario& s,
                            const std::vector<Path>& paths, double distance_floor = CoverageOptions{}.distance_floor) {
  if (x.theta.size() != paths.size() || x.rho.size() != paths.size())
    throw std::invalid_argument("evaluate_cost: assignment does not match paths");
  const auto coef = detail::cost_coefficients(cost, s, paths, distance_floor);
  double total = 0.0;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    if (x.theta[p].size() != paths[p].size() || x.rho[p].size() != paths[p].size())
      throw std::invalid_argument("evaluate_cost: assignment does not match path of agent " +
                                  std::to_string(paths[p].agent_id));
    for (std::size_t j = 0; j < paths[p].size(); ++j)
      total += coef[p][j].time * x.theta[p][j] + coef[p][j].rate * x.rho[p][j];
  }
  return total;
}

/// Alternating search: rho starts at max production; each round solves the
/// LP in theta with rho fixed (demand as a lower bound), then the LP in rho
/// with theta fixed (demand as an equality), then re-times with delivered
/// amounts fixed. Ties in the LPs are broken in favour of the next step:
/// longer times weighted by the production cost at stake, and lower
/// normalized production when production is free.
inline CoverageAssignment optimize_times_productions(const Scenario& s, const std::vector<Path>& paths,
                                                     const CostFunction& cost, const CoverageOptions& opt = {}) {
  const detail::PairIndex idx(paths);
  const auto coef = detail::cost_coefficients(cost, s, paths, opt.distance_floor);
  const std::size_t n = idx.pairs.size();
  for (const auto& pt : s.points)
    if (!idx.by_point.count(pt.id)) throw CoverageInfeasible("point " + std::to_string(pt.id) + " is on no tour");

  auto pc = [&](std::size_t k) { return coef[idx.pairs[k].first][idx.pairs[k].second]; };
  auto rmax = [&](std::size_t k) {
    const auto [p, j] = idx.pairs[k];
    return s.agent(paths[p].agent_id).max_rate(paths[p].order[j]);
  };

  std::vector<double> theta(n, 0.0), rho(n);
  for (std::size_t k = 0; k < n; ++k) rho[k] = rmax(k);

  // Lexicographic solve: primary objective, then the secondary one restricted
  // to the primary optimum.
  auto lexicographic = [&](LinearProgram lp, const std::vector<double>& secondary) {
    LpSolution first = solve_lp(lp, opt.lp);
    if (first.status != LpStatus::optimal) return first;
    if (std::all_of(secondary.begin(), secondary.end(), [](double v) { return v == 0.0; })) return first;
    lp.ub_matrix.push_back(lp.objective);
    lp.ub_rhs.push_back(first.objective_value + 1e-9 * std::max(1.0, std::abs(first.objective_value)));
    lp.objective = secondary;
    LpSolution second = solve_lp(lp, opt.lp);
    return second.status == LpStatus::optimal ? second : first;
  };

  // Time-sharing rows over the first n columns of an LP with `cols` columns:
  // per-point limit (unless shared coverage is allowed) and per-agent budget.
  auto add_time_rows = [&](LinearProgram& lp, std::size_t cols) {
    for (const auto& [q, ks] : idx.by_point) {
      if (opt.allow_shared_coverage || ks.size() < 2) continue;
      std::vector<double> share(cols, 0.0);
      for (std::size_t k : ks) share[k] = 1.0;
      lp.ub_matrix.push_back(share);
      lp.ub_rhs.push_back(1.0);
    }
    for (std::size_t p = 0; p < paths.size(); ++p) {
      if (idx.by_path[p].empty()) continue;
      std::vector<double> row(cols, 0.0);
      for (std::size_t k : idx.by_path[p]) row[k] = 1.0;
      lp.ub_matrix.push_back(row);
      lp.ub_rhs.push_back(1.0 - paths[p].normalized_moving_time);
    }
  };

  auto theta_step = [&]() {
    LinearProgram lp;
    std::vector<double> secondary(n);
    for (std::size_t k = 0; k < n; ++k) {
      lp.add_variable(pc(k).time, 0.0, 1.0);
      secondary[k] = -pc(k).rate * rho[k];
    }
    for (const auto& [q, ks] : idx.by_point) {
      std::vector<double> row(n, 0.0);
      for (std::size_t k : ks) row[k] = -rho[k];
      lp.ub_matrix.push_back(row);
      lp.ub_rhs.push_back(-s.point(q).required_rate);
    }
    add_time_rows(lp, n);
    return lexicographic(std::move(lp), secondary);
  };

  // Times with the delivered amounts e = rho * theta held fixed. The cost
  // sum(c_t theta + c_r e / theta) is convex in theta and rho <= rho_max
  // becomes theta >= e / rho_max, so this step can trade production for
  // time, which the fixed-production step cannot. Solved by tangent cuts.
  auto energy_step = [&](double current) {
    std::vector<double> e(n), w(n);
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> aux(n, none);
    LinearProgram lp;
    for (std::size_t k = 0; k < n; ++k) {
      e[k] = theta[k] * rho[k];
      w[k] = pc(k).rate * e[k];
      lp.add_variable(pc(k).time, std::min(theta[k], e[k] / rmax(k)), 1.0);
    }
    for (std::size_t k = 0; k < n; ++k)
      if (w[k] > 0.0) aux[k] = lp.add_variable(1.0, 0.0, kInf);
    const std::size_t cols = lp.num_vars();
    add_time_rows(lp, cols);
    auto cut = [&](std::size_t k, double at) {
      // aux >= w (2 / at - theta / at^2)
      // Scaled so the largest coefficient is one; slopes reach 1/e.
      const double slope = w[k] / (at * at), scale = std::max(1.0, slope);
      std::vector<double> row(cols, 0.0);
      row[aux[k]] = -1.0 / scale;
      row[k] = -slope / scale;
      lp.ub_matrix.push_back(row);
      lp.ub_rhs.push_back(-2.0 * w[k] / at / scale);
    };
    for (std::size_t k = 0; k < n; ++k) {
      if (aux[k] == none) continue;
      const double lo = lp.lower[k];
      for (int g = 0; g <= 6; ++g) cut(k, lo * std::pow(1.0 / lo, g / 6.0));
      cut(k, theta[k]);
    }
    LpSolution sol;
    for (int it = 0; it < 60; ++it) {
      try {
        sol = solve_lp(lp, opt.lp);
      } catch (const LpNumericalError&) {
        return false;  // an improvement step only; keep the current iterate
      }
      if (sol.status != LpStatus::optimal) return false;
      bool added = false;
      for (std::size_t k = 0; k < n; ++k) {
        if (aux[k] == none) continue;
        const double exact = w[k] / sol.values[k];
        if (exact - sol.values[aux[k]] > 1e-11 * std::max(1.0, exact)) {
          cut(k, sol.values[k]);
          added = true;
        }
      }
      if (!added) break;
    }
    std::vector<double> t(sol.values.begin(), sol.values.begin() + static_cast<std::ptrdiff_t>(n)), r(n, 0.0);
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      r[k] = t[k] > 0.0 ? std::min(rmax(k), e[k] / t[k]) : 0.0;
      c += pc(k).time * t[k] + pc(k).rate * r[k];
    }
    if (!(c < current)) return false;
    theta = std::move(t);
    rho = std::move(r);
    return true;
  };

  auto rho_step = [&]() {
    LinearProgram lp;
    std::vector<double> secondary(n);
    for (std::size_t k = 0; k < n; ++k) {
      lp.add_variable(pc(k).rate, 0.0, rmax(k));
      secondary[k] = 1.0 / rmax(k);
    }
    for (const auto& [q, ks] : idx.by_point) {
      std::vector<double> row(n, 0.0);
      for (std::size_t k : ks) row[k] = theta[k];
      lp.eq_matrix.push_back(row);
      lp.eq_rhs.push_back(s.point(q).required_rate);
    }
    const bool production_free = std::all_of(lp.objective.begin(), lp.objective.end(), [](double v) { return v == 0.0; });
    return lexicographic(std::move(lp), production_free ? secondary : std::vector<double>(n, 0.0));
  };

  CoverageAssignment out;
  auto current_cost = [&]() {
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) c += pc(k).time * theta[k] + pc(k).rate * rho[k];
    return c;
  };

  for (int round = 0; round < opt.max_rounds; ++round) {
    const auto saved_theta = theta, saved_rho = rho;
    const LpSolution ts = theta_step();
    if (ts.status != LpStatus::optimal) {
      if (round == 0)
        throw CoverageInfeasible("no coverage times satisfy the demand even at max production: " +
                                 detail::infeasibility_detail(s, paths, idx));
      throw std::logic_error("optimize_times_productions: time step lost feasibility in round " + std::to_string(round));
    }
    theta = ts.values;
    const LpSolution rs = rho_step();
    if (rs.status != LpStatus::optimal)
      throw std::logic_error("optimize_times_productions: production step infeasible in round " + std::to_string(round));
    rho = rs.values;
    energy_step(current_cost());
    const double c = current_cost();
    if (!out.cost_history.empty() && c > out.cost_history.back()) {
      // Rounding in the lexicographic tie-break can cost a hair; keep the
      // previous iterate so the sequence never goes up.
      theta = saved_theta;
      rho = saved_rho;
      break;
    }
    const bool converged = !out.cost_history.empty() && out.cost_history.back() - c < opt.improvement_tolerance;
    out.cost_history.push_back(c);
    if (converged) break;
  }

  out.theta.resize(paths.size());
  out.rho.resize(paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t k : idx.by_path[p]) {
      out.theta[p].push_back(theta[k]);
      out.rho[p].push_back(rho[k]);
    }
  out.cost_value = out.cost_history.back();
  return out;
}

/// How the period follows the tours: derived from the longest tour, or fixed.
struct PeriodRule {
  double theta_m_max = 0.3;
  std::optional<double> period_override;
};

inline double apply_period(std::vector<Path>& paths, const PeriodRule& rule, double fallback = 1.0) {
  if (rule.period_override) {
    set_period(paths, *rule.period_override);
    return *rule.period_override;
  }
  return compute_period(paths, rule.theta_m_max, fallback);
}

struct ShortenResult {
  std::vector<Path> paths;
  CoverageAssignment assignment;
  double period = 0.0;
  int iterations = 1;       // rounds that removed points, at least 1
  int removed_points = 0;   // (agent, point) visits dropped in total
  bool rolled_back = false; // a re-optimization failed; last feasible iterate kept
  bool period_held = false; // some round kept the previous period to stay feasible
};

/// Repeatedly drops visits with zero coverage time, re-plans the shrunken
/// tours, recomputes the period and re-optimizes until nothing is removed.
inline ShortenResult shorten_paths(const Scenario& s, std::vector<Path> paths, CoverageAssignment assignment,
                                   const CostFunction& cost, const PeriodRule& rule, double period,
                                   const CoverageOptions& opt = {}, double zero_threshold = 1e-9) {
  ShortenResult out{paths, assignment, period, 1, 0, false, false};
  int rounds = 0;
  std::size_t visits = 0;
  for (const auto& p : paths) visits += p.size();
  for (std::size_t guard = 0; guard <= visits; ++guard) {
    std::vector<Path> next;
    int removed = 0;
    for (std::size_t p = 0; p < out.paths.size(); ++p) {
      const Path& old = out.paths[p];
      std::vector<int> kept;
      for (std::size_t j = 0; j < old.size(); ++j)
        if (out.assignment.theta[p][j] >= zero_threshold) kept.push_back(old.order[j]);
      removed += static_cast<int>(old.size() - kept.size());
      const Agent& agent = s.agent(old.agent_id);
      if (kept.size() == old.size()) {
        next.push_back(old);
      } else if (kept.empty()) {
        next.push_back(make_path(s, agent, {}));
      } else {
        std::vector<int> shortcut = kept;
        two_opt(s, shortcut);
        const Path fresh = plan_tour(s, agent, kept);
        next.push_back(tour_length(s, shortcut) < fresh.length() - 1e-12 ? make_path(s, agent, shortcut) : fresh);
      }
    }
    if (removed == 0) break;
    double next_period = apply_period(next, rule, out.period);
    CoverageAssignment next_assignment;
    try {
      next_assignment = optimize_times_productions(s, next, cost, opt);
    } catch (const CoverageInfeasible&) {
      // A shorter period can starve agents whose tours did not shrink. Keeping
      // the old period only frees time, so the previous iterate stays feasible.
      next_period = out.period;
      set_period(next, next_period);
      try {
        next_assignment = optimize_times_productions(s, next, cost, opt);
        out.period_held = true;
      } catch (const CoverageInfeasible&) {
        out.rolled_back = true;
        break;
      }
    }
    ++rounds;
    out.removed_points += removed;
    out.paths = std::move(next);
    out.assignment = std::move(next_assignment);
    out.period = next_period;
  }
  out.iterations = std::max(1, rounds);
  return out;
}

struct AgentTimeline {
  std::vector<double> arrival;     // a_j
  std::vector<double> departure;   // d_j
  std::vector<double> move_start;  // delta_j = d_j
  std::vector<double> move_end;    // alpha_j = a_{j+1}; the last one is 1
};

struct Timeline {
  std::vector<AgentTimeline> agents;  // parallel to the paths
};

/// Normalized duration of each leg of a path.
inline std::vector<double> leg_fractions(const Path& p) {
  std::vector<double> out(p.size(), 0.0);
  const double len = p.length();
  if (len <= 0.0) return out;
  for (std::size_t j = 0; j < p.size(); ++j) out[j] = p.leg_lengths[j] / len * p.normalized_moving_time;
  return out;
}

/// Sequential layout from a_1 = 0; the final movement stretches to the end of
/// the period and absorbs the slack.
inline Timeline build_timeline(const std::vector<Path>& paths, const CoverageAssignment& x) {
  Timeline tl;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    AgentTimeline at;
    const auto legs = leg_fractions(paths[p]);
    double t = 0.0;
    for (std::size_t j = 0; j < paths[p].size(); ++j) {
      at.arrival.push_back(t);
      t += x.theta[p][j];
      at.departure.push_back(t);
      at.move_start.push_back(t);
      if (j + 1 < paths[p].size()) {
        t += legs[j];
        at.move_end.push_back(t);
      } else {
        if (t + legs[j] > 1.0 + 1e-9)
          throw std::logic_error("build_timeline: agent " + std::to_string(paths[p].agent_id) +
                                 " needs more than one period (" + std::to_string(t + legs[j]) + ")");
        at.move_end.push_back(1.0);
      }
    }
    tl.agents.push_back(std::move(at));
  }
  return tl;
}

}  // namespace pcov
