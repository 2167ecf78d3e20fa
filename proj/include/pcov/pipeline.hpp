#pragma once
// End-to-end planner: tours, times and productions, shortening, schedule,
// replay. Stages are also callable one by one.

#include <chrono>
#include <optional>
#include <string>

#include "pcov/coverage.hpp"
#include "pcov/oracle.hpp"
#include "pcov/schedule.hpp"
#include "pcov/simulator.hpp"

namespace pcov {

struct PipelineConfig {
  CostKind cost_fn = CostKind::f1;
  double theta_m_max = 0.3;
  double epsilon = 1e-3;
  double big_m = 10.0;
  std::optional<double> period_override;
  std::uint64_t seed = 0;
  bool reverse_on_infeasible = true;
  bool allow_shared_coverage = false;
  std::optional<double> oracle_grid;
  int periods = 10;  // simulated periods
  std::size_t node_limit = 5000;

  PeriodRule period_rule() const { return {theta_m_max, period_override}; }

  CoverageOptions coverage_options() const {
    CoverageOptions o;
    o.allow_shared_coverage = allow_shared_coverage;
    return o;
  }

  ScheduleOptions schedule_options() const {
    ScheduleOptions o;
    o.epsilon = epsilon;
    o.big_m = big_m;
    o.reverse_on_infeasible = reverse_on_infeasible;
    o.mip.node_limit = node_limit;
    return o;
  }
};

/// Cost function for a scenario; f5/f6 fall back to unit weights for pairs
/// the scenario leaves out.
inline CostFunction make_cost(const Scenario& s, CostKind kind) {
  CostFunction f;
  f.kind = kind;
  if (kind == CostKind::f5 || kind == CostKind::f6)
    for (const auto& a : s.agents)
      for (int q : a.reachable) {
        const auto it = s.weights.find({a.id, q});
        f.weights[{a.id, q}] = it == s.weights.end() ? 1.0 : it->second;
      }
  return f;
}

enum class Stage { load, plan, optimize, shorten, schedule, simulate, done };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::load: return "load";
    case Stage::plan: return "plan";
    case Stage::optimize: return "optimize";
    case Stage::shorten: return "shorten";
    case Stage::schedule: return "schedule";
    case Stage::simulate: return "simulate";
    case Stage::done: return "done";
  }
  return "?";
}

struct PlanStage {
  std::vector<Path> paths;
  double period = 0.0;
  FeasibilityReport feasibility;
};

inline PlanStage plan_stage(const Scenario& s, const PipelineConfig& cfg) {
  PlanStage out;
  out.paths = plan_initial_tours(s);
  out.period = apply_period(out.paths, cfg.period_rule());
  std::vector<double> times;
  for (const auto& p : out.paths) times.push_back(p.tour_time);
  out.feasibility = necessary_feasibility_check(s, times, out.period);
  return out;
}

struct OptimizeStage {
  CoverageAssignment initial;  // before shortening
  ShortenResult shortened;
};

/// Throws CoverageInfeasible when no times and productions meet the demand.
inline OptimizeStage optimize_stage(const Scenario& s, const std::vector<Path>& paths, double period,
                                    const PipelineConfig& cfg) {
  const CostFunction f = make_cost(s, cfg.cost_fn);
  OptimizeStage out;
  out.initial = optimize_times_productions(s, paths, f, cfg.coverage_options());
  out.shortened = shorten_paths(s, paths, out.initial, f, cfg.period_rule(), period, cfg.coverage_options());
  return out;
}

struct OracleCheck {
  bool ran = false;
  std::string skipped;  // reason when not run
  bool feasible = false;
  double objective = 0.0;
  double gap = 0.0;  // solver objective minus grid objective
};

inline OracleCheck oracle_check(const TeamSchedule& ts, double grid, double epsilon) {
  OracleCheck out;
  try {
    const auto b = brute_force_shifts(ts.conflicts, ts.paths, ts.timeline, epsilon, {grid, 1e8});
    out.ran = true;
    out.feasible = b.feasible;
    out.objective = b.objective;
    out.gap = ts.has_solution() && b.feasible ? ts.objective - b.objective : 0.0;
  } catch (const OracleGuardError& e) {
    out.skipped = e.what();
  }
  return out;
}

struct PipelineResult {
  Stage reached = Stage::load;  // last stage that completed
  std::string error;
  PlanStage plan;
  std::optional<OptimizeStage> optimize;
  std::optional<TeamSchedule> schedule;
  std::optional<SimulationTrace> trace;
  std::optional<Metrics> metrics;
  std::optional<CollisionReport> collisions;
  std::optional<ValidationReport> validation;
  std::optional<OracleCheck> oracle;
  std::map<std::string, double> seconds;  // wall time per stage

  bool ok() const { return reached == Stage::done; }
  double period() const { return optimize ? optimize->shortened.period : plan.period; }
};

/// Runs every stage, stopping at the first one that fails. Failures are
/// reported in the result, not thrown.
inline PipelineResult run_pipeline(const Scenario& s, const PipelineConfig& cfg, bool record_samples = true) {
  PipelineResult r;
  using clock = std::chrono::steady_clock;
  auto timed = [&](const char* name, auto&& fn) {
    const auto t0 = clock::now();
    fn();
    r.seconds[name] = std::chrono::duration<double>(clock::now() - t0).count();
  };
  r.reached = Stage::load;

  timed("plan", [&] { r.plan = plan_stage(s, cfg); });
  if (!r.plan.feasibility.ok()) {
    r.error = "necessary conditions fail: " + r.plan.feasibility.describe();
    return r;
  }
  r.reached = Stage::plan;

  try {
    timed("optimize", [&] { r.optimize = optimize_stage(s, r.plan.paths, r.plan.period, cfg); });
  } catch (const CoverageInfeasible& e) {
    r.error = e.what();
    return r;
  }
  r.reached = Stage::shorten;

  const auto& sr = r.optimize->shortened;
  const ScheduleOptions sopt = cfg.schedule_options();
  timed("schedule", [&] { r.schedule = solve_schedule(s, sr.paths, sr.assignment, sopt); });
  if (cfg.oracle_grid) r.oracle = oracle_check(*r.schedule, *cfg.oracle_grid, cfg.epsilon);
  if (!r.schedule->has_solution()) {
    r.error = std::string("schedule ") + to_string(r.schedule->status) + ": " + r.schedule->remedy;
    return r;
  }
  r.validation = validate_schedule(*r.schedule, cfg.epsilon);
  r.reached = Stage::schedule;

  timed("simulate", [&] {
    SimulationOptions so;
    so.periods = cfg.periods;
    so.epsilon = cfg.epsilon;
    so.record_samples = record_samples;
    r.trace = simulate(s, *r.schedule, sr.period, so);
    r.collisions = r.trace->collisions;
    r.metrics = compute_metrics(*r.trace, sr.iterations);
  });
  r.reached = Stage::done;
  return r;
}

}  // namespace pcov
