#include <random>

#include <gtest/gtest.h>

#include "pcov/simulator.hpp"
#include "support/instances.hpp"

using namespace pcov;

namespace {

// One agent per point, parked on it for the whole period.
Scenario stationary(const std::vector<Point2>& spots, double radius, double rate, double max_rate) {
  Scenario s;
  for (std::size_t i = 0; i < spots.size(); ++i) {
    s.points.push_back({static_cast<int>(i), spots[i], rate});
    Agent a;
    a.id = static_cast<int>(i);
    a.radius = radius;
    a.speed = 1.0;
    a.reachable = {static_cast<int>(i)};
    a.max_production[static_cast<int>(i)] = max_rate;
    s.agents.push_back(a);
  }
  validate(s);
  return s;
}

struct Plan {
  Scenario s;
  std::vector<Path> paths;
  CoverageAssignment x;
  double period = 0.0;
  int iterations = 1;
  TeamSchedule sched;
};

std::optional<Plan> pipeline(std::mt19937& rng, int agents, int points) {
  fixtures::InstanceShape shape;
  shape.agents = agents;
  shape.points = points;
  Plan out;
  out.s = fixtures::random_instance(rng, shape);
  auto paths = plan_initial_tours(out.s);
  const double period = compute_period(paths, 0.3);
  CostFunction f;
  try {
    const auto x = optimize_times_productions(out.s, paths, f);
    auto sr = shorten_paths(out.s, paths, x, f, PeriodRule{}, period);
    out.paths = sr.paths;
    out.x = sr.assignment;
    out.period = sr.period;
    out.iterations = sr.iterations;
  } catch (const CoverageInfeasible&) {
    return std::nullopt;
  }
  out.sched = solve_schedule(out.s, out.paths, out.x);
  if (!out.sched.has_solution()) return std::nullopt;
  return out;
}

}  // namespace

TEST(Simulator, ConstantCoverage) {
  const Scenario s = stationary({{0, 0}}, 1.0, 4.0, 4.0);
  std::vector<Path> paths{make_path(s, s.agents[0], {0})};
  CoverageAssignment x{{{1.0}}, {{4.0}}, 0.0, {}};
  const double T = 50.0;
  const auto trace = simulate(s, paths, x, {0.0}, T, {.periods = 3});
  EXPECT_DOUBLE_EQ(trace.plan.delivered(0, T), 4.0 * T);
  EXPECT_DOUBLE_EQ(trace.plan.delivered(0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(trace.plan.rate(0, 17.0), 4.0);
  EXPECT_NEAR(quality_integral(trace.plan, 3), 0.0, 1e-9);
  const Metrics m = compute_metrics(trace, 1);
  EXPECT_EQ(m.movements_per_agent, 0.0);
  EXPECT_EQ(m.max_uncovered_time, 0.0);
  EXPECT_NEAR(m.homogeneity, 0.0, 1e-12);
  EXPECT_NEAR(m.max_normalized_production, 1.0, 1e-12);
  EXPECT_TRUE(check_collisions(trace, {1.0}).ok());
}

TEST(Simulator, PartialCoverageAcrossTheWrap) {
  const Scenario s = stationary({{0, 0}}, 1.0, 1.0, 4.0);
  std::vector<Path> paths{make_path(s, s.agents[0], {0})};
  CoverageAssignment x{{{0.25}}, {{4.0}}, 0.0, {}};
  const TeamPlan plan(s, paths, x, {0.9}, 1.0);
  // covers [0.9, 1.15) of every period
  EXPECT_NEAR(plan.delivered(0, 0.15), 4.0 * 0.15, 1e-12);
  EXPECT_NEAR(plan.delivered(0, 0.5), 4.0 * 0.15, 1e-12);
  EXPECT_NEAR(plan.delivered(0, 1.0), 4.0 * 0.25, 1e-12);
  EXPECT_NEAR(plan.delivered(0, 2.5), 4.0 * 0.4 + 4.0 * 0.25, 1e-12);
  EXPECT_EQ(plan.rate(0, 0.95), 4.0);
  EXPECT_EQ(plan.rate(0, 0.5), 0.0);
  EXPECT_NEAR(max_uncovered_time(plan, 0), 0.75, 1e-12);
}

TEST(Simulator, QualityIntegralMatchesQuadrature) {
  const Scenario s = stationary({{0, 0}}, 1.0, 1.0, 4.0);
  std::vector<Path> paths{make_path(s, s.agents[0], {0})};
  CoverageAssignment x{{{0.25}}, {{4.0}}, 0.0, {}};
  const TeamPlan plan(s, paths, x, {0.3}, 2.0);
  const int n = 200000;
  const double h = 4.0 / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * h;
    const double g = plan.required(0, t) - plan.delivered(0, t);
    sum += g * g * h;
  }
  EXPECT_NEAR(quality_integral(plan, 2), sum, 1e-6 * sum);
}

TEST(Simulator, StationaryAgentsApart) {
  const Scenario s = stationary({{0, 0}, {3, 0}}, 1.0, 1.0, 1.0);
  std::vector<Path> paths{make_path(s, s.agents[0], {0}), make_path(s, s.agents[1], {1})};
  CoverageAssignment x{{{1.0}, {1.0}}, {{1.0}, {1.0}}, 0.0, {}};
  const auto trace = simulate(s, paths, x, {0.0, 0.0}, 10.0, {.periods = 1});
  EXPECT_TRUE(check_collisions(trace, {1.0, 1.0}).ok());
  EXPECT_FALSE(check_collisions(trace, {2.0, 2.0}).ok());
  EXPECT_NEAR(trace.pair_min_distance(0, 1), 3.0, 1e-12);
}

TEST(Simulator, CoarseStepRejected) {
  const Scenario s = stationary({{0, 0}}, 1.0, 1.0, 1.0);
  std::vector<Path> paths{make_path(s, s.agents[0], {0})};
  CoverageAssignment x{{{1.0}}, {{1.0}}, 0.0, {}};
  EXPECT_THROW(simulate(s, paths, x, {0.0}, 10.0, {.periods = 1, .dt = 1.0}), std::invalid_argument);
  EXPECT_THROW(simulate(s, paths, x, {0.0}, 10.0, {.periods = 0}), std::invalid_argument);
}

TEST(Simulator, HomogeneityVanishesAtCapacityShares) {
  const Scenario s = stationary({{0, 0}, {100, 0}}, 1.0, 2.0, 8.0);
  std::vector<Path> paths{make_path(s, s.agents[0], {0}), make_path(s, s.agents[1], {1})};
  CoverageAssignment x{{{0.25}, {0.25}}, {{8.0}, {8.0}}, 0.0, {}};
  EXPECT_NEAR(homogeneity(s, paths, x), 0.0, 1e-15);
  x.theta[1][0] = 0.5;
  EXPECT_NEAR(homogeneity(s, paths, x), 0.0625, 1e-15);
}

TEST(Simulator, MovingAgentFollowsItsTour) {
  Scenario s;
  s.points = {{0, {0, 0}, 1.0}, {1, {10, 0}, 1.0}};
  Agent a;
  a.radius = 1.0;
  a.speed = 1.0;
  a.reachable = {0, 1};
  a.max_production = {{0, 5.0}, {1, 5.0}};
  s.agents.push_back(a);
  validate(s);
  std::vector<Path> paths{make_path(s, a, {0, 1})};
  set_period(paths, 40.0);  // 20 s of motion: theta^m = 0.5, legs of 0.25
  CoverageAssignment x{{{0.25, 0.25}}, {{4.0, 4.0}}, 0.0, {}};
  const TeamPlan plan(s, paths, x, {0.0}, 40.0);
  // coverage [0, .25), move [.25, .5), coverage [.5, .75), final move [.75, 1)
  EXPECT_EQ(plan.phase(0, 0.1).kind, IntervalKind::coverage);
  const auto mid = plan.position(0, 0.375);
  ASSERT_TRUE(mid);
  EXPECT_NEAR(mid->x, 5.0, 1e-12);
  const auto back = plan.position(0, 0.875);
  EXPECT_NEAR(back->x, 5.0, 1e-12);
  const auto trace = simulate(s, paths, x, {0.0}, 40.0, {.periods = 1});
  const Metrics m = compute_metrics(trace, 1);
  EXPECT_EQ(m.movements_per_agent, 2.0);
  EXPECT_NEAR(m.total_coverage_fraction, 1.0, 1e-12);
  EXPECT_NEAR(m.max_uncovered_time, 0.75, 1e-12);
}

TEST(SimulatorProperty, PeriodicObjectiveAndCleanReplay) {
  std::mt19937 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 25 && checked < 8; ++trial) {
    auto plan = pipeline(rng, 2 + trial % 3, 3 + trial % 5);
    if (!plan) continue;
    ++checked;
    const auto trace = simulate(plan->s, plan->sched, plan->period, {.periods = 6});
    const double T = plan->period;
    double delivered = 0.0, required = 0.0;
    for (const auto& q : plan->s.points) {
      for (int k = 1; k <= 5; ++k) {
        const double inc = trace.plan.delivered(q.id, (k + 1) * T) - trace.plan.delivered(q.id, k * T);
        EXPECT_NEAR(inc, q.required_rate * T, 1e-6 * q.required_rate * T) << "trial " << trial << " point " << q.id;
      }
      delivered += trace.plan.delivered(q.id, T);
      required += q.required_rate * T;
    }
    EXPECT_NEAR(delivered, required, 1e-6 * required);
    const auto report = check_collisions(trace, path_radii(plan->s, plan->sched.paths));
    EXPECT_TRUE(report.ok()) << "trial " << trial << " first collision at t=" << report.collisions.front().time;
    const Metrics m = compute_metrics(trace, plan->iterations);
    EXPECT_NEAR(m.simultaneous_motion, plan->sched.objective, 1e-6) << "trial " << trial;
    EXPECT_NEAR(m.simultaneous_motion, movement_overlap_sum(plan->sched.paths, plan->sched.timeline, plan->sched.phi),
                1e-9);
    EXPECT_GE(m.total_coverage_fraction, 0.0);
    EXPECT_LE(m.total_coverage_fraction, 1.0 + 1e-9);
    EXPECT_LE(m.max_normalized_production, 1.0 + 1e-9);
  }
  EXPECT_GE(checked, 5);
}

TEST(SimulatorProperty, FinerStepKeepsTheReplay) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto plan = pipeline(rng, 3, 5);
    if (!plan) continue;
    const double dt = 1e-3 * plan->period / 4.0;
    const auto coarse = simulate(plan->s, plan->sched, plan->period, {.periods = 1, .dt = dt, .record_samples = false});
    const auto fine = simulate(plan->s, plan->sched, plan->period, {.periods = 1, .dt = dt / 2, .record_samples = false});
    const std::size_t n = plan->paths.size();
    double vmax = 0.0;
    for (const auto& a : plan->s.agents) vmax = std::max(vmax, a.speed);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        if (plan->paths[a].empty() || plan->paths[b].empty()) continue;
        EXPECT_LE(fine.pair_min_distance(a, b), coarse.pair_min_distance(a, b) + 1e-9);
        EXPECT_GE(fine.pair_min_distance(a, b), coarse.pair_min_distance(a, b) - 2.0 * vmax * dt);
      }
    EXPECT_EQ(compute_metrics(coarse, 1).quality_integral, compute_metrics(fine, 1).quality_integral);
    return;
  }
  FAIL() << "no schedulable instance";
}
