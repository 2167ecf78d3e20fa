#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "pcov/tour.hpp"

using namespace pcov;

namespace {

Scenario scatter(const std::vector<Point2>& pts, double speed = 1.0) {
  Scenario s;
  Agent a;
  a.radius = 0.1;
  a.speed = speed;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    s.points.push_back({static_cast<int>(k), pts[k], 1.0});
    a.reachable.push_back(static_cast<int>(k));
    a.max_production[static_cast<int>(k)] = 2.0;
  }
  s.agents.push_back(a);
  validate(s);
  return s;
}

// Exhaustive optimum over all tours starting at point 0.
double exhaustive_tour(const Scenario& s) {
  std::vector<int> rest;
  for (std::size_t k = 1; k < s.points.size(); ++k) rest.push_back(static_cast<int>(k));
  double best = INFINITY;
  do {
    std::vector<int> order{0};
    order.insert(order.end(), rest.begin(), rest.end());
    best = std::min(best, tour_length(s, order));
  } while (std::next_permutation(rest.begin(), rest.end()));
  return best;
}

double nearest_neighbor_length(const Scenario& s) {
  return tour_length(s, nearest_neighbor_order(s, s.agent(0), s.agent(0).reachable));
}

}  // namespace

TEST(PlanTour, SinglePoint) {
  const Scenario s = scatter({{3, 4}});
  Path p = plan_tour(s, s.agent(0), {0});
  EXPECT_EQ(p.order, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(p.length(), 0.0);
  std::vector<Path> paths{p};
  compute_period(paths, 0.3);
  EXPECT_DOUBLE_EQ(paths[0].normalized_moving_time, 0.0);
}

TEST(PlanTour, UnitSquarePerimeter) {
  const Scenario s = scatter({{0, 0}, {1, 1}, {1, 0}, {0, 1}});
  const Path p = plan_tour(s, s.agent(0), s.agent(0).reachable);
  EXPECT_NEAR(p.length(), 4.0, 1e-12);
  EXPECT_NEAR(exhaustive_tour(s), 4.0, 1e-12);
  EXPECT_EQ(p.order.size(), 4u);
}

TEST(PlanTour, EmptyAndUnreachableAreErrors) {
  const Scenario s = scatter({{0, 0}, {1, 0}});
  EXPECT_THROW(plan_tour(s, s.agent(0), {}), std::invalid_argument);
  EXPECT_THROW(plan_tour(s, s.agent(0), {5}), std::invalid_argument);
}

TEST(PlanTour, RandomInstancesAgainstExhaustiveOptimum) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_int_distribution<int> size(3, 8);
  int within = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = trial < 20 ? 7 : size(rng);
    std::vector<Point2> pts;
    for (int k = 0; k < n; ++k) pts.push_back({u(rng), u(rng)});
    const Scenario s = scatter(pts);
    const Path p = plan_tour(s, s.agent(0), s.agent(0).reachable);
    const double opt = exhaustive_tour(s);
    // Closed tour visiting every point exactly once.
    auto sorted = p.order;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, s.agent(0).reachable);
    EXPECT_GE(p.length(), opt - 1e-9);
    EXPECT_LE(p.length(), nearest_neighbor_length(s) + 1e-9);
    EXPECT_TRUE(is_two_opt_optimal(s, p.order));
    if (p.length() <= 1.05 * opt + 1e-9) ++within;
  }
  // Empirical gate: every instance within 5 % of the optimum.
  EXPECT_EQ(within, 100);
}

TEST(PlanTour, DeterministicAndHomeSeedsStart) {
  Scenario s = scatter({{0, 0}, {10, 0}, {10, 10}, {0, 10}});
  EXPECT_EQ(plan_tour(s, s.agent(0), s.agent(0).reachable).order.front(), 0);
  s.agents[0].home = Point2{9, 9};
  const Path a = plan_tour(s, s.agent(0), s.agent(0).reachable);
  const Path b = plan_tour(s, s.agent(0), s.agent(0).reachable);
  EXPECT_EQ(a.order.front(), 2);
  EXPECT_EQ(a.order, b.order);
}

TEST(Reversed, KeepsStartAndLength) {
  const Scenario s = scatter({{0, 0}, {4, 0}, {4, 3}, {1, 5}});
  const Path p = plan_tour(s, s.agent(0), s.agent(0).reachable);
  const Path r = reversed(s, p);
  EXPECT_EQ(r.order.front(), p.order.front());
  EXPECT_EQ(r.order[1], p.order.back());
  EXPECT_NEAR(r.length(), p.length(), 1e-12);
}

TEST(ComputePeriod, DirectFormula) {
  std::vector<Path> paths(3);
  paths[0].tour_time = 3.0;
  paths[1].tour_time = 6.0;
  paths[2].tour_time = 4.5;
  const double T = compute_period(paths, 0.3);
  EXPECT_NEAR(T, 20.0, 1e-12);
  EXPECT_NEAR(paths[0].normalized_moving_time, 0.15, 1e-12);
  EXPECT_NEAR(paths[1].normalized_moving_time, 0.30, 1e-12);
  EXPECT_NEAR(paths[2].normalized_moving_time, 0.225, 1e-12);
}

TEST(ComputePeriod, MaxNormalizedMovingTimeEqualsBudget) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.1, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Path> paths(4);
    for (auto& p : paths) p.tour_time = u(rng);
    compute_period(paths, 0.3);
    double mx = 0.0;
    for (const auto& p : paths) mx = std::max(mx, p.normalized_moving_time);
    EXPECT_NEAR(mx, 0.3, 1e-12);
  }
}

TEST(ComputePeriod, StationaryTeamUsesFallback) {
  std::vector<Path> paths(1);
  EXPECT_DOUBLE_EQ(compute_period(paths, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(compute_period(paths, 0.3, 7.5), 7.5);
  EXPECT_THROW(compute_period(paths, 1.0), std::invalid_argument);
}
