#include <gtest/gtest.h>

#include "pcov/lp.hpp"
#include "pcov/scenario.hpp"

using namespace pcov;

namespace {

std::string one_agent_doc(double required, double max_rate) {
  return R"({"points":[{"id":0,"x":0,"y":0,"required_rate":)" + std::to_string(required) +
         R"(}],"agents":[{"id":0,"radius":1,"speed":1,"reachable":[0],"max_production":)" + std::to_string(max_rate) + "}]}";
}

std::string error_of(const std::string& doc) {
  try {
    load_scenario_text(doc);
  } catch (const ScenarioError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(LoadScenario, SixPotLayout) {
  const Scenario s = load_scenario_file(PCOV_DATA_DIR "/six_pots.json");
  ASSERT_EQ(s.points.size(), 6u);
  ASSERT_EQ(s.agents.size(), 3u);
  const double expected[] = {800, 1500, 500, 1500, 2000, 1500};
  for (int q = 0; q < 6; ++q) EXPECT_DOUBLE_EQ(s.point(q).required_rate, expected[q]);
  for (const auto& a : s.agents) EXPECT_DOUBLE_EQ(2 * a.radius, 180.0);
  EXPECT_EQ(s.units.at("rate"), "W");
  EXPECT_EQ(s.visitors(4), (std::vector<int>{1, 2}));
}

TEST(LoadScenario, UncoveredPointIsRejected) {
  const auto msg = error_of(R"({"points":[{"id":0,"x":0,"y":0,"required_rate":1}],"agents":[]})");
  EXPECT_NE(msg.find("point 0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("uncovered"), std::string::npos) << msg;
}

TEST(LoadScenario, DuplicateIdIsRejected) {
  const auto msg = error_of(
      R"({"points":[{"id":0,"x":0,"y":0,"required_rate":1},{"id":0,"x":1,"y":0,"required_rate":1}],
          "agents":[{"id":0,"radius":1,"speed":1,"reachable":[0],"max_production":2}]})");
  EXPECT_NE(msg.find("duplicate point id"), std::string::npos) << msg;
}

TEST(LoadScenario, ErrorsNameEntityAndField) {
  auto msg = error_of(R"({"points":[{"id":0,"x":0,"y":0,"required_rate":1}],
                          "agents":[{"id":0,"radius":0,"speed":1,"reachable":[0],"max_production":2}]})");
  EXPECT_NE(msg.find("agent 0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("radius"), std::string::npos) << msg;
  msg = error_of(R"({"points":[{"id":0,"x":0,"required_rate":1}],"agents":[]})");
  EXPECT_NE(msg.find("point 0"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'y'"), std::string::npos) << msg;
  msg = error_of(R"({"points":[{"id":0,"x":0,"y":0,"required_rate":1}],
                     "agents":[{"id":0,"radius":1,"speed":1,"reachable":[0],"max_production":"lots"}]})");
  EXPECT_NE(msg.find("max_production"), std::string::npos) << msg;
  msg = error_of(R"({"points":[{"id":0,"x":0,"y":0,"required_rate":-1}],
                     "agents":[{"id":0,"radius":1,"speed":1,"reachable":[0],"max_production":2}]})");
  EXPECT_NE(msg.find("required_rate"), std::string::npos) << msg;
  msg = error_of(R"({"points":[{"id":1,"x":0,"y":0,"required_rate":1}],
                     "agents":[{"id":0,"radius":1,"speed":1,"reachable":[1],"max_production":2}]})");
  EXPECT_NE(msg.find("dense"), std::string::npos) << msg;
}

TEST(LoadScenario, PerPointProductionOverrides) {
  const Scenario s = load_scenario_text(
      R"({"points":[{"id":0,"x":0,"y":0,"required_rate":1},{"id":1,"x":5,"y":0,"required_rate":1}],
          "agents":[{"id":0,"radius":1,"speed":2,"home":{"x":-1,"y":0},"reachable":[1,0],
                     "max_production":{"default":3,"1":7}}]})");
  EXPECT_DOUBLE_EQ(s.agent(0).max_rate(0), 3.0);
  EXPECT_DOUBLE_EQ(s.agent(0).max_rate(1), 7.0);
  EXPECT_EQ(s.agent(0).reachable, (std::vector<int>{0, 1}));
  ASSERT_TRUE(s.agent(0).home.has_value());
}

TEST(LoadScenario, RoundTripIsIdentity) {
  Scenario s = load_scenario_file(PCOV_DATA_DIR "/six_pots.json");
  s.weights[{1, 4}] = 0.5;
  s.agents[2].home = Point2{10, 20};
  const Scenario back = load_scenario(nlohmann::json::parse(to_json(s).dump()));
  EXPECT_EQ(back, s);
}

TEST(NecessaryFeasibility, CapacityFlags) {
  auto r = necessary_feasibility_check(load_scenario_text(one_agent_doc(10, 5)));
  ASSERT_EQ(r.capacity.size(), 1u);
  EXPECT_EQ(r.capacity[0].point, 0);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(necessary_feasibility_check(load_scenario_text(one_agent_doc(5, 5))).ok());
}

TEST(NecessaryFeasibility, SharedPointWithinJointCapacity) {
  const Scenario s = load_scenario_text(
      R"({"points":[{"id":0,"x":0,"y":0,"required_rate":5}],
          "agents":[{"id":0,"radius":1,"speed":1,"reachable":[0],"max_production":3},
                    {"id":1,"radius":1,"speed":1,"reachable":[0],"max_production":3}]})");
  EXPECT_TRUE(necessary_feasibility_check(s).ok());
  // Oracle: with each agent's own budget theta_i <= 1, 3 theta1 + 3 theta2 = 5
  // is feasible (e.g. 5/6 each), so flag (a) must stay silent.
  LinearProgram lp;
  lp.objective = {0, 0};
  lp.lower = {0, 0};
  lp.upper = {1, 1};
  lp.eq_matrix = {{3, 3}};
  lp.eq_rhs = {5};
  const auto sol = solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::optimal);
  EXPECT_NEAR(3 * sol.values[0] + 3 * sol.values[1], 5.0, 1e-9);
  // The per-point limit theta1 + theta2 <= 1 makes it infeasible: the check
  // is necessary, not sufficient.
  lp.ub_matrix = {{1, 1}};
  lp.ub_rhs = {1};
  EXPECT_EQ(solve_lp(lp).status, LpStatus::infeasible);
}

TEST(NecessaryFeasibility, MotionOverrun) {
  const Scenario s = load_scenario_text(one_agent_doc(1, 5));
  const auto r = necessary_feasibility_check(s, {12.0}, 10.0);
  ASSERT_EQ(r.motion.size(), 1u);
  EXPECT_NEAR(r.motion[0].normalized_moving_time, 1.2, 1e-12);
  EXPECT_TRUE(necessary_feasibility_check(s, {5.0}, 10.0).ok());
}
