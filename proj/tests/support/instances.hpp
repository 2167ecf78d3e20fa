#pragma once
// Random scenarios for property tests and the acceptance run.

#include <algorithm>
#include <random>

#include "pcov/scenario.hpp"

namespace pcov::fixtures {

struct InstanceShape {
  int agents = 3;
  int points = 5;
  double radius = 20.0;
  double speed = 60.0;
  double min_rate = 400.0;
  double max_rate = 2200.0;
  double max_production = 5000.0;
  double share_probability = 0.4;  // chance a point also gets its second-nearest agent
  double spacing_margin = 10.0;
};

/// Points are kept farther apart than two radii plus a margin so coverage
/// positions never conflict. Each point is reachable by its nearest agent
/// anchor and, with some probability, by the second nearest; every agent
/// reaches at least one point.
inline Scenario random_instance(std::mt19937& rng, const InstanceShape& shape) {
  const double spacing = 2.0 * shape.radius + shape.spacing_margin;
  const double side = spacing * (2.0 + 1.6 * std::sqrt(static_cast<double>(shape.points)));
  std::uniform_real_distribution<double> coord(0.0, side), unit(0.0, 1.0);
  std::uniform_real_distribution<double> rate(shape.min_rate, shape.max_rate);

  Scenario s;
  s.units = {{"length", "mm"}, {"time", "s"}, {"rate", "W"}};
  while (static_cast<int>(s.points.size()) < shape.points) {
    const Point2 c{coord(rng), coord(rng)};
    bool clear = true;
    for (const auto& p : s.points) clear = clear && distance(p.position, c) > spacing;
    if (clear) s.points.push_back({static_cast<int>(s.points.size()), c, rate(rng)});
  }

  std::vector<Point2> anchors;
  for (int i = 0; i < shape.agents; ++i) {
    // Anchor each agent near a distinct point so nobody starts empty-handed.
    anchors.push_back(s.points[static_cast<std::size_t>(i % shape.points)].position);
    Agent a;
    a.id = i;
    a.radius = shape.radius;
    a.speed = shape.speed;
    s.agents.push_back(a);
  }
  for (const auto& p : s.points) {
    std::vector<int> order(static_cast<std::size_t>(shape.agents));
    for (int i = 0; i < shape.agents; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return distance(anchors[static_cast<std::size_t>(a)], p.position) <
             distance(anchors[static_cast<std::size_t>(b)], p.position);
    });
    s.agents[static_cast<std::size_t>(order[0])].reachable.push_back(p.id);
    if (order.size() > 1 && unit(rng) < shape.share_probability)
      s.agents[static_cast<std::size_t>(order[1])].reachable.push_back(p.id);
  }
  for (std::size_t i = 0; i < s.agents.size(); ++i)
    if (s.agents[i].reachable.empty()) s.agents[i].reachable.push_back(static_cast<int>(i) % shape.points);
  for (auto& a : s.agents) {
    std::sort(a.reachable.begin(), a.reachable.end());
    for (int q : a.reachable) a.max_production[q] = shape.max_production;
  }
  validate(s);
  return s;
}

}  // namespace pcov::fixtures
