#pragma once
// Closed tours per agent (nearest neighbour seeded, 2-opt improved) and the
// team period derived from the longest tour.

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "pcov/scenario.hpp"

namespace pcov {

struct Path {
  int agent_id = 0;
  std::vector<int> order;            // Gamma_i, point ids; closes back to order.front()
  std::vector<double> leg_lengths;   // leg j goes order[j] -> order[j+1 mod n]
  double tour_time = 0.0;            // t^m_i
  double normalized_moving_time = 0.0;  // theta^m_i, set by compute_period

  std::size_t size() const { return order.size(); }
  bool empty() const { return order.empty(); }
  double length() const { return std::accumulate(leg_lengths.begin(), leg_lengths.end(), 0.0); }
};

inline double tour_length(const Scenario& s, const std::vector<int>& order) {
  double total = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j)
    total += distance(s.point(order[j]).position, s.point(order[(j + 1) % order.size()]).position);
  return total;
}

/// Builds a Path for a fixed visiting order. Normalized moving time is left
/// at zero until compute_period runs.
inline Path make_path(const Scenario& s, const Agent& agent, std::vector<int> order) {
  Path p;
  p.agent_id = agent.id;
  p.order = std::move(order);
  for (std::size_t j = 0; j < p.order.size(); ++j) {
    const auto a = s.point(p.order[j]).position;
    const auto b = s.point(p.order[(j + 1) % p.order.size()]).position;
    p.leg_lengths.push_back(distance(a, b));
  }
  p.tour_time = p.length() / agent.speed;
  return p;
}

/// First-improvement 2-opt keeping order.front() fixed; pairs are scanned in
/// lexicographic (i, k) order and the scan restarts after every improving move.
inline void two_opt(const Scenario& s, std::vector<int>& order) {
  const std::size_t n = order.size();
  if (n < 4) return;
  auto d = [&](int a, int b) { return distance(s.point(a).position, s.point(b).position); };
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 1; i + 1 < n && !improved; ++i) {
      for (std::size_t k = i + 1; k < n && !improved; ++k) {
        const int a = order[i - 1], b = order[i], c = order[k], e = order[(k + 1) % n];
        const double delta = d(a, c) + d(b, e) - d(a, b) - d(c, e);
        if (delta < -1e-12) {
          std::reverse(order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(k) + 1);
          improved = true;
        }
      }
    }
  }
}

/// True when no single 2-opt exchange shortens the tour by more than `tol`.
inline bool is_two_opt_optimal(const Scenario& s, const std::vector<int>& order, double tol = 1e-9) {
  const std::size_t n = order.size();
  if (n < 4) return true;
  const double base = tour_length(s, order);
  for (std::size_t i = 1; i + 1 < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) {
      auto trial = order;
      std::reverse(trial.begin() + static_cast<std::ptrdiff_t>(i), trial.begin() + static_cast<std::ptrdiff_t>(k) + 1);
      if (tour_length(s, trial) < base - tol) return false;
    }
  return true;
}

inline std::vector<int> nearest_neighbor_order(const Scenario& s, const Agent& agent, std::vector<int> points) {
  std::sort(points.begin(), points.end());
  int start = points.front();
  if (agent.home) {
    double best = std::numeric_limits<double>::infinity();
    for (int q : points) {
      const double dq = distance(*agent.home, s.point(q).position);
      if (dq < best) best = dq, start = q;  // ties keep the lower id
    }
  }
  std::vector<int> order{start};
  std::vector<bool> used(points.size(), false);
  used[static_cast<std::size_t>(std::find(points.begin(), points.end(), start) - points.begin())] = true;
  while (order.size() < points.size()) {
    const auto cur = s.point(order.back()).position;
    std::size_t pick = points.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (used[k]) continue;
      const double dq = distance(cur, s.point(points[k]).position);
      if (dq < best) best = dq, pick = k;
    }
    used[pick] = true;
    order.push_back(points[pick]);
  }
  return order;
}

inline Path plan_tour(const Scenario& s, const Agent& agent, const std::vector<int>& points) {
  if (points.empty()) throw std::invalid_argument("plan_tour: agent " + std::to_string(agent.id) + " has no points");
  for (int q : points)
    if (!agent.reaches(q))
      throw std::invalid_argument("plan_tour: point " + std::to_string(q) + " not reachable by agent " +
                                  std::to_string(agent.id));
  auto order = nearest_neighbor_order(s, agent, points);
  two_opt(s, order);
  return make_path(s, agent, std::move(order));
}

/// Initial tours: every agent visits its whole reachable set.
inline std::vector<Path> plan_initial_tours(const Scenario& s) {
  std::vector<Path> paths;
  for (const auto& a : s.agents) paths.push_back(a.reachable.empty() ? make_path(s, a, {}) : plan_tour(s, a, a.reachable));
  return paths;
}

/// Same tour traversed the other way round, starting at the same point.
inline Path reversed(const Scenario& s, const Path& p) {
  if (p.size() < 3) return p;
  std::vector<int> order{p.order.front()};
  order.insert(order.end(), p.order.rbegin(), p.order.rend() - 1);
  Path out = make_path(s, s.agent(p.agent_id), std::move(order));
  out.normalized_moving_time = p.normalized_moving_time;
  return out;
}

/// T = max_i t^m_i / theta_m_max, then theta^m_i = t^m_i / T. When every tour
/// time is zero the fallback period is used.
inline double compute_period(std::vector<Path>& paths, double theta_m_max, double fallback_period = 1.0) {
  if (!(theta_m_max > 0.0 && theta_m_max < 1.0)) throw std::invalid_argument("compute_period: theta_m_max must be in (0, 1)");
  double longest = 0.0;
  for (const auto& p : paths) longest = std::max(longest, p.tour_time);
  const double period = longest > 0.0 ? longest / theta_m_max : fallback_period;
  for (auto& p : paths) p.normalized_moving_time = p.tour_time / period;
  return period;
}

/// Fixed period (user override). theta^m may reach or exceed 1; the
/// feasibility check reports that case.
inline void set_period(std::vector<Path>& paths, double period) {
  if (!(period > 0.0)) throw std::invalid_argument("set_period: period must be positive");
  for (auto& p : paths) p.normalized_moving_time = p.tour_time / period;
}

}  // namespace pcov
