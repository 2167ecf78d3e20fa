#pragma once
// Continuous-time replay of a team plan: coverage fields, sampled positions,
// collision checks and summary metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pcov/coverage.hpp"
#include "pcov/schedule.hpp"

namespace pcov {

struct SimulationOptions {
  int periods = 10;
  double dt = 0.0;        // seconds; 0 picks epsilon * T / 4
  double epsilon = 1e-3;  // separation the schedule was built with
  bool record_samples = true;
  double collision_tolerance = 1e-6;
};

/// What an agent is doing at some instant.
struct Phase {
  IntervalKind kind = IntervalKind::movement;
  std::size_t index = 0;
  bool active = false;  // false for parked agents
};

/// One coverage arc of a point in the team frame (fractions of the period).
struct CoverageArc {
  std::size_t path = 0;
  double start = 0.0;
  double length = 0.0;
  double rate = 0.0;
};

/// Plan in the team frame, with exact per-agent state lookup.
class TeamPlan {
 public:
  TeamPlan(const Scenario& s, std::vector<Path> paths, CoverageAssignment x, std::vector<double> phi, double period)
      : s_(&s), paths_(std::move(paths)), x_(std::move(x)), phi_(std::move(phi)), period_(period) {
    if (!(period_ > 0.0)) throw std::invalid_argument("TeamPlan: period must be positive");
    if (phi_.size() != paths_.size()) throw std::invalid_argument("TeamPlan: one shift per path expected");
    tl_ = build_timeline(paths_, x_);
    arcs_.assign(s.points.size(), {});
    for (std::size_t p = 0; p < paths_.size(); ++p)
      for (std::size_t j = 0; j < paths_[p].size(); ++j) {
        const double len = x_.theta[p][j];
        if (len <= 0.0) continue;
        arcs_[static_cast<std::size_t>(paths_[p].order[j])].push_back(
            {p, frac(phi_[p] + tl_.agents[p].arrival[j]), len, x_.rho[p][j]});
      }
  }

  const Scenario& scenario() const { return *s_; }
  const std::vector<Path>& paths() const { return paths_; }
  const CoverageAssignment& assignment() const { return x_; }
  const Timeline& timeline() const { return tl_; }
  const std::vector<double>& phi() const { return phi_; }
  double period() const { return period_; }
  const std::vector<CoverageArc>& arcs(int point) const { return arcs_.at(static_cast<std::size_t>(point)); }

  static double frac(double u) {
    double f = u - std::floor(u);
    return f >= 1.0 ? 0.0 : f;
  }

  /// Position within the agent's own period for team-frame time u (periods).
  double local(std::size_t p, double u) const { return frac(u - phi_[p]); }

  Phase phase(std::size_t p, double u) const {
    const Path& path = paths_[p];
    if (path.empty()) return {};
    const AgentTimeline& at = tl_.agents[p];
    const double l = local(p, u);
    for (std::size_t j = 0; j < path.size(); ++j) {
      if (at.arrival[j] <= l && l < at.departure[j]) return {IntervalKind::coverage, j, true};
      if (at.move_start[j] <= l && l < at.move_end[j]) return {IntervalKind::movement, j, true};
    }
    // only reachable through rounding at the very end of the period
    return {IntervalKind::movement, path.size() - 1, true};
  }

  std::optional<Point2> position(std::size_t p, double u) const {
    const Phase ph = phase(p, u);
    if (!ph.active) return std::nullopt;
    const Path& path = paths_[p];
    const Point2 from = s_->point(path.order[ph.index]).position;
    if (ph.kind == IntervalKind::coverage) return from;
    const Point2 to = s_->point(path.order[(ph.index + 1) % path.size()]).position;
    const AgentTimeline& at = tl_.agents[p];
    const double span = at.move_end[ph.index] - at.move_start[ph.index];
    const double f = span > 0.0 ? std::clamp((local(p, u) - at.move_start[ph.index]) / span, 0.0, 1.0) : 0.0;
    return Point2{from.x + f * (to.x - from.x), from.y + f * (to.y - from.y)};
  }

  /// Measure of [0, u] covered by the periodic copies of an arc.
  static double covered(const CoverageArc& a, double u) {
    if (u <= 0.0) return 0.0;
    if (a.length >= 1.0) return u;
    const double whole = std::floor(u);
    const double y = u - whole;
    auto seg = [y](double lo, double hi) { return std::max(0.0, std::min(hi, y) - std::max(lo, 0.0)); };
    return whole * a.length + seg(a.start, a.start + a.length) + seg(a.start - 1.0, a.start + a.length - 1.0);
  }

  /// Z(q, t): coverage delivered to a point by time t (seconds), exact.
  double delivered(int point, double t) const {
    double z = 0.0;
    for (const auto& a : arcs(point)) z += a.rate * covered(a, t / period_);
    return z * period_;
  }

  double required(int point, double t) const { return s_->point(point).required_rate * t; }

  /// Instantaneous received rate at time t (seconds).
  double rate(int point, double t) const {
    double r = 0.0;
    const double u = t / period_;
    for (const auto& a : arcs(point))
      if (a.length >= 1.0 || frac(u - a.start) < a.length) r += a.rate;
    return r;
  }

 private:
  const Scenario* s_;
  std::vector<Path> paths_;
  CoverageAssignment x_;
  std::vector<double> phi_;
  double period_;
  Timeline tl_;
  std::vector<std::vector<CoverageArc>> arcs_;
};

struct Collision {
  double time = 0.0;
  std::size_t first = 0, second = 0;  // paths
  double distance = 0.0;
  double required = 0.0;
};

struct CollisionReport {
  std::vector<Collision> collisions;
  bool ok() const { return collisions.empty(); }
};

struct SimulationSample {
  double time = 0.0;
  std::vector<std::optional<Point2>> positions;  // per path; empty for parked agents
  std::vector<double> delivered;                 // Z per point
  std::vector<double> required;                  // Z* per point
  std::vector<double> rate;                      // received rate per point
};

struct SimulationTrace {
  TeamPlan plan;
  double dt = 0.0;
  int periods = 0;
  std::vector<SimulationSample> samples;
  // Minimum distance seen per pair of paths (row-major, paths x paths).
  std::vector<double> min_distance;
  // Samples closer than the sum of the agents' radii (found while sampling,
  // whether or not samples are kept).
  CollisionReport collisions;

  double horizon() const { return periods * plan.period(); }
  double pair_min_distance(std::size_t a, std::size_t b) const { return min_distance[a * plan.paths().size() + b]; }
};

inline SimulationTrace simulate(const Scenario& s, const std::vector<Path>& paths, const CoverageAssignment& x,
                                const std::vector<double>& phi, double period, const SimulationOptions& opt = {}) {
  if (opt.periods < 1) throw std::invalid_argument("simulate: at least one period");
  if (!(opt.epsilon > 0.0)) throw std::invalid_argument("simulate: epsilon must be positive");
  const double limit = opt.epsilon * period / 4.0;
  const double dt = opt.dt > 0.0 ? opt.dt : limit;
  if (dt > limit * (1.0 + 1e-12))
    throw std::invalid_argument("simulate: dt " + std::to_string(dt) + " skips separation gaps; use at most " +
                                std::to_string(limit));
  SimulationTrace trace{TeamPlan(s, paths, x, phi, period), dt, opt.periods, {}, {}, {}};
  const TeamPlan& plan = trace.plan;
  const std::size_t n = paths.size();
  trace.min_distance.assign(n * n, std::numeric_limits<double>::infinity());
  const auto steps = static_cast<std::size_t>(std::ceil(trace.horizon() / dt - 1e-9));
  if (opt.record_samples) trace.samples.reserve(steps + 1);
  std::vector<std::optional<Point2>> pos(n);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = std::min(trace.horizon(), static_cast<double>(k) * dt);
    const double u = t / period;
    for (std::size_t p = 0; p < n; ++p) pos[p] = plan.position(p, u);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!pos[a] || !pos[b]) continue;
        const double d = distance(*pos[a], *pos[b]);
        const double need = s.agent(paths[a].agent_id).radius + s.agent(paths[b].agent_id).radius;
        if (d < need - opt.collision_tolerance) trace.collisions.collisions.push_back({t, a, b, d, need});
        double& m = trace.min_distance[a * n + b];
        m = std::min(m, d);
        trace.min_distance[b * n + a] = m;
      }
    if (!opt.record_samples) continue;
    SimulationSample sample;
    sample.time = t;
    sample.positions = pos;
    for (const auto& q : s.points) {
      sample.delivered.push_back(plan.delivered(q.id, t));
      sample.required.push_back(plan.required(q.id, t));
      sample.rate.push_back(plan.rate(q.id, t));
    }
    trace.samples.push_back(std::move(sample));
  }
  return trace;
}

inline SimulationTrace simulate(const Scenario& s, const TeamSchedule& sched, double period,
                                const SimulationOptions& opt = {}) {
  return simulate(s, sched.paths, sched.assignment, sched.phi, period, opt);
}

/// Every sample where two agents are closer than the sum of their radii.
/// Needs the recorded positions; the trace must keep its samples.
inline CollisionReport check_collisions(const SimulationTrace& trace, const std::vector<double>& radii,
                                        double tol = 1e-6) {
  const std::size_t n = trace.plan.paths().size();
  if (radii.size() != n) throw std::invalid_argument("check_collisions: one radius per path expected");
  CollisionReport out;
  for (const auto& sample : trace.samples)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!sample.positions[a] || !sample.positions[b]) continue;
        const double need = radii[a] + radii[b];
        const double d = distance(*sample.positions[a], *sample.positions[b]);
        if (d < need - tol) out.collisions.push_back({sample.time, a, b, d, need});
      }
  return out;
}

inline std::vector<double> path_radii(const Scenario& s, const std::vector<Path>& paths) {
  std::vector<double> out;
  for (const auto& p : paths) out.push_back(s.agent(p.agent_id).radius);
  return out;
}

/// Integral of sum_q (Z* - Z)^2 over the first `periods` periods (may be
/// fractional). Z is piecewise linear between coverage switches and Z* is
/// linear, so each piece integrates in closed form.
inline double quality_integral(const TeamPlan& plan, double periods) {
  double total = 0.0;
  const double T = plan.period();
  for (const auto& q : plan.scenario().points) {
    std::vector<double> cuts{0.0, periods};
    for (const auto& a : plan.arcs(q.id))
      for (int k = -1; k <= static_cast<int>(std::ceil(periods)); ++k)
        for (double c : {k + a.start, k + a.start + a.length})
          if (c > 0.0 && c < periods) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    auto gap = [&](double u) { return plan.required(q.id, u * T) - plan.delivered(q.id, u * T); };
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double w = (cuts[i + 1] - cuts[i]) * T;
      if (w <= 0.0) continue;
      const double g0 = gap(cuts[i]), g1 = gap(cuts[i + 1]);
      total += w * (g0 * g0 + g0 * g1 + g1 * g1) / 3.0;
    }
  }
  return total;
}

/// Total time (fraction of the period) during which two agents are both in a
/// movement phase, summed over unordered pairs. Found by sweeping the phase
/// boundaries of both agents.
inline double simultaneous_motion(const TeamPlan& plan) {
  const auto& paths = plan.paths();
  const Timeline& tl = plan.timeline();
  double total = 0.0;
  for (std::size_t a = 0; a < paths.size(); ++a)
    for (std::size_t b = a + 1; b < paths.size(); ++b) {
      if (paths[a].empty() || paths[b].empty()) continue;
      std::vector<double> cuts{0.0, 1.0};
      for (std::size_t p : {a, b})
        for (std::size_t j = 0; j < paths[p].size(); ++j)
          for (double c : {tl.agents[p].arrival[j], tl.agents[p].departure[j], tl.agents[p].move_end[j]})
            cuts.push_back(TeamPlan::frac(plan.phi()[p] + c));
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double w = cuts[i + 1] - cuts[i];
        if (w <= 0.0) continue;
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        if (plan.phase(a, mid).kind == IntervalKind::movement && plan.phase(b, mid).kind == IntervalKind::movement)
          total += w;
      }
    }
  return total;
}

/// Longest stretch of a period during which nobody covers the point.
inline double max_uncovered_time(const TeamPlan& plan, int point) {
  const auto& arcs = plan.arcs(point);
  if (arcs.empty()) return 1.0;
  std::vector<std::pair<double, double>> spans;
  for (const auto& a : arcs) {
    if (a.length >= 1.0) return 0.0;
    spans.push_back({a.start, a.start + a.length});
    spans.push_back({a.start + 1.0, a.start + a.length + 1.0});
  }
  std::sort(spans.begin(), spans.end());
  const double origin = spans.front().first;
  double reach = spans.front().second, worst = 0.0;
  for (const auto& [lo, hi] : spans) {
    if (lo >= origin + 1.0) break;
    worst = std::max(worst, lo - reach);
    reach = std::max(reach, hi);
  }
  return std::max(worst, origin + 1.0 - reach);
}

/// Sum over visits of (theta - P*/rho_max)^2.
inline double homogeneity(const Scenario& s, const std::vector<Path>& paths, const CoverageAssignment& x) {
  double h = 0.0;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const Agent& a = s.agent(paths[p].agent_id);
    for (std::size_t j = 0; j < paths[p].size(); ++j) {
      const int q = paths[p].order[j];
      const double d = x.theta[p][j] - s.point(q).required_rate / a.max_rate(q);
      h += d * d;
    }
  }
  return h;
}

struct Metrics {
  double iterations = 1.0;
  double movements_per_agent = 0.0;
  double total_coverage_fraction = 0.0;
  double max_uncovered_time = 0.0;
  double max_normalized_production = 0.0;
  double homogeneity = 0.0;
  double quality_integral = 0.0;
  double simultaneous_motion = 0.0;
};

/// Per-agent averages run over agents with a non-empty tour.
inline Metrics compute_metrics(const SimulationTrace& trace, int shorten_iterations) {
  const TeamPlan& plan = trace.plan;
  const Scenario& s = plan.scenario();
  const auto& paths = plan.paths();
  const auto& x = plan.assignment();
  Metrics m;
  m.iterations = shorten_iterations;
  int active = 0;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    if (paths[p].empty()) continue;
    ++active;
    int moves = 0;
    double covered = 0.0;
    for (std::size_t j = 0; j < paths[p].size(); ++j) {
      if (paths[p].leg_lengths[j] > 0.0) ++moves;
      covered += x.theta[p][j];
      const int q = paths[p].order[j];
      m.max_normalized_production =
          std::max(m.max_normalized_production, x.rho[p][j] / s.agent(paths[p].agent_id).max_rate(q));
    }
    m.movements_per_agent += moves;
    const double available = 1.0 - paths[p].normalized_moving_time;
    m.total_coverage_fraction += available > 0.0 ? covered / available : 1.0;
  }
  if (active > 0) {
    m.movements_per_agent /= active;
    m.total_coverage_fraction /= active;
  }
  for (const auto& q : s.points) m.max_uncovered_time = std::max(m.max_uncovered_time, max_uncovered_time(plan, q.id));
  m.homogeneity = homogeneity(s, paths, x);
  m.quality_integral = quality_integral(plan, trace.periods);
  m.simultaneous_motion = simultaneous_motion(plan);
  return m;
}

}  // namespace pcov
