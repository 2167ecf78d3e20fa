#pragma once
// JSON stage artifacts. Each document carries what the next stage needs, so
// every stage can be rerun from files alone.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "pcov/schedule.hpp"
#include "pcov/simulator.hpp"

namespace pcov {

class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using nlohmann::json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ArtifactError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

namespace detail {

template <class T>
T field(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw ArtifactError(where + ": missing '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ArtifactError(where + ": bad '" + key + "': " + e.what());
  }
}

}  // namespace detail

// --- paths -----------------------------------------------------------------

inline json paths_to_json(const std::vector<Path>& paths, double period) {
  json doc{{"period", period}, {"paths", json::array()}};
  for (const auto& p : paths)
    doc["paths"].push_back({{"agent", p.agent_id},
                            {"order", p.order},
                            {"length", p.length()},
                            {"tour_time", p.tour_time},
                            {"normalized_moving_time", p.normalized_moving_time}});
  return doc;
}

struct LoadedPaths {
  std::vector<Path> paths;
  double period = 0.0;
};

/// Leg lengths and times are rebuilt from the scenario geometry.
inline LoadedPaths paths_from_json(const Scenario& s, const json& doc) {
  LoadedPaths out;
  out.period = detail::field<double>(doc, "period", "paths");
  if (!(out.period > 0.0)) throw ArtifactError("paths: period must be positive");
  const auto list = detail::field<json>(doc, "paths", "paths");
  if (!list.is_array() || list.size() != s.agents.size())
    throw ArtifactError("paths: expected one entry per agent (" + std::to_string(s.agents.size()) + ")");
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string where = "paths[" + std::to_string(k) + "]";
    const int agent = detail::field<int>(list[k], "agent", where);
    if (agent != s.agents[k].id) throw ArtifactError(where + ": agents must be listed in id order");
    const auto order = detail::field<std::vector<int>>(list[k], "order", where);
    for (int q : order)
      if (!s.agents[k].reaches(q))
        throw ArtifactError(where + ": agent " + std::to_string(agent) + " cannot reach point " + std::to_string(q));
    out.paths.push_back(make_path(s, s.agents[k], order));
  }
  set_period(out.paths, out.period);
  return out;
}

// --- assignment ------------------------------------------------------------

inline json assignment_to_json(const std::vector<Path>& paths, const CoverageAssignment& x, const std::string& cost) {
  const Timeline tl = build_timeline(paths, x);
  json doc{{"cost_function", cost}, {"cost", x.cost_value}, {"cost_history", x.cost_history}, {"agents", json::array()}};
  for (std::size_t p = 0; p < paths.size(); ++p) {
    json visits = json::array();
    for (std::size_t j = 0; j < paths[p].size(); ++j)
      visits.push_back({{"point", paths[p].order[j]},
                        {"theta", x.theta[p][j]},
                        {"rho", x.rho[p][j]},
                        {"arrival", tl.agents[p].arrival[j]},
                        {"departure", tl.agents[p].departure[j]}});
    doc["agents"].push_back({{"agent", paths[p].agent_id}, {"visits", visits}});
  }
  return doc;
}

inline CoverageAssignment assignment_from_json(const std::vector<Path>& paths, const json& doc) {
  CoverageAssignment x;
  x.cost_value = doc.value("cost", 0.0);
  const auto agents = detail::field<json>(doc, "agents", "assignment");
  if (!agents.is_array() || agents.size() != paths.size())
    throw ArtifactError("assignment: expected one entry per path");
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const std::string where = "assignment.agents[" + std::to_string(p) + "]";
    const auto visits = detail::field<json>(agents[p], "visits", where);
    if (!visits.is_array() || visits.size() != paths[p].size())
      throw ArtifactError(where + ": visits do not match the tour of agent " + std::to_string(paths[p].agent_id));
    x.theta.emplace_back();
    x.rho.emplace_back();
    for (std::size_t j = 0; j < visits.size(); ++j) {
      const std::string w = where + ".visits[" + std::to_string(j) + "]";
      if (detail::field<int>(visits[j], "point", w) != paths[p].order[j])
        throw ArtifactError(w + ": point differs from the tour order");
      const double theta = detail::field<double>(visits[j], "theta", w);
      const double rho = detail::field<double>(visits[j], "rho", w);
      if (!(theta >= 0.0 && theta <= 1.0)) throw ArtifactError(w + ": theta outside [0, 1]");
      if (!(rho >= 0.0)) throw ArtifactError(w + ": negative rho");
      x.theta.back().push_back(theta);
      x.rho.back().push_back(rho);
    }
  }
  return x;
}

// --- schedule --------------------------------------------------------------

/// Team-frame arcs of every interval; a split interval becomes two entries.
inline json schedule_intervals(const std::vector<Path>& paths, const Timeline& tl,
                               const std::vector<double>& phi, double period) {
  json agents = json::array();
  for (std::size_t p = 0; p < paths.size(); ++p) {
    json list = json::array();
    for (std::size_t j = 0; j < paths[p].size(); ++j)
      for (IntervalKind kind : {IntervalKind::coverage, IntervalKind::movement}) {
        const IntervalRef r{p, j, kind};
        const Arc arc = team_arc(tl, phi, r);
        if (arc.length <= 0.0) continue;
        json base{{"kind", to_string(kind)}, {"index", j}};
        if (kind == IntervalKind::coverage) {
          base["point"] = paths[p].order[j];
        } else {
          base["from"] = paths[p].order[j];
          base["to"] = paths[p].order[(j + 1) % paths[p].size()];
        }
        auto emit = [&](double a, double b, int part) {
          json e = base;
          e["start"] = a;
          e["end"] = b;
          e["start_time"] = a * period;
          e["end_time"] = b * period;
          if (part > 0) e["part"] = part;
          list.push_back(e);
        };
        const double end = arc.start + arc.length;
        if (arc.length >= 1.0) {
          emit(0.0, 1.0, 0);
        } else if (end > 1.0) {
          emit(arc.start, 1.0, 1);
          emit(0.0, end - 1.0, 2);
        } else {
          emit(arc.start, end, 0);
        }
      }
    agents.push_back({{"agent", paths[p].agent_id}, {"phi", phi[p]}, {"intervals", list}});
  }
  return agents;
}

inline json schedule_to_json(const TeamSchedule& ts, double period, const ScheduleOptions& opt,
                             const std::string& cost) {
  json doc{{"status", to_string(ts.status)},
           {"formulation", to_string(opt.formulation)},
           {"epsilon", opt.epsilon},
           {"big_m", opt.big_m},
           {"period", period},
           {"objective", ts.objective},
           {"objective_time", ts.objective * period},
           {"nodes", ts.nodes},
           {"reversed_agents", ts.reversed_agents},
           {"remedy", ts.remedy},
           {"conflicts",
            {{"coverage", ts.conflicts.coverage_pairs.size()},
             {"movement", ts.conflicts.movement_pairs.size()},
             {"movement_coverage", ts.conflicts.move_cover_pairs.size()}}},
           {"paths", paths_to_json(ts.paths, period)},
           {"assignment", assignment_to_json(ts.paths, ts.assignment, cost)}};
  doc["agents"] = ts.has_solution() ? schedule_intervals(ts.paths, ts.timeline, ts.phi, period) : json::array();
  return doc;
}

struct LoadedSchedule {
  std::string status;
  std::vector<Path> paths;
  CoverageAssignment assignment;
  std::vector<double> phi;
  double period = 0.0;
  double epsilon = 0.0;
  double objective = 0.0;
};

inline LoadedSchedule schedule_from_json(const Scenario& s, const json& doc) {
  LoadedSchedule out;
  out.status = detail::field<std::string>(doc, "status", "schedule");
  const LoadedPaths lp = paths_from_json(s, detail::field<json>(doc, "paths", "schedule"));
  out.paths = lp.paths;
  out.period = lp.period;
  out.assignment = assignment_from_json(out.paths, detail::field<json>(doc, "assignment", "schedule"));
  out.epsilon = detail::field<double>(doc, "epsilon", "schedule");
  out.objective = detail::field<double>(doc, "objective", "schedule");
  const auto agents = detail::field<json>(doc, "agents", "schedule");
  if (agents.size() != out.paths.size()) throw ArtifactError("schedule: no shifts (status " + out.status + ")");
  for (std::size_t p = 0; p < agents.size(); ++p) {
    const double phi = detail::field<double>(agents[p], "phi", "schedule.agents[" + std::to_string(p) + "]");
    if (!(phi >= 0.0 && phi < 1.0)) throw ArtifactError("schedule: phi outside [0, 1)");
    out.phi.push_back(phi);
  }
  return out;
}

// --- simulation ------------------------------------------------------------

/// One row per kept sample: time, agent positions, then Z, Z* and rate per point.
inline void write_trace_csv(const std::filesystem::path& path, const SimulationTrace& trace, std::size_t stride = 1) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out.precision(10);
  const auto& paths = trace.plan.paths();
  const auto& points = trace.plan.scenario().points;
  out << "time";
  for (const auto& p : paths) out << ",x" << p.agent_id << ",y" << p.agent_id;
  for (const auto& q : points) out << ",Z" << q.id << ",Zstar" << q.id << ",rate" << q.id;
  out << '\n';
  for (std::size_t k = 0; k < trace.samples.size(); k += std::max<std::size_t>(stride, 1)) {
    const auto& smp = trace.samples[k];
    out << smp.time;
    for (const auto& pos : smp.positions) {
      if (pos)
        out << ',' << pos->x << ',' << pos->y;
      else
        out << ",,";
    }
    for (std::size_t q = 0; q < points.size(); ++q)
      out << ',' << smp.delivered[q] << ',' << smp.required[q] << ',' << smp.rate[q];
    out << '\n';
  }
}

inline json metrics_to_json(const Metrics& m) {
  return {{"iterations", m.iterations},
          {"movements_per_agent", m.movements_per_agent},
          {"total_coverage_fraction", m.total_coverage_fraction},
          {"max_uncovered_time", m.max_uncovered_time},
          {"max_normalized_production", m.max_normalized_production},
          {"homogeneity", m.homogeneity},
          {"quality_integral", m.quality_integral},
          {"simultaneous_motion", m.simultaneous_motion}};
}

}  // namespace pcov
