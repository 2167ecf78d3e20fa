#pragma once
// Problem instance: interest points with required rates and the agents that
// serve them. Loaded from a JSON document and validated on construction.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcov/geometry.hpp"

namespace pcov {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InterestPoint {
  int id = 0;
  Point2 position;
  double required_rate = 0.0;  // P*(q)

  friend bool operator==(const InterestPoint&, const InterestPoint&) = default;
};

struct Agent {
  int id = 0;
  double radius = 0.0;
  double speed = 0.0;
  std::optional<Point2> home;
  std::vector<int> reachable;              // sorted point ids
  std::map<int, double> max_production;    // resolved for every reachable point

  bool reaches(int point) const { return std::binary_search(reachable.begin(), reachable.end(), point); }
  double max_rate(int point) const { return max_production.at(point); }

  friend bool operator==(const Agent&, const Agent&) = default;
};

struct Scenario {
  std::map<std::string, std::string> units;
  std::vector<InterestPoint> points;  // indexed by id
  std::vector<Agent> agents;          // indexed by id
  // Optional per (agent, point) time weights used by f5/f6.
  std::map<std::pair<int, int>, double> weights;

  const InterestPoint& point(int id) const { return points.at(static_cast<std::size_t>(id)); }
  const Agent& agent(int id) const { return agents.at(static_cast<std::size_t>(id)); }

  /// Agents whose reachable set contains the point (I_q).
  std::vector<int> visitors(int point_id) const {
    std::vector<int> out;
    for (const auto& a : agents)
      if (a.reaches(point_id)) out.push_back(a.id);
    return out;
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& entity, const std::string& field, const std::string& what) {
  throw ScenarioError(entity + ": field '" + field + "': " + what);
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& entity) {
  if (!obj.is_object() || !obj.contains(key)) fail(entity, key, "missing");
  return obj.at(key);
}

inline double require_number(const nlohmann::json& obj, const char* key, const std::string& entity) {
  const auto& v = require(obj, key, entity);
  if (!v.is_number()) fail(entity, key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(entity, key, "not finite");
  return d;
}

inline int require_id(const nlohmann::json& obj, const std::string& entity) {
  const auto& v = require(obj, "id", entity);
  if (!v.is_number_integer()) fail(entity, "id", "expected an integer");
  return v.get<int>();
}

inline Point2 parse_point(const nlohmann::json& obj, const std::string& entity) {
  return {require_number(obj, "x", entity), require_number(obj, "y", entity)};
}

}  // namespace detail

/// Checks every structural invariant; throws ScenarioError naming the entity.
inline void validate(const Scenario& s) {
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const auto& p = s.points[k];
    const std::string name = "point " + std::to_string(p.id);
    if (p.id != static_cast<int>(k)) detail::fail(name, "id", "ids must be unique and dense (expected " + std::to_string(k) + ")");
    if (!std::isfinite(p.position.x) || !std::isfinite(p.position.y)) detail::fail(name, "x/y", "not finite");
    if (!(p.required_rate >= 0.0)) detail::fail(name, "required_rate", "must be >= 0");
  }
  std::vector<bool> covered(s.points.size(), false);
  for (std::size_t k = 0; k < s.agents.size(); ++k) {
    const auto& a = s.agents[k];
    const std::string name = "agent " + std::to_string(a.id);
    if (a.id != static_cast<int>(k)) detail::fail(name, "id", "ids must be unique and dense (expected " + std::to_string(k) + ")");
    if (!(a.radius > 0.0)) detail::fail(name, "radius", "must be > 0");
    if (!(a.speed > 0.0)) detail::fail(name, "speed", "must be > 0");
    if (!std::is_sorted(a.reachable.begin(), a.reachable.end()) ||
        std::adjacent_find(a.reachable.begin(), a.reachable.end()) != a.reachable.end())
      detail::fail(name, "reachable", "must be sorted and duplicate-free");
    for (int q : a.reachable) {
      if (q < 0 || q >= static_cast<int>(s.points.size()))
        detail::fail(name, "reachable", "unknown point id " + std::to_string(q));
      covered[static_cast<std::size_t>(q)] = true;
      auto it = a.max_production.find(q);
      if (it == a.max_production.end()) detail::fail(name, "max_production", "no rate for point " + std::to_string(q));
      if (!(it->second > 0.0) || !std::isfinite(it->second))
        detail::fail(name, "max_production", "rate for point " + std::to_string(q) + " must be > 0");
    }
    for (const auto& [q, rate] : a.max_production)
      if (!a.reaches(q)) detail::fail(name, "max_production", "point " + std::to_string(q) + " is not reachable");
  }
  for (std::size_t q = 0; q < covered.size(); ++q)
    if (!covered[q]) detail::fail("point " + std::to_string(q), "reachable", "uncovered point: no agent can reach it");
  for (const auto& [key, w] : s.weights) {
    const std::string name = "weight (agent " + std::to_string(key.first) + ", point " + std::to_string(key.second) + ")";
    if (key.first < 0 || key.first >= static_cast<int>(s.agents.size()) || !s.agent(key.first).reaches(key.second))
      detail::fail(name, "agent/point", "pair is not a reachable agent-point pair");
    if (!(w > 0.0)) detail::fail(name, "value", "must be > 0");
  }
}

inline Scenario load_scenario(const nlohmann::json& doc) {
  Scenario s;
  if (!doc.is_object()) throw ScenarioError("document: expected an object");
  if (doc.contains("units")) {
    if (!doc["units"].is_object()) detail::fail("document", "units", "expected an object");
    for (const auto& [k, v] : doc["units"].items()) {
      if (!v.is_string()) detail::fail("units", k, "expected a string");
      s.units[k] = v.get<std::string>();
    }
  }
  const auto& pts = detail::require(doc, "points", "document");
  if (!pts.is_array()) detail::fail("document", "points", "expected a list");
  std::map<int, InterestPoint> by_id;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::string entity = "points[" + std::to_string(k) + "]";
    InterestPoint p;
    p.id = detail::require_id(pts[k], entity);
    const std::string name = "point " + std::to_string(p.id);
    p.position = detail::parse_point(pts[k], name);
    p.required_rate = detail::require_number(pts[k], "required_rate", name);
    if (!by_id.emplace(p.id, p).second) detail::fail(name, "id", "duplicate point id");
  }
  for (auto& [id, p] : by_id) s.points.push_back(p);

  const auto& ags = detail::require(doc, "agents", "document");
  if (!ags.is_array()) detail::fail("document", "agents", "expected a list");
  std::map<int, Agent> agents_by_id;
  for (std::size_t k = 0; k < ags.size(); ++k) {
    const std::string entity = "agents[" + std::to_string(k) + "]";
    const auto& j = ags[k];
    Agent a;
    a.id = detail::require_id(j, entity);
    const std::string name = "agent " + std::to_string(a.id);
    a.radius = detail::require_number(j, "radius", name);
    a.speed = detail::require_number(j, "speed", name);
    if (j.contains("home") && !j["home"].is_null()) a.home = detail::parse_point(j["home"], name + " home");
    const auto& reach = detail::require(j, "reachable", name);
    if (!reach.is_array()) detail::fail(name, "reachable", "expected a list of point ids");
    for (const auto& q : reach) {
      if (!q.is_number_integer()) detail::fail(name, "reachable", "expected integer point ids");
      a.reachable.push_back(q.get<int>());
    }
    std::sort(a.reachable.begin(), a.reachable.end());
    if (std::adjacent_find(a.reachable.begin(), a.reachable.end()) != a.reachable.end())
      detail::fail(name, "reachable", "duplicate point id");
    const auto& mp = detail::require(j, "max_production", name);
    if (mp.is_number()) {
      for (int q : a.reachable) a.max_production[q] = mp.get<double>();
    } else if (mp.is_object()) {
      double fallback = std::nan("");
      if (mp.contains("default")) {
        if (!mp["default"].is_number()) detail::fail(name, "max_production.default", "expected a number");
        fallback = mp["default"].get<double>();
      }
      for (int q : a.reachable) a.max_production[q] = fallback;
      for (const auto& [key, v] : mp.items()) {
        if (key == "default") continue;
        if (!v.is_number()) detail::fail(name, "max_production." + key, "expected a number");
        int q = 0;
        try {
          std::size_t used = 0;
          q = std::stoi(key, &used);
          if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
          detail::fail(name, "max_production." + key, "key must be a point id");
        }
        a.max_production[q] = v.get<double>();
      }
      for (int q : a.reachable)
        if (std::isnan(a.max_production[q]))
          detail::fail(name, "max_production", "no rate for point " + std::to_string(q));
    } else {
      detail::fail(name, "max_production", "expected a number or an object");
    }
    if (!agents_by_id.emplace(a.id, a).second) detail::fail(name, "id", "duplicate agent id");
  }
  for (auto& [id, a] : agents_by_id) s.agents.push_back(a);

  if (doc.contains("weights")) {
    const auto& ws = doc["weights"];
    if (!ws.is_array()) detail::fail("document", "weights", "expected a list");
    for (std::size_t k = 0; k < ws.size(); ++k) {
      const std::string entity = "weights[" + std::to_string(k) + "]";
      const auto& w = ws[k];
      const auto& ag = detail::require(w, "agent", entity);
      const auto& pt = detail::require(w, "point", entity);
      if (!ag.is_number_integer() || !pt.is_number_integer()) detail::fail(entity, "agent/point", "expected integer ids");
      s.weights[{ag.get<int>(), pt.get<int>()}] = detail::require_number(w, "value", entity);
    }
  }
  validate(s);
  return s;
}

inline Scenario load_scenario_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("document: parse error: ") + e.what());
  }
  return load_scenario(doc);
}

inline Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("document: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario_text(buf.str());
}

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json doc;
  doc["units"] = s.units;
  doc["points"] = nlohmann::json::array();
  for (const auto& p : s.points)
    doc["points"].push_back({{"id", p.id}, {"x", p.position.x}, {"y", p.position.y}, {"required_rate", p.required_rate}});
  doc["agents"] = nlohmann::json::array();
  for (const auto& a : s.agents) {
    nlohmann::json j{{"id", a.id}, {"radius", a.radius}, {"speed", a.speed}, {"reachable", a.reachable}};
    if (a.home) j["home"] = {{"x", a.home->x}, {"y", a.home->y}};
    nlohmann::json mp = nlohmann::json::object();
    for (const auto& [q, r] : a.max_production) mp[std::to_string(q)] = r;
    j["max_production"] = mp;
    doc["agents"].push_back(j);
  }
  if (!s.weights.empty()) {
    doc["weights"] = nlohmann::json::array();
    for (const auto& [key, w] : s.weights)
      doc["weights"].push_back({{"agent", key.first}, {"point", key.second}, {"value", w}});
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Necessary feasibility conditions (not sufficient).

struct CapacityShortfall {
  int point = 0;
  double required = 0.0;
  double available = 0.0;  // sum of max production over visiting agents
};

struct MotionOverrun {
  int agent = 0;
  double normalized_moving_time = 0.0;
};

struct FeasibilityReport {
  std::vector<CapacityShortfall> capacity;
  std::vector<MotionOverrun> motion;

  bool ok() const { return capacity.empty() && motion.empty(); }

  std::string describe() const {
    std::ostringstream os;
    for (const auto& c : capacity)
      os << "point " << c.point << ": required rate " << c.required << " exceeds total max production "
         << c.available << "; ";
    for (const auto& m : motion)
      os << "agent " << m.agent << ": normalized moving time " << m.normalized_moving_time << " >= 1; ";
    return os.str();
  }
};

/// (a) flags points whose visitors cannot deliver P*(q) even covering the
/// whole period; (b) flags agents whose tour time fills the period. Pass the
/// per-agent tour times and the period to enable (b).
inline FeasibilityReport necessary_feasibility_check(const Scenario& s, const std::vector<double>& tour_times = {},
                                                     std::optional<double> period = std::nullopt) {
  FeasibilityReport report;
  for (const auto& p : s.points) {
    double available = 0.0;
    for (const auto& a : s.agents)
      if (a.reaches(p.id)) available += a.max_rate(p.id);
    if (available < p.required_rate * (1.0 - 1e-12)) report.capacity.push_back({p.id, p.required_rate, available});
  }
  if (period && *period > 0.0) {
    for (std::size_t i = 0; i < tour_times.size(); ++i) {
      const double m = tour_times[i] / *period;
      if (m >= 1.0) report.motion.push_back({static_cast<int>(i), m});
    }
  }
  return report;
}

}  // namespace pcov
