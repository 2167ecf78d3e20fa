// pcov: persistent coverage planner.
//
// Exit codes: 0 ok, 1 usage, 2 cannot load input, 3 coverage infeasible,
// 4 schedule infeasible, 5 verification found violations, 6 internal error.

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pcov/io.hpp"
#include "pcov/pipeline.hpp"

namespace fs = std::filesystem;
using namespace pcov;

namespace {

enum Exit { kOk = 0, kUsage = 1, kLoad = 2, kCoverage = 3, kSchedule = 4, kVerify = 5, kInternal = 6 };

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

Level log_level = Level::warn;

void log(Level l, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (l <= log_level) std::cerr << "pcov " << names[static_cast<int>(l)] << ": " << msg << '\n';
}

Level parse_level(const char* text) {
  const std::string s = text ? text : "";
  if (s == "error") return Level::error;
  if (s == "info") return Level::info;
  if (s == "debug") return Level::debug;
  return Level::warn;
}

// Raised inside a command to leave with a specific code.
struct Failure {
  int code;
  std::string message;
};

struct Common {
  std::string scenario;
  std::string output;
  std::string cost_fn = "f1";
  double theta_m_max = 0.3;
  double epsilon = 1e-3;
  double big_m = 10.0;
  double period_override = 0.0;
  std::uint64_t seed = 0;
  bool reverse_on_infeasible = true;
  bool allow_shared_coverage = false;
  double oracle_grid = 0.0;
  int periods = 10;
  std::size_t node_limit = 5000;
  std::size_t trace_stride = 1;

  PipelineConfig config() const {
    PipelineConfig c;
    try {
      c.cost_fn = parse_cost_kind(cost_fn);
    } catch (const std::invalid_argument& e) {
      throw Failure{kUsage, e.what()};
    }
    c.theta_m_max = theta_m_max;
    c.epsilon = epsilon;
    c.big_m = big_m;
    if (period_override > 0.0) c.period_override = period_override;
    c.seed = seed;
    c.reverse_on_infeasible = reverse_on_infeasible;
    c.allow_shared_coverage = allow_shared_coverage;
    if (oracle_grid > 0.0) c.oracle_grid = oracle_grid;
    c.periods = periods;
    c.node_limit = node_limit;
    return c;
  }

  fs::path out_dir() const {
    if (!output.empty()) return output;
    if (const char* env = std::getenv("PCOV_OUTPUT_DIR")) return env;
    return "pcov_out";
  }
};

void add_config_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("scenario", c.scenario, "Scenario JSON file")->required();
  cmd->add_option("-o,--output", c.output, "Output directory (default $PCOV_OUTPUT_DIR or ./pcov_out)");
  cmd->add_option("--cost-fn", c.cost_fn, "Cost function f1..f6")->capture_default_str();
  cmd->add_option("--theta-m-max", c.theta_m_max, "Largest fraction of the period spent moving")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--epsilon", c.epsilon, "Separation between constrained intervals (fraction of the period)")
      ->capture_default_str();
  cmd->add_option("--big-m", c.big_m, "Big-M constant of the schedule program")->capture_default_str();
  cmd->add_option("--period-override", c.period_override, "Fixed period in scenario time units");
  cmd->add_option("--seed", c.seed, "Seed recorded in the manifest")->capture_default_str();
  cmd->add_option("--reverse-on-infeasible", c.reverse_on_infeasible, "Retry with inverted tours")
      ->capture_default_str();
  cmd->add_flag("--allow-shared-coverage", c.allow_shared_coverage, "Let agents cover a point at the same time");
  cmd->add_option("--oracle-grid", c.oracle_grid, "Check the schedule against a grid search with this step");
  cmd->add_option("--periods", c.periods, "Simulated periods")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--node-limit", c.node_limit, "Branch-and-bound node limit")->capture_default_str();
  cmd->add_option("--trace-stride", c.trace_stride, "Keep every n-th sample in trace.csv")->capture_default_str();
}

Scenario load(const Common& c) {
  try {
    return load_scenario_file(c.scenario);
  } catch (const ScenarioError& e) {
    throw Failure{kLoad, e.what()};
  }
}

json read_artifact(const std::string& path) {
  try {
    return read_json_file(path);
  } catch (const ArtifactError& e) {
    throw Failure{kLoad, e.what()};
  }
}

json config_json(const PipelineConfig& c) {
  return {{"cost_fn", to_string(c.cost_fn)},
          {"theta_m_max", c.theta_m_max},
          {"epsilon", c.epsilon},
          {"big_m", c.big_m},
          {"period_override", c.period_override ? json(*c.period_override) : json(nullptr)},
          {"seed", c.seed},
          {"reverse_on_infeasible", c.reverse_on_infeasible},
          {"allow_shared_coverage", c.allow_shared_coverage},
          {"oracle_grid", c.oracle_grid ? json(*c.oracle_grid) : json(nullptr)},
          {"periods", c.periods},
          {"node_limit", c.node_limit}};
}

std::string iso_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void summary(const std::string& stage, const std::string& status, const std::string& rest = "") {
  std::cout << "stage=" << stage << " status=" << status << (rest.empty() ? "" : " " + rest) << std::endl;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

json optimize_artifact(const std::vector<Path>& paths, const OptimizeStage& o, const PipelineConfig& cfg) {
  const auto& sr = o.shortened;
  json doc = assignment_to_json(sr.paths, sr.assignment, to_string(cfg.cost_fn));
  doc["paths"] = paths_to_json(sr.paths, sr.period);
  doc["initial_paths"] = paths_to_json(paths, 0.0);
  doc["shortening"] = {{"iterations", sr.iterations},
                       {"removed_visits", sr.removed_points},
                       {"period_held", sr.period_held},
                       {"rolled_back", sr.rolled_back}};
  return doc;
}

json verify_report(const Scenario& s, const LoadedSchedule& ls, int periods, bool& ok) {
  const Timeline tl = build_timeline(ls.paths, ls.assignment);
  const ConflictSet c = detect_conflicts(s, ls.paths, tl);
  const ValidationReport rep = validate_schedule(ls.phi, c, ls.paths, tl, ls.epsilon, ls.objective);
  SimulationOptions so;
  so.periods = periods;
  so.epsilon = ls.epsilon;
  so.record_samples = false;
  const SimulationTrace trace = simulate(s, ls.paths, ls.assignment, ls.phi, ls.period, so);
  json doc{{"violations", json::array()}, {"collisions", json::array()}, {"recomputed_objective", rep.recomputed_objective}};
  for (const auto& v : rep.violations) doc["violations"].push_back({{"family", v.family}, {"message", v.message}});
  for (const auto& k : trace.collisions.collisions)
    doc["collisions"].push_back({{"time", k.time},
                                 {"agents", {ls.paths[k.first].agent_id, ls.paths[k.second].agent_id}},
                                 {"distance", k.distance},
                                 {"required", k.required}});
  ok = rep.ok() && trace.collisions.ok();
  return doc;
}

int cmd_pipeline(const Common& c) {
  const PipelineConfig cfg = c.config();
  const std::string started = iso_now();
  const Scenario s = load(c);
  log(Level::info, "loaded " + std::to_string(s.agents.size()) + " agents, " + std::to_string(s.points.size()) + " points");
  const PipelineResult r = run_pipeline(s, cfg, true);
  const fs::path out = c.out_dir();
  json manifest{{"config", config_json(cfg)},
                {"scenario", c.scenario},
                {"versions",
                 {{"pcov", "0.1.0"},
                  {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                        std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                  {"compiler", __VERSION__}}},
                {"stage_reached", to_string(r.reached)},
                {"error", r.error}};

  write_json_file(out / "paths.json", paths_to_json(r.plan.paths, r.plan.period));
  summary("plan", r.plan.feasibility.ok() ? "ok" : "infeasible",
          "agents=" + std::to_string(s.agents.size()) + " points=" + std::to_string(s.points.size()) +
              " period=" + num(r.plan.period));
  int code = kOk;
  if (r.optimize) {
    write_json_file(out / "assignment.json", optimize_artifact(r.plan.paths, *r.optimize, cfg));
    summary("optimize", "ok", "cost=" + num(r.optimize->shortened.assignment.cost_value) +
                                  " iterations=" + std::to_string(r.optimize->shortened.iterations) +
                                  " period=" + num(r.optimize->shortened.period));
  } else {
    summary("optimize", "infeasible");
    log(Level::error, "stage optimize: " + r.error);
    code = kCoverage;
  }
  if (r.schedule) {
    write_json_file(out / "schedule.json", schedule_to_json(*r.schedule, r.period(), cfg.schedule_options(),
                                                            to_string(cfg.cost_fn)));
    summary("schedule", r.schedule->has_solution() ? to_string(r.schedule->status) : "infeasible",
            "objective=" + num(r.schedule->objective) + " nodes=" + std::to_string(r.schedule->nodes) +
                " reversed=" + std::to_string(r.schedule->reversed_agents.size()));
    if (!r.schedule->has_solution()) {
      log(Level::error, "stage schedule: " + r.error);
      code = kSchedule;
    }
  }
  if (r.oracle) {
    manifest["oracle"] = {{"ran", r.oracle->ran},
                          {"skipped", r.oracle->skipped},
                          {"feasible", r.oracle->feasible},
                          {"objective", r.oracle->feasible ? json(r.oracle->objective) : json(nullptr)},
                          {"gap", r.oracle->gap}};
  }
  if (r.trace) {
    write_trace_csv(out / "trace.csv", *r.trace, c.trace_stride);
    write_json_file(out / "metrics.json", metrics_to_json(*r.metrics));
    const bool clean = r.validation->ok() && r.collisions->ok();
    manifest["verification"] = {{"validator_violations", r.validation->violations.size()},
                                {"collisions", r.collisions->collisions.size()}};
    summary("simulate", clean ? "ok" : "violations",
            "quality=" + num(r.metrics->quality_integral) + " simultaneous_motion=" + num(r.metrics->simultaneous_motion));
    if (!clean) {
      log(Level::error, "replay found " + std::to_string(r.validation->violations.size()) + " validator violations and " +
                            std::to_string(r.collisions->collisions.size()) + " collisions");
      code = kVerify;
    }
  }
  manifest["timestamps"] = {{"started", started}, {"finished", iso_now()}, {"seconds", r.seconds}};
  write_json_file(out / "manifest.json", manifest);
  if (!r.plan.feasibility.ok()) {
    log(Level::error, "stage plan: " + r.error);
    return kCoverage;
  }
  return code;
}

int cmd_plan(const Common& c) {
  const PipelineConfig cfg = c.config();
  const Scenario s = load(c);
  const PlanStage p = plan_stage(s, cfg);
  json doc = paths_to_json(p.paths, p.period);
  doc["feasibility"] = p.feasibility.describe();
  write_json_file(c.out_dir() / "paths.json", doc);
  summary("plan", p.feasibility.ok() ? "ok" : "infeasible", "period=" + num(p.period));
  if (!p.feasibility.ok()) {
    log(Level::error, "necessary conditions fail: " + p.feasibility.describe());
    return kCoverage;
  }
  return kOk;
}

int cmd_optimize(const Common& c, const std::string& paths_file) {
  const PipelineConfig cfg = c.config();
  const Scenario s = load(c);
  LoadedPaths lp;
  try {
    lp = paths_from_json(s, read_artifact(paths_file));
  } catch (const ArtifactError& e) {
    throw Failure{kLoad, e.what()};
  }
  try {
    const OptimizeStage o = optimize_stage(s, lp.paths, lp.period, cfg);
    write_json_file(c.out_dir() / "assignment.json", optimize_artifact(lp.paths, o, cfg));
    summary("optimize", "ok", "cost=" + num(o.shortened.assignment.cost_value) +
                                  " iterations=" + std::to_string(o.shortened.iterations));
  } catch (const CoverageInfeasible& e) {
    summary("optimize", "infeasible");
    log(Level::error, e.what());
    return kCoverage;
  }
  return kOk;
}

int cmd_schedule(const Common& c, const std::string& assignment_file) {
  const PipelineConfig cfg = c.config();
  const Scenario s = load(c);
  const json doc = read_artifact(assignment_file);
  std::vector<Path> paths;
  CoverageAssignment x;
  double period = 0.0;
  try {
    const LoadedPaths lp = paths_from_json(s, doc.at("paths"));
    paths = lp.paths;
    period = lp.period;
    x = assignment_from_json(paths, doc);
  } catch (const std::exception& e) {
    throw Failure{kLoad, std::string("assignment: ") + e.what()};
  }
  const TeamSchedule ts = solve_schedule(s, paths, x, cfg.schedule_options());
  write_json_file(c.out_dir() / "schedule.json", schedule_to_json(ts, period, cfg.schedule_options(), to_string(cfg.cost_fn)));
  summary("schedule", ts.has_solution() ? to_string(ts.status) : "infeasible", "objective=" + num(ts.objective));
  if (!ts.has_solution()) {
    log(Level::error, "schedule " + std::string(to_string(ts.status)) + ": " + ts.remedy);
    return kSchedule;
  }
  return kOk;
}

LoadedSchedule load_schedule(const Scenario& s, const std::string& file) {
  try {
    return schedule_from_json(s, read_artifact(file));
  } catch (const ArtifactError& e) {
    throw Failure{kLoad, e.what()};
  }
}

int cmd_simulate(const Common& c, const std::string& schedule_file) {
  const Scenario s = load(c);
  const LoadedSchedule ls = load_schedule(s, schedule_file);
  SimulationOptions so;
  so.periods = c.periods;
  so.epsilon = ls.epsilon;
  const SimulationTrace trace = simulate(s, ls.paths, ls.assignment, ls.phi, ls.period, so);
  const Metrics m = compute_metrics(trace, 1);
  write_trace_csv(c.out_dir() / "trace.csv", trace, c.trace_stride);
  write_json_file(c.out_dir() / "metrics.json", metrics_to_json(m));
  summary("simulate", trace.collisions.ok() ? "ok" : "collisions", "quality=" + num(m.quality_integral));
  return kOk;
}

int cmd_report(const Common& c, const std::string& schedule_file) {
  const Scenario s = load(c);
  const LoadedSchedule ls = load_schedule(s, schedule_file);
  const Timeline tl = build_timeline(ls.paths, ls.assignment);
  json doc{{"period", ls.period}, {"objective", ls.objective}, {"agents", schedule_intervals(ls.paths, tl, ls.phi, ls.period)}};
  write_json_file(c.out_dir() / "gantt.json", doc);
  summary("report", "ok", "agents=" + std::to_string(ls.paths.size()));
  return kOk;
}

int cmd_verify(const Common& c, const std::string& schedule_file) {
  const Scenario s = load(c);
  const LoadedSchedule ls = load_schedule(s, schedule_file);
  bool ok = false;
  const json doc = verify_report(s, ls, c.periods, ok);
  write_json_file(c.out_dir() / "verify.json", doc);
  summary("verify", ok ? "ok" : "violations",
          "violations=" + std::to_string(doc["violations"].size()) + " collisions=" + std::to_string(doc["collisions"].size()));
  for (const auto& v : doc["violations"]) log(Level::error, v["message"].get<std::string>());
  if (!doc["collisions"].empty()) log(Level::error, std::to_string(doc["collisions"].size()) + " sampled collisions");
  return ok ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
  log_level = parse_level(std::getenv("PCOV_LOG_LEVEL"));
  CLI::App app{"Persistent coverage planner: tours, coverage times, collision-free schedule, replay"};
  app.require_subcommand(1);

  Common common;
  std::string input;
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write all artifacts");
  add_config_flags(pipeline, common);
  auto* plan = app.add_subcommand("plan", "Initial tours and period -> paths.json");
  add_config_flags(plan, common);
  auto* optimize = app.add_subcommand("optimize", "Coverage times and productions, then shortening -> assignment.json");
  add_config_flags(optimize, common);
  optimize->add_option("--paths", input, "paths.json from plan")->required();
  auto* schedule = app.add_subcommand("schedule", "Start shifts -> schedule.json");
  add_config_flags(schedule, common);
  schedule->add_option("--assignment", input, "assignment.json from optimize")->required();
  auto* simulate_cmd = app.add_subcommand("simulate", "Replay -> trace.csv, metrics.json");
  add_config_flags(simulate_cmd, common);
  simulate_cmd->add_option("--schedule", input, "schedule.json")->required();
  auto* report = app.add_subcommand("report", "Gantt intervals -> gantt.json");
  add_config_flags(report, common);
  report->add_option("--schedule", input, "schedule.json")->required();
  auto* verify = app.add_subcommand("verify", "Interval validator and sampled collision check -> verify.json");
  add_config_flags(verify, common);
  verify->add_option("--schedule", input, "schedule.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (pipeline->parsed()) return cmd_pipeline(common);
    if (plan->parsed()) return cmd_plan(common);
    if (optimize->parsed()) return cmd_optimize(common, input);
    if (schedule->parsed()) return cmd_schedule(common, input);
    if (simulate_cmd->parsed()) return cmd_simulate(common, input);
    if (report->parsed()) return cmd_report(common, input);
    if (verify->parsed()) return cmd_verify(common, input);
  } catch (const Failure& f) {
    log(Level::error, f.message);
    return f.code;
  } catch (const ArtifactError& e) {
    log(Level::error, e.what());
    return kLoad;
  } catch (const std::exception& e) {
    log(Level::error, std::string("internal error: ") + e.what());
    return kInternal;
  }
  return kUsage;
}
