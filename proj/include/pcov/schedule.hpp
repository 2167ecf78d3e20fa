#pragma once
// Phase shifts for the individual periodic plans so that the team plan is
// collision free, minimizing the time two agents move simultaneously.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pcov/coverage.hpp"
#include "pcov/geometry.hpp"
#include "pcov/milp.hpp"

namespace pcov {

// Which transcription of the constraint blocks to build. `literal` gives each
// block its own split-indicator combination and keeps the selector/case
// structure of the overlap objective. `consistent` uses one
// split indicator for every block, closes the wrap-around gap and models the
// overlap exactly; it is the default.
enum class Formulation { literal, consistent };

inline const char* to_string(Formulation f) { return f == Formulation::literal ? "literal" : "consistent"; }

struct ScheduleOptions {
  double big_m = 10.0;
  double epsilon = 1e-3;
  Formulation formulation = Formulation::consistent;
  bool reverse_on_infeasible = true;
  MipOptions mip = [] {
    MipOptions m;
    m.node_limit = 5000;  // hard instances end as feasible or no_incumbent
    return m;
  }();
};

enum class IntervalKind { coverage, movement };

inline const char* to_string(IntervalKind k) { return k == IntervalKind::coverage ? "coverage" : "movement"; }

struct IntervalRef {
  std::size_t path = 0;
  std::size_t index = 0;
  IntervalKind kind = IntervalKind::coverage;

  friend bool operator==(const IntervalRef&, const IntervalRef&) = default;
};

inline std::string describe(const IntervalRef& r, const std::vector<Path>& paths) {
  std::ostringstream os;
  os << to_string(r.kind) << " " << r.index << " of agent " << paths[r.path].agent_id;
  return os.str();
}

using IntervalPair = std::pair<IntervalRef, IntervalRef>;

struct ConflictSet {
  std::vector<IntervalPair> coverage_pairs;    // same point, different agents
  std::vector<IntervalPair> movement_pairs;    // movement segments closer than r1 + r2
  std::vector<IntervalPair> move_cover_pairs;  // first: movement, second: coverage of another agent

  bool empty() const { return coverage_pairs.empty() && movement_pairs.empty() && move_cover_pairs.empty(); }
};

/// Local [start, end] of an interval within the agent's own period.
inline std::pair<double, double> local_interval(const Timeline& tl, const IntervalRef& r) {
  const AgentTimeline& at = tl.agents[r.path];
  if (r.kind == IntervalKind::coverage) return {at.arrival[r.index], at.departure[r.index]};
  return {at.move_start[r.index], at.move_end[r.index]};
}

inline Segment movement_segment(const Scenario& s, const Path& p, std::size_t j) {
  return {s.point(p.order[j]).position, s.point(p.order[(j + 1) % p.size()]).position};
}

namespace detail {

constexpr double kMinDuration = 1e-12;

inline bool has_duration(const Timeline& tl, const IntervalRef& r) {
  const auto [a, b] = local_interval(tl, r);
  return b - a > kMinDuration;
}

}  // namespace detail

/// Pairs of intervals of different agents that could collide if they were
/// simultaneous. Intervals of zero duration occupy no time and are skipped.
inline ConflictSet detect_conflicts(const Scenario& s, const std::vector<Path>& paths, const Timeline& tl) {
  ConflictSet out;
  for (std::size_t p1 = 0; p1 < paths.size(); ++p1)
    for (std::size_t p2 = 0; p2 < paths.size(); ++p2) {
      if (p1 == p2) continue;
      const Agent& a1 = s.agent(paths[p1].agent_id);
      const Agent& a2 = s.agent(paths[p2].agent_id);
      for (std::size_t j1 = 0; j1 < paths[p1].size(); ++j1) {
        const IntervalRef m1{p1, j1, IntervalKind::movement};
        const IntervalRef c1{p1, j1, IntervalKind::coverage};
        for (std::size_t j2 = 0; j2 < paths[p2].size(); ++j2) {
          const IntervalRef m2{p2, j2, IntervalKind::movement};
          const IntervalRef c2{p2, j2, IntervalKind::coverage};
          if (p1 < p2 && paths[p1].order[j1] == paths[p2].order[j2] && detail::has_duration(tl, c1) &&
              detail::has_duration(tl, c2))
            out.coverage_pairs.push_back({c1, c2});
          if (p1 < p2 && detail::has_duration(tl, m1) && detail::has_duration(tl, m2) &&
              movement_conflict(movement_segment(s, paths[p1], j1), movement_segment(s, paths[p2], j2), a1.radius,
                                a2.radius))
            out.movement_pairs.push_back({m1, m2});
          if (detail::has_duration(tl, m1) && detail::has_duration(tl, c2) &&
              move_cover_conflict(movement_segment(s, paths[p1], j1), s.point(paths[p2].order[j2]).position,
                                  a1.radius, a2.radius))
            out.move_cover_pairs.push_back({m1, c2});
        }
      }
    }
  return out;
}

/// Sparse affine expression over MILP variables.
struct Affine {
  double constant = 0.0;
  std::vector<std::pair<std::size_t, double>> terms;

  Affine() = default;
  Affine(double c) : constant(c) {}  // NOLINT: implicit on purpose
  static Affine var(std::size_t v, double coef = 1.0) {
    Affine a;
    a.terms.push_back({v, coef});
    return a;
  }
  Affine& operator+=(const Affine& o) {
    constant += o.constant;
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    return *this;
  }
  Affine& operator*=(double k) {
    constant *= k;
    for (auto& t : terms) t.second *= k;
    return *this;
  }
  friend Affine operator+(Affine a, const Affine& b) { return a += b; }
  friend Affine operator-(Affine a, Affine b) { return a += (b *= -1.0); }
  friend Affine operator*(double k, Affine a) { return a *= k; }
};

struct ScheduleModel {
  MixedIntegerProgram mip;
  Formulation formulation = Formulation::consistent;
  std::vector<std::string> ub_family;  // constraint family of every inequality row
  std::vector<std::string> eq_family;
  std::size_t reference = 0;           // path whose shift is fixed at zero
  std::vector<std::size_t> phi;        // per path (npos for empty paths)
  std::vector<std::vector<std::size_t>> arrive_wrap;  // c^a per coverage
  std::vector<std::vector<std::size_t>> depart_wrap;  // c^d per coverage
  std::vector<std::size_t> last_wrap;                 // c^a of the end of the final movement
  std::vector<std::size_t> objective_vars;

  // Bookkeeping for completing a relaxation into a full point.
  struct SeparationBlock {
    std::size_t binary, first_row, row_count;
  };
  struct OverlapCopy {
    std::size_t x, z, u, v;
    double lmin;
    Affine p, q, gate;
  };
  std::vector<SeparationBlock> separations;
  std::vector<OverlapCopy> overlaps;
  Timeline timeline;
  double big_m = 10.0;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Point of the consistent model built around the shifts of `relaxation`:
  /// wrap binaries from the shifted times, each separation binary set to the
  /// first order its rows accept, overlap selectors at their cheapest choice.
  /// The caller still has to check it against every row.
  std::optional<std::vector<double>> complete(const std::vector<double>& relaxation) const;

  std::size_t count(const std::string& family) const {
    return static_cast<std::size_t>(std::count(ub_family.begin(), ub_family.end(), family) +
                                    std::count(eq_family.begin(), eq_family.end(), family));
  }
};

namespace detail {

class ModelBuilder {
 public:
  ModelBuilder(ScheduleModel& m, double big_m) : m_(m), R(big_m) {}

  std::size_t continuous(double lo, double hi, double cost = 0.0) { return m_.mip.base.add_variable(cost, lo, hi); }
  // Priority 1 for binaries that decide feasibility, 0 for objective selectors.
  std::size_t binary(double lo = 0.0, double hi = 1.0, int priority = 1) {
    const std::size_t v = m_.mip.base.add_variable(0.0, lo, hi);
    m_.mip.binaries.push_back(v);
    m_.mip.priority.push_back(priority);
    return v;
  }

  // lhs <= rhs
  void le(const Affine& lhs, const Affine& rhs, const std::string& family) {
    const Affine d = lhs - rhs;
    std::vector<double> row(m_.mip.base.num_vars(), 0.0);
    for (const auto& [v, c] : d.terms) row[v] += c;
    m_.mip.base.ub_matrix.push_back(std::move(row));
    m_.mip.base.ub_rhs.push_back(-d.constant);
    m_.ub_family.push_back(family);
  }
  void eq(const Affine& lhs, const Affine& rhs, const std::string& family) {
    const Affine d = lhs - rhs;
    std::vector<double> row(m_.mip.base.num_vars(), 0.0);
    for (const auto& [v, c] : d.terms) row[v] += c;
    m_.mip.base.eq_matrix.push_back(std::move(row));
    m_.mip.base.eq_rhs.push_back(-d.constant);
    m_.eq_family.push_back(family);
  }

  ScheduleModel& m_;
  const double R;
};

}  // namespace detail

/// Builds the scheduling MILP for the given conflicts. Rows are tagged with
/// their constraint family: wrap_arrival, wrap_departure, wrap_last, order,
/// cc, mm, mc, objective.
inline ScheduleModel build_schedule_milp(const ConflictSet& conflicts, const std::vector<Path>& paths, const Timeline& tl,
                                         const ScheduleOptions& opt) {
  if (!(opt.epsilon > 0.0)) throw std::invalid_argument("build_schedule_milp: epsilon must be positive");
  if (opt.big_m < 4.0) throw std::invalid_argument("build_schedule_milp: big_m must be at least 4");
  ScheduleModel m;
  m.formulation = opt.formulation;
  m.timeline = tl;
  m.big_m = opt.big_m;
  detail::ModelBuilder b(m, opt.big_m);
  const double R = opt.big_m, eps = opt.epsilon;
  const bool literal = opt.formulation == Formulation::literal;
  using V = Affine;

  const std::size_t np = paths.size();
  m.phi.assign(np, ScheduleModel::npos);
  m.arrive_wrap.assign(np, {});
  m.depart_wrap.assign(np, {});
  m.last_wrap.assign(np, ScheduleModel::npos);
  m.reference = np;
  for (std::size_t p = 0; p < np; ++p)
    if (!paths[p].empty()) {
      m.reference = p;
      break;
    }

  // Shifts and wrap binaries. The reference agent's plan is not shifted, so
  // none of its times wrap; the first arrival of every agent is the shift
  // itself and never wraps either.
  for (std::size_t p = 0; p < np; ++p) {
    if (paths[p].empty()) continue;
    const bool ref = p == m.reference;
    const std::size_t n = paths[p].size();
    const AgentTimeline& at = tl.agents[p];
    m.phi[p] = b.continuous(0.0, ref ? 0.0 : 1.0);
    const V phi = V::var(m.phi[p]);
    for (std::size_t j = 0; j < n; ++j) {
      const bool fixed = ref || j == 0;
      m.arrive_wrap[p].push_back(b.binary(0.0, fixed ? 0.0 : 1.0));
      if (!fixed) {
        const V c = V::var(m.arrive_wrap[p][j]);
        b.le(phi + at.arrival[j], 1.0 + R * c, "wrap_arrival");
        b.le(-1.0 * (phi + at.arrival[j]), -1.0 + R * (1.0 - c), "wrap_arrival");
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      m.depart_wrap[p].push_back(b.binary(0.0, ref ? 0.0 : 1.0));
      if (!ref) {
        const V c = V::var(m.depart_wrap[p][j]);
        b.le(phi + at.departure[j], 1.0 + R * c, "wrap_departure");
        b.le(-1.0 * (phi + at.departure[j]), -1.0 + R * (1.0 - c), "wrap_departure");
      }
    }
    m.last_wrap[p] = b.binary(0.0, ref ? 0.0 : 1.0);
    if (!ref) {
      const V c = V::var(m.last_wrap[p]);
      b.le(phi + at.move_end.back(), 1.0 + R * c, "wrap_last");
      b.le(-1.0 * (phi + at.move_end.back()), -1.0 + R * (1.0 - c), "wrap_last");
      b.le(V::var(m.depart_wrap[p][n - 1]), c, "wrap_last");
      for (std::size_t j = 1; j < n; ++j) b.le(V::var(m.arrive_wrap[p][j]), V::var(m.depart_wrap[p][j]), "order");
      for (std::size_t j = 0; j + 1 < n; ++j)
        b.le(V::var(m.depart_wrap[p][j]), V::var(m.arrive_wrap[p][j + 1]), "order");
    }
  }

  // Team-frame endpoints of an interval and its wrap binaries.
  struct Frame {
    V start, end;
    std::size_t start_bin, end_bin;
    double length;
  };
  auto frame = [&](const IntervalRef& r) {
    const std::size_t p = r.path, j = r.index;
    const auto [t0, t1] = local_interval(tl, r);
    const V phi = V::var(m.phi[p]);
    Frame f;
    if (r.kind == IntervalKind::coverage) {
      f.start_bin = m.arrive_wrap[p][j];
      f.end_bin = m.depart_wrap[p][j];
    } else {
      f.start_bin = m.depart_wrap[p][j];
      f.end_bin = j + 1 < paths[p].size() ? m.arrive_wrap[p][j + 1] : m.last_wrap[p];
    }
    f.start = phi + t0 - V::var(f.start_bin);
    f.end = phi + t1 - V::var(f.end_bin);
    f.length = t1 - t0;
    return f;
  };
  // 1 when the interval wraps past the end of the period.
  auto split = [](const Frame& f) { return V::var(f.end_bin) - V::var(f.start_bin); };

  // Two groups of rows keeping X1 and X2 apart; `gate1` / `gate2` release the
  // last row of the group in which X1 / X2 is the later interval.
  auto separate = [&](const Frame& x1, const Frame& x2, const V& gate1, const V& gate2, const std::string& family) {
    const std::size_t cvar = b.binary();
    const std::size_t first_row = m.mip.base.ub_matrix.size();
    const V c = V::var(cvar);
    const V off = 1.0 - c;  // group 1 active when c = 1
    // The earlier interval must not wrap. An interval covering the whole
    // period has equal team-frame start and end, so only its split indicator
    // tells it from an empty one.
    const V wraps1 = literal ? x1.start - x1.end : split(x1);
    const V wraps2 = literal ? x2.start - x2.end : split(x2);
    b.le(x1.start - x2.start, R * off, family);
    b.le(wraps1, (literal ? R : 1.0) * off, family);
    b.le(x1.end - x2.start, -eps + R * off, family);
    b.le(x2.end - x1.start, -eps + R * off + R * gate2, family);
    b.le(x2.start - x1.start, R * c, family);
    b.le(wraps2, (literal ? R : 1.0) * c, family);
    b.le(x2.end - x1.start, -eps + R * c, family);
    b.le(x1.end - x2.start, -eps + R * c + R * gate1, family);
    if (!literal) {
      // The earlier interval must also clear the later one's end across the
      // period boundary.
      b.le(x2.end - x1.start, 1.0 - eps + R * off, family);
      b.le(x1.end - x2.start, 1.0 - eps + R * c, family);
    }
    m.separations.push_back({cvar, first_row, m.mip.base.ub_matrix.size() - first_row});
  };

  for (const auto& [r1, r2] : conflicts.coverage_pairs) {
    const Frame x1 = frame(r1), x2 = frame(r2);
    if (literal)
      separate(x1, x2, 1.0 - V::var(x1.end_bin) + V::var(x1.start_bin), 1.0 - V::var(x2.end_bin) + V::var(x2.start_bin),
               "cc");
    else
      separate(x1, x2, 1.0 - split(x1), 1.0 - split(x2), "cc");
  }
  for (const auto& [r1, r2] : conflicts.movement_pairs) {
    const Frame x1 = frame(r1), x2 = frame(r2);
    if (literal)
      separate(x1, x2, 1.0 - V::var(x1.start_bin) + V::var(x1.end_bin), 1.0 - V::var(x2.start_bin) + V::var(x2.end_bin),
               "mm");
    else
      separate(x1, x2, 1.0 - split(x1), 1.0 - split(x2), "mm");
  }
  for (const auto& [r1, r2] : conflicts.move_cover_pairs) {
    const Frame x1 = frame(r1), x2 = frame(r2);
    if (literal)
      separate(x1, x2, 1.0 - V::var(x1.start_bin) + V::var(x1.end_bin), 1.0 + V::var(x2.end_bin) - V::var(x2.start_bin),
               "mc");
    else
      separate(x1, x2, 1.0 - split(x1), 1.0 - split(x2), "mc");
  }

  // Objective: pairwise overlap of movements of different agents.
  auto conflicting = [&](const IntervalRef& a, const IntervalRef& c) {
    for (const auto& [u, v] : conflicts.movement_pairs)
      if ((u == a && v == c) || (u == c && v == a)) return true;
    return false;
  };
  for (std::size_t p1 = 0; p1 < np; ++p1)
    for (std::size_t p2 = p1 + 1; p2 < np; ++p2)
      for (std::size_t j1 = 0; j1 < paths[p1].size(); ++j1)
        for (std::size_t j2 = 0; j2 < paths[p2].size(); ++j2) {
          const IntervalRef r1{p1, j1, IntervalKind::movement}, r2{p2, j2, IntervalKind::movement};
          if (!detail::has_duration(tl, r1) || !detail::has_duration(tl, r2)) continue;
          const Frame f1 = frame(r1), f2 = frame(r2);
          const std::string fam = "objective";
          if (literal) {
            const std::size_t x = b.continuous(-kInf, kInf), z = b.continuous(0.0, kInf, 1.0);
            m.objective_vars.push_back(z);
            const V X = V::var(x);
            std::size_t e[4];
            for (auto& v : e) v = b.binary(0.0, 1.0, 0);
            const V e1 = V::var(e[0]), e4 = V::var(e[3]);
            const std::size_t b1v = b.binary(0.0, 1.0, 0), b2v = b.binary(0.0, 1.0, 0);
            const V b1 = V::var(b1v), b2 = V::var(b2v);
            const V ns1 = V::var(f1.end_bin) - V::var(f1.start_bin), ns2 = V::var(f2.end_bin) - V::var(f2.start_bin);
            const V sp1 = 1.0 - V::var(f1.end_bin) - V::var(f1.start_bin);
            const V sp2 = 1.0 - V::var(f2.end_bin) - V::var(f2.start_bin);
            const V& D1 = f1.start;
            const V& L1 = f1.end;
            const V& D2 = f2.start;
            const V& L2 = f2.end;
            // x >= rhs  <=>  rhs <= x
            b.le(L1 - D1 - R * e1, X, fam);
            b.le(L2 - D2 - R * e4, X, fam);
            b.le(L1 - D2 - R * e1 - R * ns1 - R * ns2, X, fam);
            b.le(L2 - D1 - R * e4 - R * ns1 - R * ns2, X, fam);
            b.le(L1 - (D2 - 1.0) - R * e1 - R * sp1 - R * sp2, X, fam);
            b.le(L2 - (D1 - 1.0) - R * e4 - R * sp1 - R * sp2, X, fam);
            b.le(D1 - L2, R * sp1 + R * ns2 + R * (1.0 - b1), fam);
            b.le(L2 - D1, R * sp1 + R * ns2 + R * b1, fam);
            b.le((L1 + 1.0) - D2 - R * e1 - R * sp1 - R * ns2 - R * (1.0 - b1), X, fam);
            b.le(L2 - D1 - R * e4 - R * sp1 - R * ns2 - R * (1.0 - b1), X, fam);
            b.le(L1 - D2 - R * e1 - R * sp1 - R * ns2 - R * b1, X, fam);
            b.le(L2 - (D1 - 1.0) - R * e4 - R * sp1 - R * ns2 - R * b1, X, fam);
            b.le(D2 - L1, R * ns1 + R * sp2 + R * (1.0 - b2), fam);
            b.le(L1 - D2, R * ns1 + R * sp2 + R * b2, fam);
            b.le(L1 - D2 - R * e1 - R * ns1 - R * sp2 - R * (1.0 - b2), X, fam);
            b.le((L2 + 1.0) - D1 - R * e4 - R * ns1 - R * sp2 - R * (1.0 - b2), X, fam);
            b.le(L1 - (D2 - 1.0) - R * e1 - R * ns1 - R * sp2 - R * b2, X, fam);
            b.le(L2 - D1 - R * e4 - R * ns1 - R * sp2 - R * b2, X, fam);
            b.eq(V::var(e[0]) + V::var(e[1]) + V::var(e[2]) + V::var(e[3]), 3.0, fam);
            b.le(X, V::var(z), fam);
            continue;
          }
          if (conflicting(r1, r2)) continue;  // kept apart by the mm rows: no overlap
          // Overlap of [S1, S1 + L1] with the copies [S2 + k, S2 + k + L2] on
          // the line; the circle overlap is their sum. Copy k = +1 can only
          // meet a wrapping X1, copy k = -1 a wrapping X2.
          const double lmin = std::min(f1.length, f2.length);
          for (int k = -1; k <= 1; ++k) {
            const std::size_t x = b.continuous(-kInf, kInf), z = b.continuous(0.0, kInf, 1.0);
            m.objective_vars.push_back(z);
            const std::size_t uvar = b.binary(0.0, 1.0, 0), vvar = b.binary(0.0, 1.0, 0);
            const V X = V::var(x), u = V::var(uvar), v = V::var(vvar);
            const V gate = k == 1 ? R * (1.0 - split(f1)) : k == -1 ? R * (1.0 - split(f2)) : V(0.0);
            const V p = f1.start + f1.length - f2.start - static_cast<double>(k);
            const V q = f2.start + static_cast<double>(k) + f2.length - f1.start;
            b.le(lmin - R * u - gate, X, fam);
            b.le(p - R * (1.0 - u) - R * v - gate, X, fam);
            b.le(q - R * (1.0 - u) - R * (1.0 - v) - gate, X, fam);
            b.le(X, V::var(z), fam);
            m.overlaps.push_back({x, z, uvar, vvar, lmin, p, q, gate});
          }
        }
  return m;
}

inline std::optional<std::vector<double>> ScheduleModel::complete(const std::vector<double>& relaxation) const {
  if (formulation != Formulation::consistent) return std::nullopt;
  const LinearProgram& lp = mip.base;
  std::vector<double> v = relaxation;
  auto set_wrap = [&](std::size_t var, double shifted) {
    v[var] = lp.lower[var] == lp.upper[var] ? lp.lower[var] : (shifted > 1.0 ? 1.0 : 0.0);
  };
  for (std::size_t p = 0; p < phi.size(); ++p) {
    if (phi[p] == npos) continue;
    const double f = std::clamp(relaxation[phi[p]], lp.lower[phi[p]], lp.upper[phi[p]]);
    v[phi[p]] = f;
    const AgentTimeline& at = timeline.agents[p];
    for (std::size_t j = 0; j < at.arrival.size(); ++j) {
      set_wrap(arrive_wrap[p][j], f + at.arrival[j]);
      set_wrap(depart_wrap[p][j], f + at.departure[j]);
    }
    set_wrap(last_wrap[p], f + at.move_end.back());
  }
  auto row_ok = [&](std::size_t r) {
    double acc = 0.0;
    const auto& row = lp.ub_matrix[r];
    for (std::size_t j = 0; j < row.size(); ++j)
      if (row[j] != 0.0) acc += row[j] * v[j];
    return acc <= lp.ub_rhs[r] + 1e-9;
  };
  for (const auto& blk : separations) {
    v[blk.binary] = 1.0;
    bool ok = true;
    for (std::size_t r = blk.first_row; r < blk.first_row + blk.row_count && ok; ++r) ok = row_ok(r);
    if (!ok) v[blk.binary] = 0.0;
  }
  auto eval = [&](const Affine& a) {
    double acc = a.constant;
    for (const auto& [var, coef] : a.terms) acc += coef * v[var];
    return acc;
  };
  const double R = big_m;
  for (const auto& oc : overlaps) {
    const double g = eval(oc.gate), pv = eval(oc.p), qv = eval(oc.q);
    double u = 0.0, w = 0.0;
    if (pv < oc.lmin && pv <= qv) u = 1.0;
    else if (qv < oc.lmin && qv < pv) u = 1.0, w = 1.0;
    v[oc.u] = u;
    v[oc.v] = w;
    const double x = std::max({oc.lmin - R * u - g, pv - R * (1.0 - u) - R * w - g, qv - R * (1.0 - u) - R * (1.0 - w) - g});
    v[oc.x] = x;
    v[oc.z] = std::max(0.0, x);
  }
  return v;
}

// Circular arcs of the unit period.

struct Arc {
  double start = 0.0;   // in [0, 1)
  double length = 0.0;  // in [0, 1]
};

inline double wrap_unit(double t) {
  double r = std::fmod(t, 1.0);
  if (r < 0.0) r += 1.0;
  if (r >= 1.0) r -= 1.0;
  return r;
}

inline Arc team_arc(const Timeline& tl, const std::vector<double>& phi, const IntervalRef& r) {
  const auto [t0, t1] = local_interval(tl, r);
  return {wrap_unit(phi[r.path] + t0), t1 - t0};
}

/// Measure of the intersection of two arcs of the unit circle.
inline double arc_overlap(const Arc& a, const Arc& b) {
  const double d = wrap_unit(b.start - a.start);  // b starts d after a
  const double first = d < a.length ? std::min(a.length - d, b.length) : 0.0;
  const double second = std::max(0.0, std::min(a.length, d + b.length - 1.0));
  return first + second;
}

/// Free time between the arcs on both sides: end of a to start of b, and end
/// of b to start of a.
inline std::pair<double, double> arc_gaps(const Arc& a, const Arc& b) {
  const double d = wrap_unit(b.start - a.start);
  return {d - a.length, 1.0 - d - b.length};
}

namespace detail {

inline double unit_mod(double t) {
  double r = std::fmod(t, 1.0);
  return r < 0.0 ? r + 1.0 : r;
}

/// Places agents one after another: each shift avoids the open arcs forbidden
/// by conflicts with agents already placed and, among the remaining
/// breakpoints, minimizes movement overlap with them. Returns nothing if some
/// agent has no admissible shift.
inline std::optional<std::vector<double>> greedy_phases(const ConflictSet& conflicts, const std::vector<Path>& paths,
                                                        const Timeline& tl, double eps) {
  std::vector<double> phi(paths.size(), 0.0);
  std::vector<bool> placed(paths.size(), false);
  struct Arc0 {
    double start, length;
  };
  auto arc_of = [&](const IntervalRef& r) {
    const auto [a, b] = local_interval(tl, r);
    return Arc0{a, b - a};
  };
  for (std::size_t k = 0; k < paths.size(); ++k) {
    if (paths[k].empty()) continue;
    bool first = true;
    for (std::size_t j = 0; j < k; ++j) first = first && !placed[j];
    if (first) {
      placed[k] = true;
      continue;
    }
    // Forbidden open arcs (lo, lo + len) of the shift.
    std::vector<std::pair<double, double>> forbidden;
    bool blocked = false;
    auto forbid = [&](const IntervalRef& mine, const IntervalRef& other) {
      const Arc0 x = arc_of(mine), y = arc_of(other);
      const double ys = phi[other.path] + y.start;
      const double len = x.length + y.length + 2.0 * eps;
      if (len >= 1.0) blocked = true;
      forbidden.push_back({unit_mod(ys - x.length - eps - x.start), len});
    };
    for (const auto* set : {&conflicts.coverage_pairs, &conflicts.movement_pairs, &conflicts.move_cover_pairs})
      for (const auto& [a, b] : *set) {
        if (a.path == k && placed[b.path]) forbid(a, b);
        if (b.path == k && placed[a.path]) forbid(b, a);
      }
    if (blocked) return std::nullopt;
    auto allowed = [&](double f) {
      for (const auto& [lo, len] : forbidden) {
        const double off = unit_mod(f - lo);
        if (off > 1e-12 && off < len - 1e-12) return false;
      }
      return true;
    };
    // Candidates: ends of forbidden arcs and alignments of movement ends.
    std::vector<double> cand{0.0};
    for (const auto& [lo, len] : forbidden) cand.push_back(unit_mod(lo)), cand.push_back(unit_mod(lo + len));
    std::vector<std::pair<IntervalRef, Arc0>> mine, theirs;
    for (std::size_t p = 0; p < paths.size(); ++p)
      for (std::size_t j = 0; j < paths[p].size(); ++j) {
        const IntervalRef r{p, j, IntervalKind::movement};
        if (!has_duration(tl, r)) continue;
        if (p == k) mine.push_back({r, arc_of(r)});
        else if (placed[p]) theirs.push_back({r, arc_of(r)});
      }
    for (const auto& [r1, x] : mine)
      for (const auto& [r2, y] : theirs)
        for (double a : {x.start, x.start + x.length})
          for (double b : {y.start, y.start + y.length}) cand.push_back(unit_mod(phi[r2.path] + b - a));
    double best = kInf, best_phi = 0.0;
    for (double f : cand) {
      if (!allowed(f)) continue;
      double total = 0.0;
      for (const auto& [r1, x] : mine)
        for (const auto& [r2, y] : theirs)
          total += arc_overlap({unit_mod(f + x.start), x.length}, {unit_mod(phi[r2.path] + y.start), y.length});
      if (total < best - 1e-12 || (total <= best + 1e-12 && f < best_phi)) best = total, best_phi = f;
    }
    if (best == kInf) return std::nullopt;
    phi[k] = best_phi;
    placed[k] = true;
  }
  return phi;
}

}  // namespace detail

enum class ScheduleStatus { optimal, feasible, infeasible, no_incumbent };

inline const char* to_string(ScheduleStatus s) {
  switch (s) {
    case ScheduleStatus::optimal: return "optimal";
    case ScheduleStatus::feasible: return "feasible";
    case ScheduleStatus::infeasible: return "infeasible";
    case ScheduleStatus::no_incumbent: return "no_incumbent";
  }
  return "?";
}

struct TeamSchedule {
  ScheduleStatus status = ScheduleStatus::infeasible;
  std::vector<double> phi;  // per path, in [0, 1); 0 for empty paths
  double objective = 0.0;   // total pairwise simultaneous-motion time (fraction of the period)
  std::size_t nodes = 0;
  std::vector<int> reversed_agents;  // agents whose tour direction was inverted
  std::vector<Path> paths;
  CoverageAssignment assignment;
  Timeline timeline;
  ConflictSet conflicts;
  std::vector<double> values;  // raw MILP solution
  std::string remedy;          // suggestions when infeasible

  bool has_solution() const { return status == ScheduleStatus::optimal || status == ScheduleStatus::feasible; }
};

/// Re-solves the model with every shift fixed. Used to test whether given
/// shifts are feasible for the MILP and to get the exact objective for them.
inline MipSolution solve_with_fixed_phases(ScheduleModel model, const std::vector<double>& phi, const MipOptions& opt = {}) {
  for (std::size_t p = 0; p < model.phi.size(); ++p) {
    if (model.phi[p] == ScheduleModel::npos) continue;
    model.mip.base.lower[model.phi[p]] = model.mip.base.upper[model.phi[p]] = phi[p];
  }
  return solve_milp(model.mip, opt);
}

/// Reorders an assignment to follow a reversed tour (same start point).
inline void reverse_assignment_row(std::vector<double>& row) {
  if (row.size() < 3) return;
  std::reverse(row.begin() + 1, row.end());
}

namespace detail {

inline TeamSchedule solve_once(const Scenario& s, const std::vector<Path>& paths, const CoverageAssignment& x,
                               const ScheduleOptions& opt) {
  TeamSchedule out;
  out.paths = paths;
  out.assignment = x;
  out.timeline = build_timeline(paths, x);
  out.conflicts = detect_conflicts(s, paths, out.timeline);
  const ScheduleModel model = build_schedule_milp(out.conflicts, paths, out.timeline, opt);
  MipOptions mopt = opt.mip;
  if (!mopt.heuristic && model.formulation == Formulation::consistent) {
    mopt.heuristic = [&model](const std::vector<double>& rel) { return model.complete(rel); };
    if (auto start = detail::greedy_phases(out.conflicts, paths, out.timeline, opt.epsilon)) {
      std::vector<double> point(model.mip.base.num_vars(), 0.0);
      for (std::size_t p = 0; p < paths.size(); ++p)
        if (model.phi[p] != ScheduleModel::npos) point[model.phi[p]] = (*start)[p];
      mopt.initial_point = model.complete(point);
    }
  }
  const MipSolution sol = solve_milp(model.mip, mopt);
  out.nodes = sol.nodes_explored;
  out.phi.assign(paths.size(), 0.0);
  switch (sol.status) {
    case MipStatus::optimal: out.status = ScheduleStatus::optimal; break;
    case MipStatus::node_limit: out.status = ScheduleStatus::feasible; break;
    case MipStatus::no_incumbent: out.status = ScheduleStatus::no_incumbent; return out;
    default: out.status = ScheduleStatus::infeasible; return out;
  }
  out.values = sol.values;
  out.objective = sol.objective_value;
  for (std::size_t p = 0; p < paths.size(); ++p)
    if (model.phi[p] != ScheduleModel::npos) out.phi[p] = sol.values[model.phi[p]];
  if (out.status == ScheduleStatus::feasible) {
    // The incumbent's selectors need not be tight; the fixed-shift program
    // gives the exact objective for these shifts.
    const MipSolution exact = solve_with_fixed_phases(model, out.phi, mopt);
    if (exact.status == MipStatus::optimal && exact.objective_value < out.objective) {
      out.objective = exact.objective_value;
      out.values = exact.values;
    }
  }
  for (double& f : out.phi) f = f >= 1.0 ? f - 1.0 : f;
  return out;
}

}  // namespace detail

/// Solves the schedule; when infeasible and allowed, retries with one agent's
/// tour direction inverted at a time (first feasible retry wins).
inline TeamSchedule solve_schedule(const Scenario& s, const std::vector<Path>& paths, const CoverageAssignment& x,
                                   const ScheduleOptions& opt = {}) {
  TeamSchedule first = detail::solve_once(s, paths, x, opt);
  if (first.has_solution() || !opt.reverse_on_infeasible) {
    if (!first.has_solution())
      first.remedy = "invert the direction of a tour, reassign points between agents, or use another cost function";
    return first;
  }
  for (std::size_t p = 0; p < paths.size(); ++p) {
    if (paths[p].size() < 3) continue;
    std::vector<Path> alt = paths;
    alt[p] = reversed(s, paths[p]);
    CoverageAssignment y = x;
    reverse_assignment_row(y.theta[p]);
    reverse_assignment_row(y.rho[p]);
    TeamSchedule retry = detail::solve_once(s, alt, y, opt);
    if (retry.has_solution()) {
      retry.reversed_agents.push_back(paths[p].agent_id);
      return retry;
    }
  }
  first.remedy = "no single tour inversion helped; reassign points between agents or use another cost function";
  return first;
}

// ---------------------------------------------------------------------------
// Independent validation with circular-interval arithmetic.

struct ScheduleViolation {
  std::string family;  // cc, mm, mc or objective
  IntervalRef first, second;
  double overlap = 0.0;
  double min_gap = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<ScheduleViolation> violations;
  double recomputed_objective = 0.0;

  bool ok() const { return violations.empty(); }
};

/// Total pairwise overlap of movements of different agents.
inline double movement_overlap_sum(const std::vector<Path>& paths, const Timeline& tl, const std::vector<double>& phi) {
  double total = 0.0;
  for (std::size_t p1 = 0; p1 < paths.size(); ++p1)
    for (std::size_t p2 = p1 + 1; p2 < paths.size(); ++p2)
      for (std::size_t j1 = 0; j1 < paths[p1].size(); ++j1)
        for (std::size_t j2 = 0; j2 < paths[p2].size(); ++j2)
          total += arc_overlap(team_arc(tl, phi, {p1, j1, IntervalKind::movement}),
                               team_arc(tl, phi, {p2, j2, IntervalKind::movement}));
  return total;
}

inline ValidationReport validate_schedule(const std::vector<double>& phi, const ConflictSet& conflicts,
                                          const std::vector<Path>& paths, const Timeline& tl, double epsilon,
                                          std::optional<double> claimed_objective = std::nullopt,
                                          double tolerance = 1e-9) {
  ValidationReport rep;
  auto check = [&](const std::vector<IntervalPair>& pairs, const char* family) {
    for (const auto& [r1, r2] : pairs) {
      const Arc a = team_arc(tl, phi, r1), b = team_arc(tl, phi, r2);
      const double ov = arc_overlap(a, b);
      const auto [g1, g2] = arc_gaps(a, b);
      const double gap = std::min(g1, g2);
      if (ov > tolerance || gap < epsilon - tolerance) {
        std::ostringstream os;
        os << family << ": " << describe(r1, paths) << " and " << describe(r2, paths);
        if (ov > tolerance)
          os << " overlap by " << ov;
        else
          os << " are only " << gap << " apart (need " << epsilon << ")";
        rep.violations.push_back({family, r1, r2, ov, gap, os.str()});
      }
    }
  };
  check(conflicts.coverage_pairs, "cc");
  check(conflicts.movement_pairs, "mm");
  check(conflicts.move_cover_pairs, "mc");
  rep.recomputed_objective = movement_overlap_sum(paths, tl, phi);
  if (claimed_objective && std::abs(*claimed_objective - rep.recomputed_objective) > 1e-6) {
    std::ostringstream os;
    os << "objective: solver reports " << *claimed_objective << " but the movements overlap for "
       << rep.recomputed_objective;
    rep.violations.push_back({"objective", {}, {}, 0.0, 0.0, os.str()});
  }
  return rep;
}

inline ValidationReport validate_schedule(const TeamSchedule& sched, double epsilon) {
  return validate_schedule(sched.phi, sched.conflicts, sched.paths, sched.timeline, epsilon, sched.objective);
}

/// Every wrap binary must be 1 exactly when its shifted time passes the end
/// of the period (either value is accepted on the boundary itself).
inline std::vector<std::string> check_wrap_consistency(const ScheduleModel& m, const std::vector<double>& values,
                                                       const Timeline& tl, double tolerance = 1e-9) {
  std::vector<std::string> issues;
  auto expect = [&](std::size_t var, double shifted, const std::string& what) {
    const double c = values[var];
    if (shifted > 1.0 + tolerance && c != 1.0) issues.push_back(what + ": time " + std::to_string(shifted) + " wraps but binary is 0");
    if (shifted < 1.0 - tolerance && c != 0.0) issues.push_back(what + ": time " + std::to_string(shifted) + " does not wrap but binary is 1");
  };
  for (std::size_t p = 0; p < m.phi.size(); ++p) {
    if (m.phi[p] == ScheduleModel::npos) continue;
    const double phi = values[m.phi[p]];
    const AgentTimeline& at = tl.agents[p];
    for (std::size_t j = 0; j < at.arrival.size(); ++j) {
      const std::string tag = "path " + std::to_string(p) + " visit " + std::to_string(j);
      expect(m.arrive_wrap[p][j], phi + at.arrival[j], tag + " arrival");
      expect(m.depart_wrap[p][j], phi + at.departure[j], tag + " departure");
    }
    expect(m.last_wrap[p], phi + at.move_end.back(), "path " + std::to_string(p) + " final movement end");
  }
  return issues;
}

}  // namespace pcov
