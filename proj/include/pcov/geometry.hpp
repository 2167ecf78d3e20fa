#pragma once
// Planar primitives and the collision predicates that decide which pairs of
// plan elements need scheduling constraints.

#include <algorithm>
#include <cmath>

namespace pcov {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Segment {
  Point2 start;
  Point2 end;
};

/// Slack applied to the strict `distance < r1 + r2` test so that exact ties
/// always resolve to "no conflict".
inline constexpr double kConflictTolerance = 1e-9;

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double point_segment_distance(Point2 p, const Segment& s) {
  const double dx = s.end.x - s.start.x;
  const double dy = s.end.y - s.start.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, s.start);
  double t = ((p.x - s.start.x) * dx + (p.y - s.start.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, Point2{s.start.x + t * dx, s.start.y + t * dy});
}

namespace detail {

inline double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool on_segment(Point2 p, const Segment& s) {
  return std::min(s.start.x, s.end.x) <= p.x && p.x <= std::max(s.start.x, s.end.x) &&
         std::min(s.start.y, s.end.y) <= p.y && p.y <= std::max(s.start.y, s.end.y);
}

inline int orientation(Point2 o, Point2 a, Point2 b) {
  const double c = cross(o, a, b);
  return (c > 0.0) - (c < 0.0);
}

inline bool segments_intersect(const Segment& s1, const Segment& s2) {
  const int o1 = orientation(s1.start, s1.end, s2.start);
  const int o2 = orientation(s1.start, s1.end, s2.end);
  const int o3 = orientation(s2.start, s2.end, s1.start);
  const int o4 = orientation(s2.start, s2.end, s1.end);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s2.start, s1)) return true;
  if (o2 == 0 && on_segment(s2.end, s1)) return true;
  if (o3 == 0 && on_segment(s1.start, s2)) return true;
  if (o4 == 0 && on_segment(s1.end, s2)) return true;
  return false;
}

}  // namespace detail

/// Minimum distance over all point pairs; zero iff the segments intersect.
/// For disjoint segments the minimum is attained at an endpoint of one of them.
inline double segment_segment_distance(const Segment& s1, const Segment& s2) {
  if (detail::segments_intersect(s1, s2)) return 0.0;
  return std::min({point_segment_distance(s1.start, s2), point_segment_distance(s1.end, s2),
                   point_segment_distance(s2.start, s1), point_segment_distance(s2.end, s1)});
}

inline bool movement_conflict(const Segment& s1, const Segment& s2, double r1, double r2) {
  return segment_segment_distance(s1, s2) < r1 + r2 - kConflictTolerance;
}

inline bool move_cover_conflict(const Segment& s, Point2 q, double r1, double r2) {
  return point_segment_distance(q, s) < r1 + r2 - kConflictTolerance;
}

}  // namespace pcov
