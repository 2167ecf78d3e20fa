#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pcov/geometry.hpp"

using namespace pcov;

namespace {

Point2 lerp(const Segment& s, double t) {
  return {s.start.x + t * (s.end.x - s.start.x), s.start.y + t * (s.end.y - s.start.y)};
}

// Brute-force references: dense sampling along the segments.
double sampled_point_segment(Point2 p, const Segment& s, int samples) {
  double best = INFINITY;
  for (int k = 0; k <= samples; ++k) best = std::min(best, distance(p, lerp(s, double(k) / samples)));
  return best;
}

double sampled_segment_segment(const Segment& a, const Segment& b, int samples) {
  double best = INFINITY;
  for (int k = 0; k <= samples; ++k)
    for (int l = 0; l <= samples; ++l)
      best = std::min(best, distance(lerp(a, double(k) / samples), lerp(b, double(l) / samples)));
  return best;
}

Point2 rigid(Point2 p, double angle, Point2 shift) {
  return {std::cos(angle) * p.x - std::sin(angle) * p.y + shift.x, std::sin(angle) * p.x + std::cos(angle) * p.y + shift.y};
}

Segment rigid(const Segment& s, double angle, Point2 shift) { return {rigid(s.start, angle, shift), rigid(s.end, angle, shift)}; }

}  // namespace

TEST(PointSegmentDistance, Examples) {
  EXPECT_DOUBLE_EQ(point_segment_distance({0, 1}, {{-1, 0}, {1, 0}}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({0, 0}, {{0, 0}, {5, 0}}), 0.0);
  const Segment s{{0, 0}, {1, 0}};
  const double d = point_segment_distance({3, 4}, s);
  EXPECT_NEAR(d, std::sqrt(20.0), 1e-12);
  EXPECT_NEAR(d, sampled_point_segment({3, 4}, s, 100000), 1e-6);
}

TEST(PointSegmentDistance, DegenerateSegmentIsPointDistance) {
  EXPECT_DOUBLE_EQ(point_segment_distance({3, 4}, {{0, 0}, {0, 0}}), 5.0);
}

TEST(SegmentSegmentDistance, Examples) {
  EXPECT_DOUBLE_EQ(segment_segment_distance({{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}), 1.0);
  EXPECT_DOUBLE_EQ(segment_segment_distance({{0, 0}, {1, 1}}, {{0, 1}, {1, 0}}), 0.0);
  const Segment a{{0, 0}, {1, 0}}, b{{2, 1}, {3, 1}};
  EXPECT_NEAR(segment_segment_distance(a, b), std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(segment_segment_distance(a, b), sampled_segment_segment(a, b, 1000), 1e-6);
}

TEST(SegmentSegmentDistance, CollinearOverlapAndTouching) {
  EXPECT_DOUBLE_EQ(segment_segment_distance({{0, 0}, {2, 0}}, {{1, 0}, {3, 0}}), 0.0);
  EXPECT_DOUBLE_EQ(segment_segment_distance({{0, 0}, {1, 0}}, {{1, 0}, {1, 5}}), 0.0);
  EXPECT_DOUBLE_EQ(segment_segment_distance({{0, 0}, {1, 0}}, {{2, 0}, {3, 0}}), 1.0);
}

TEST(Conflicts, MovementExamples) {
  const Segment a{{0, 0}, {1, 0}}, b{{0, 1}, {1, 1}};
  EXPECT_FALSE(movement_conflict(a, b, 0.4, 0.4));
  EXPECT_TRUE(movement_conflict(a, b, 0.6, 0.6));
  EXPECT_TRUE(movement_conflict(a, a, 1e-3, 1e-3));
  // Exact tie resolves to no conflict.
  EXPECT_FALSE(movement_conflict(a, b, 0.5, 0.5));
}

TEST(Conflicts, MoveCoverExamples) {
  const Segment a{{0, 0}, {1, 0}};
  EXPECT_FALSE(move_cover_conflict(a, {0.5, 1.0}, 0.4, 0.4));
  EXPECT_TRUE(move_cover_conflict(a, {0.5, 1.0}, 0.6, 0.6));
  EXPECT_TRUE(move_cover_conflict(a, {0.2, 0.0}, 1e-3, 1e-3));
  const Point2 q{3, 4};
  const double sampled = sampled_point_segment(q, a, 100000);
  EXPECT_EQ(move_cover_conflict(a, q, 2.0, 2.5), sampled < 4.5);
  EXPECT_EQ(move_cover_conflict(a, q, 2.0, 2.4), sampled < 4.4);
}

TEST(GeometryProperties, SymmetryInvarianceAndSamplingBound) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> ang(0.0, 2 * M_PI);
  for (int trial = 0; trial < 300; ++trial) {
    const Segment a{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const Segment b{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const Point2 p{u(rng), u(rng)};
    const double dab = segment_segment_distance(a, b);
    EXPECT_DOUBLE_EQ(dab, segment_segment_distance(b, a));
    const double theta = ang(rng);
    const Point2 shift{u(rng), u(rng)};
    EXPECT_NEAR(dab, segment_segment_distance(rigid(a, theta, shift), rigid(b, theta, shift)), 1e-9);
    EXPECT_NEAR(point_segment_distance(p, a), point_segment_distance(rigid(p, theta, shift), rigid(a, theta, shift)), 1e-9);
    // Analytic distance never exceeds a sampled one.
    EXPECT_LE(dab, sampled_segment_segment(a, b, 40) + 1e-12);
    const double dense = sampled_point_segment(p, a, 100000);
    EXPECT_LE(point_segment_distance(p, a), dense + 1e-12);
    // Sampling error is quadratic in the spacing once the point is off the segment.
    if (dense > 0.5) {
      EXPECT_NEAR(point_segment_distance(p, a), dense, 1e-6);
    }
  }
}
