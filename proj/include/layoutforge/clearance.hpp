#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "layoutforge/errors.hpp"
#include "layoutforge/geometry.hpp"

namespace layoutforge {

using Polygon = std::vector<Point2>;

inline constexpr double kDefaultClearanceRadius = 0.5;
inline constexpr int kDefaultArcSegments = 16;
inline constexpr double kAdjoiningTolerance = 1e-9;

// Shoelace area, positive for counter-clockwise rings.
inline double signed_area(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

/// Minkowski sum of a segment and a disk of radius r: a convex stadium with
/// each semicircular cap replaced by `arc_segments` chords. Counter-clockwise.
inline Polygon capsule_polygon(const WallSegment& w, double r, int arc_segments = kDefaultArcSegments) {
  const Point2 d = w.b - w.a;
  const double theta = std::atan2(d.y, d.x);
  Polygon out;
  out.reserve(2 * (arc_segments + 1));
  auto arc = [&](Point2 centre, double start) {
    for (int k = 0; k <= arc_segments; ++k) {
      const double phi = start + std::numbers::pi * k / arc_segments;
      out.push_back({centre.x + r * std::cos(phi), centre.y + r * std::sin(phi)});
    }
  };
  arc(w.b, theta - std::numbers::pi / 2);
  arc(w.a, theta + std::numbers::pi / 2);
  return out;
}

/// Intersection of a polygon with a convex counter-clockwise clip polygon
/// (Sutherland-Hodgman). Exact for convex inputs, which capsules are.
inline Polygon clip_convex(const Polygon& subject, const Polygon& clip) {
  Polygon output = subject;
  const std::size_t m = clip.size();
  for (std::size_t e = 0; e < m && !output.empty(); ++e) {
    const Point2 c0 = clip[e];
    const Point2 c1 = clip[(e + 1) % m];
    const Point2 edge = c1 - c0;
    auto side = [&](Point2 p) { return cross(edge, p - c0); };

    Polygon input;
    input.swap(output);
    const std::size_t n = input.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 cur = input[i];
      const Point2 prev = input[(i + n - 1) % n];
      const double sc = side(cur);
      const double sp = side(prev);
      if (sc >= 0.0) {
        if (sp < 0.0) output.push_back(prev + (sp / (sp - sc)) * (cur - prev));
        output.push_back(cur);
      } else if (sp >= 0.0) {
        output.push_back(prev + (sp / (sp - sc)) * (cur - prev));
      }
    }
  }
  return output;
}

inline double segment_distance(const WallSegment& s1, const WallSegment& s2) {
  if (segments_intersect(s1, s2)) return 0.0;
  return std::min({point_segment_distance(s1.a, s2.a, s2.b), point_segment_distance(s1.b, s2.a, s2.b),
                   point_segment_distance(s2.a, s1.a, s1.b), point_segment_distance(s2.b, s1.a, s1.b)});
}

inline bool adjoining(const WallSegment& s1, const WallSegment& s2, double tol = kAdjoiningTolerance) {
  return distance(s1.a, s2.a) <= tol || distance(s1.a, s2.b) <= tol || distance(s1.b, s2.a) <= tol ||
         distance(s1.b, s2.b) <= tol;
}

/// Area of the overlap of the two r-dilated walls.
inline double capsule_overlap_area(const WallSegment& s1, const WallSegment& s2, double r,
                                   int arc_segments = kDefaultArcSegments) {
  if (segment_distance(s1, s2) >= 2.0 * r) return 0.0;
  const Polygon p1 = capsule_polygon(s1, r, arc_segments);
  const Polygon p2 = capsule_polygon(s2, r, arc_segments);
  return std::abs(signed_area(clip_convex(p1, p2)));
}

/// Sum over non-adjoining wall pairs of the overlap area of their dilations.
inline double clearance(std::span<const WallSegment> walls, double r = kDefaultClearanceRadius,
                        int arc_segments = kDefaultArcSegments) {
  if (!(r > 0.0)) throw Error("clearance radius must be positive");
  if (arc_segments < 1) throw Error("arc segment count must be positive");
  double total = 0.0;
  for (std::size_t i = 0; i < walls.size(); ++i)
    for (std::size_t j = i + 1; j < walls.size(); ++j) {
      if (adjoining(walls[i], walls[j])) continue;
      total += capsule_overlap_area(walls[i], walls[j], r, arc_segments);
    }
  return total;
}

inline double clearance_penalty(double clearance_area) { return clearance_area * clearance_area; }

inline double clearance_penalty(std::span<const WallSegment> walls, double r = kDefaultClearanceRadius,
                                int arc_segments = kDefaultArcSegments) {
  return clearance_penalty(clearance(walls, r, arc_segments));
}

}  // namespace layoutforge
