#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "layoutforge/errors.hpp"

namespace layoutforge {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct WallSegment {
  Point2 a;
  Point2 b;
  std::string id;

  double length() const { return distance(a, b); }
  friend bool operator==(const WallSegment&, const WallSegment&) = default;
};

struct ElementGroup {
  std::string id;
  std::vector<std::string> wall_ids;
  Point2 pivot;

  friend bool operator==(const ElementGroup&, const ElementGroup&) = default;
};

enum class ParamKind { translation_x, translation_y, rotation };

struct ParamBound {
  std::string group_id;
  ParamKind kind = ParamKind::translation_x;
  double lower = 0.0;
  double upper = 0.0;

  friend bool operator==(const ParamBound&, const ParamBound&) = default;
};

// Box bounds of an optimization domain. Infinite bounds are allowed for
// purely numerical use; layout parameters are always finite.
struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  static Bounds unbounded(std::size_t dim) {
    const double inf = std::numeric_limits<double>::infinity();
    return {std::vector<double>(dim, -inf), std::vector<double>(dim, inf)};
  }
  static Bounds box(std::size_t dim, double lo, double hi) {
    return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
  }

  std::size_t size() const { return lower.size(); }
  bool contains(std::span<const double> v) const {
    if (v.size() != size()) return false;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (!(v[i] >= lower[i] && v[i] <= upper[i])) return false;
    return true;
  }
};

struct ParamSpec {
  std::vector<ParamBound> entries;

  std::size_t size() const { return entries.size(); }
  Bounds bounds() const {
    Bounds b;
    b.lower.reserve(entries.size());
    b.upper.reserve(entries.size());
    for (const auto& e : entries) {
      b.lower.push_back(e.lower);
      b.upper.push_back(e.upper);
    }
    return b;
  }
  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double value = 0.0) : values_(dim, value) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> span() const { return values_; }
  operator std::span<const double>() const { return values_; }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

namespace detail {

// Error bound for the floating-point orient2d filter.
inline constexpr double kOrientErrBound = (3.0 + 16.0 * 1.1102230246251565e-16) * 1.1102230246251565e-16;

inline int orient_exact(Point2 a, Point2 b, Point2 c) {
  using boost::multiprecision::cpp_rational;
  const cpp_rational acx = cpp_rational(a.x) - cpp_rational(c.x);
  const cpp_rational bcx = cpp_rational(b.x) - cpp_rational(c.x);
  const cpp_rational acy = cpp_rational(a.y) - cpp_rational(c.y);
  const cpp_rational bcy = cpp_rational(b.y) - cpp_rational(c.y);
  const cpp_rational det = acx * bcy - acy * bcx;
  return det > 0 ? 1 : (det < 0 ? -1 : 0);
}

}  // namespace detail

/// Sign of the signed area of triangle (a, b, c): +1 counter-clockwise,
/// -1 clockwise, 0 collinear. Exact: a floating-point filter decides the easy
/// cases and falls back to rational arithmetic near degeneracy.
inline int orient(Point2 a, Point2 b, Point2 c) {
  const double detleft = (a.x - c.x) * (b.y - c.y);
  const double detright = (a.y - c.y) * (b.x - c.x);
  const double det = detleft - detright;
  const double bound = detail::kOrientErrBound * (std::abs(detleft) + std::abs(detright));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  if (detleft == 0.0 && detright == 0.0) return 0;
  return detail::orient_exact(a, b, c);
}

namespace detail {
// Given p collinear with segment (a, b), is p within its bounding box?
inline bool on_segment_box(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}
}  // namespace detail

// Closed-segment intersection test (touching endpoints and collinear overlap count).
inline bool segments_intersect(Point2 p1, Point2 q1, Point2 p2, Point2 q2) {
  // Cheap bounding-box rejection first; most LOS tests end here.
  if (std::max(p1.x, q1.x) < std::min(p2.x, q2.x) || std::max(p2.x, q2.x) < std::min(p1.x, q1.x) ||
      std::max(p1.y, q1.y) < std::min(p2.y, q2.y) || std::max(p2.y, q2.y) < std::min(p1.y, q1.y))
    return false;

  const int o1 = orient(p1, q1, p2);
  const int o2 = orient(p1, q1, q2);
  const int o3 = orient(p2, q2, p1);
  const int o4 = orient(p2, q2, q1);

  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  // Remaining contacts all put an endpoint on the other segment.
  if (o1 == 0 && detail::on_segment_box(p1, q1, p2)) return true;
  if (o2 == 0 && detail::on_segment_box(p1, q1, q2)) return true;
  if (o3 == 0 && detail::on_segment_box(p2, q2, p1)) return true;
  if (o4 == 0 && detail::on_segment_box(p2, q2, q1)) return true;
  return false;
}

inline bool segments_intersect(const WallSegment& s1, const WallSegment& s2) {
  return segments_intersect(s1.a, s1.b, s2.a, s2.b);
}

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

inline double total_length(std::span<const WallSegment> walls) {
  double s = 0.0;
  for (const auto& w : walls) s += w.length();
  return s;
}

/// |S(new) - S(old)| where S sums segment lengths.
inline double wall_length_penalty(std::span<const WallSegment> new_walls,
                                  std::span<const WallSegment> old_walls) {
  return std::abs(total_length(new_walls) - total_length(old_walls));
}

inline Point2 centroid_of(std::span<const WallSegment> walls) {
  Point2 c;
  if (walls.empty()) return c;
  for (const auto& w : walls) c = c + w.a + w.b;
  return (0.5 / static_cast<double>(walls.size())) * c;
}

/// The parametric floor plan: base walls, movable element groups and the
/// parameter box. Immutable after construction; validated by the constructor.
class ArchitecturalGraph {
 public:
  ArchitecturalGraph() = default;
  ArchitecturalGraph(std::vector<WallSegment> walls, std::vector<ElementGroup> groups, ParamSpec spec)
      : walls_(std::move(walls)), groups_(std::move(groups)), spec_(std::move(spec)) {
    validate();
  }

  const std::vector<WallSegment>& walls() const { return walls_; }
  const std::vector<ElementGroup>& groups() const { return groups_; }
  const ParamSpec& spec() const { return spec_; }
  std::size_t dimension() const { return spec_.size(); }

  /// Realize the geometry for parameter vector p. Each group is rotated about
  /// its pivot and then translated; ungrouped walls are copied unchanged.
  std::vector<WallSegment> apply_params(const ParamVector& p) const {
    if (p.size() != spec_.size()) throw DimensionMismatch(spec_.size(), p.size());

    struct Transform {
      double tx = 0.0, ty = 0.0, angle = 0.0;
    };
    std::vector<Transform> per_group(groups_.size());
    for (std::size_t k = 0; k < spec_.entries.size(); ++k) {
      const auto& e = spec_.entries[k];
      auto& t = per_group[group_index_.at(e.group_id)];
      switch (e.kind) {
        case ParamKind::translation_x: t.tx += p[k]; break;
        case ParamKind::translation_y: t.ty += p[k]; break;
        case ParamKind::rotation: t.angle += p[k]; break;
      }
    }

    std::vector<WallSegment> out = walls_;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      const Transform& t = per_group[g];
      if (t.tx == 0.0 && t.ty == 0.0 && t.angle == 0.0) continue;
      const Point2 pivot = groups_[g].pivot;
      const double c = std::cos(t.angle), s = std::sin(t.angle);
      auto move = [&](Point2 q) {
        if (t.angle != 0.0) {
          const Point2 d = q - pivot;
          q = pivot + Point2{c * d.x - s * d.y, s * d.x + c * d.y};
        }
        return Point2{q.x + t.tx, q.y + t.ty};
      };
      for (const auto& wid : groups_[g].wall_ids) {
        auto& w = out[wall_index_.at(wid)];
        w.a = move(w.a);
        w.b = move(w.b);
      }
    }
    return out;
  }

  /// Pivot positions after applying p (groups carry their pivot along).
  std::vector<ElementGroup> apply_params_to_groups(const ParamVector& p) const {
    if (p.size() != spec_.size()) throw DimensionMismatch(spec_.size(), p.size());
    std::vector<ElementGroup> out = groups_;
    for (std::size_t k = 0; k < spec_.entries.size(); ++k) {
      const auto& e = spec_.entries[k];
      auto& g = out[group_index_.at(e.group_id)];
      if (e.kind == ParamKind::translation_x) g.pivot.x += p[k];
      if (e.kind == ParamKind::translation_y) g.pivot.y += p[k];
    }
    return out;
  }

  const WallSegment* find_wall(const std::string& id) const {
    auto it = wall_index_.find(id);
    return it == wall_index_.end() ? nullptr : &walls_[it->second];
  }

 private:
  void validate() {
    wall_index_.clear();
    group_index_.clear();
    for (std::size_t i = 0; i < walls_.size(); ++i) {
      const auto& w = walls_[i];
      if (!std::isfinite(w.a.x) || !std::isfinite(w.a.y) || !std::isfinite(w.b.x) ||
          !std::isfinite(w.b.y))
        throw InvalidLayout("wall '" + w.id + "' has non-finite coordinates");
      if (w.a == w.b) throw InvalidLayout("wall '" + w.id + "' has zero length");
      if (!wall_index_.emplace(w.id, i).second)
        throw InvalidLayout("duplicate wall id '" + w.id + "'");
    }
    std::unordered_set<std::string> grouped;
    for (std::size_t g = 0; g < groups_.size(); ++g) {
      const auto& grp = groups_[g];
      if (grp.wall_ids.empty()) throw InvalidLayout("group '" + grp.id + "' is empty");
      if (!group_index_.emplace(grp.id, g).second)
        throw InvalidLayout("duplicate group id '" + grp.id + "'");
      for (const auto& wid : grp.wall_ids) {
        if (!wall_index_.count(wid))
          throw InvalidLayout("group '" + grp.id + "' references unknown wall '" + wid + "'");
        if (!grouped.insert(wid).second)
          throw InvalidLayout("wall '" + wid + "' belongs to more than one group");
      }
    }
    for (const auto& e : spec_.entries) {
      if (!group_index_.count(e.group_id))
        throw InvalidLayout("parameter references unknown group '" + e.group_id + "'");
      if (!std::isfinite(e.lower) || !std::isfinite(e.upper) || e.lower > e.upper)
        throw InvalidLayout("parameter bounds for group '" + e.group_id + "' are invalid");
      if (e.kind == ParamKind::rotation &&
          (e.lower <= -std::numbers::pi || e.upper > std::numbers::pi))
        throw InvalidLayout("rotation bounds for group '" + e.group_id + "' must lie in (-pi, pi]");
    }
  }

  std::vector<WallSegment> walls_;
  std::vector<ElementGroup> groups_;
  ParamSpec spec_;
  std::unordered_map<std::string, std::size_t> wall_index_;
  std::unordered_map<std::string, std::size_t> group_index_;
};

}  // namespace layoutforge
