#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "layoutforge/clearance.hpp"
#include "layoutforge/errors.hpp"
#include "layoutforge/geometry.hpp"

namespace layoutforge {

inline constexpr double kDefaultResolution = 0.5;  // cells per meter
inline constexpr double kWallExclusion = 1e-6;     // meters

struct GridSpec {
  Point2 origin;
  double width = 0.0;
  double height = 0.0;
  double resolution = kDefaultResolution;

  double pitch() const { return 1.0 / resolution; }
  // The small slack keeps e.g. 4 m * 0.5 cells/m at exactly 2 cells.
  std::size_t cols() const { return static_cast<std::size_t>(std::floor(width * resolution + 1e-9)); }
  std::size_t rows() const { return static_cast<std::size_t>(std::floor(height * resolution + 1e-9)); }
  Point2 cell_center(std::size_t col, std::size_t row) const {
    return {origin.x + (static_cast<double>(col) + 0.5) * pitch(),
            origin.y + (static_cast<double>(row) + 0.5) * pitch()};
  }
  void validate() const {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw Error("grid resolution must be positive");
    if (!(width > 0.0) || !(height > 0.0)) throw Error("grid extent must be positive");
    if (cols() == 0 || rows() == 0) throw Error("grid has no cells at this resolution");
  }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Boundary-inclusive point-in-polygon (even-odd rule for the interior).
inline bool point_in_polygon(Point2 p, std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % n];
    if (orient(a, b, p) == 0 && detail::on_segment_box(a, b, p)) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

// True when no two non-adjacent edges touch and the ring is non-degenerate.
inline bool is_simple_polygon(std::span<const Point2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  if (std::abs(signed_area(poly)) == 0.0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a1 = poly[i], b1 = poly[(i + 1) % n];
    if (a1 == b1) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a1, b1, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

struct Region {
  std::vector<Polygon> polygons;

  static Region rectangle(Point2 lo, Point2 hi) {
    return Region{{Polygon{{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}}}};
  }
  static Region covering(const GridSpec& g) {
    return rectangle(g.origin, {g.origin.x + g.width, g.origin.y + g.height});
  }

  bool contains(Point2 p) const {
    for (const auto& poly : polygons)
      if (point_in_polygon(p, poly)) return true;
    return false;
  }
  void validate() const {
    for (const auto& poly : polygons)
      if (!is_simple_polygon(poly)) throw Error("region polygon is not simple");
  }
  friend bool operator==(const Region&, const Region&) = default;
};

struct GridCell {
  std::uint32_t col = 0;
  std::uint32_t row = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct SampledGrid {
  GridSpec spec;
  std::vector<Point2> vertices;
  std::vector<GridCell> cells;
  std::vector<std::uint8_t> query_mask;
  std::vector<std::uint8_t> reference_mask;

  std::size_t size() const { return vertices.size(); }
  std::size_t query_count() const { return count(query_mask); }
  std::size_t reference_count() const { return count(reference_mask); }

 private:
  static std::size_t count(const std::vector<std::uint8_t>& m) {
    std::size_t c = 0;
    for (auto v : m) c += v != 0;
    return c;
  }
};

/// Regular lattice of cell centres, minus those within kWallExclusion of a wall.
/// Vertices are ordered row by row (y outer, x inner).
inline SampledGrid sample_grid(const GridSpec& spec, std::span<const WallSegment> walls,
                               const Region& query, const Region& reference) {
  spec.validate();
  SampledGrid grid;
  grid.spec = spec;
  const std::size_t cols = spec.cols(), rows = spec.rows();
  grid.vertices.reserve(cols * rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const Point2 p = spec.cell_center(c, r);
      bool blocked = false;
      for (const auto& w : walls) {
        if (point_segment_distance(p, w.a, w.b) <= kWallExclusion) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      grid.vertices.push_back(p);
      grid.cells.push_back({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(r)});
      grid.query_mask.push_back(query.contains(p) ? 1 : 0);
      grid.reference_mask.push_back(reference.contains(p) ? 1 : 0);
    }
  }
  if (grid.query_count() == 0) throw EmptyRegionError("query region contains no grid vertices");
  if (grid.reference_count() == 0) throw EmptyRegionError("reference region contains no grid vertices");
  return grid;
}

}  // namespace layoutforge
