#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "layoutforge/errors.hpp"
#include "layoutforge/forest.hpp"
#include "layoutforge/visibility.hpp"

namespace layoutforge {

// Edge height of the BFS tree; an isolated vertex has depth 0.
inline double tree_depth(const TreeStats& t) {
  return t.levels() == 0 ? 0.0 : static_cast<double>(t.levels() - 1);
}

// Shannon entropy (bits) of the vertex distribution over BFS levels.
inline double entropy(const TreeStats& t) {
  if (t.visited_count == 0) return 0.0;
  const double total = static_cast<double>(t.visited_count);
  double h = 0.0;
  for (const auto c : t.level_counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

struct MetricsReport {
  std::vector<std::uint32_t> degree;
  std::vector<double> depth;
  std::vector<double> entropy;
  // Means over the query vertices.
  double K = 0.0;
  double D = 0.0;
  double H = 0.0;
  std::size_t query_count = 0;
  std::size_t vertex_count = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Per-vertex degree, depth and entropy for every vertex, aggregated over
/// the query set. One forest pass feeds both depth and entropy.
inline MetricsReport compute_metrics(const VisibilityGraph& g,
                                     ForestStrategy strategy = ForestStrategy::indexed) {
  const auto& grid = g.grid();
  const std::size_t n = g.size();
  if (grid.query_count() == 0) throw EmptyRegionError("query region contains no grid vertices");

  MetricsReport r;
  r.vertex_count = n;
  r.degree = degrees(g);
  const ForestStats forest = build_forest(g, strategy);
  r.depth.resize(n);
  r.entropy.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.depth[i] = tree_depth(forest.trees[i]);
    r.entropy[i] = entropy(forest.trees[i]);
  }

  double k = 0.0, d = 0.0, h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!grid.query_mask[i]) continue;
    ++r.query_count;
    k += r.degree[i];
    d += r.depth[i];
    h += r.entropy[i];
  }
  const double q = static_cast<double>(r.query_count);
  r.K = k / q;
  r.D = d / q;
  r.H = h / q;
  return r;
}

// Normalization bounds of the empty environment: degree and depth by |V|-1,
// entropy by log2 |V|. Used only for display and the combined value.
struct MetricScale {
  double degree = 1.0;
  double depth = 1.0;
  double entropy = 1.0;

  static MetricScale for_vertex_count(std::size_t n) {
    MetricScale s;
    if (n >= 2) {
      s.degree = static_cast<double>(n - 1);
      s.depth = static_cast<double>(n - 1);
      s.entropy = std::log2(static_cast<double>(n));
    }
    return s;
  }
};

inline double combined_value(double k, double d, double h, const MetricScale& s) {
  return k / s.degree - d / s.depth + h / s.entropy;
}

inline double combined_value(const MetricsReport& r) {
  return combined_value(r.K, r.D, r.H, MetricScale::for_vertex_count(r.vertex_count));
}

}  // namespace layoutforge
