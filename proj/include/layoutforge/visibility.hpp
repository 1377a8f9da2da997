#pragma once

#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "layoutforge/errors.hpp"
#include "layoutforge/geometry.hpp"
#include "layoutforge/grid.hpp"
#include "layoutforge/parallel.hpp"

namespace layoutforge {

inline std::size_t pair_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

// Row-major offset of (i, j), i < j, in the strictly upper triangle.
inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) {
  if (i >= j || j >= n) throw Error("pair_index requires 0 <= i < j < n");
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

namespace detail {
inline std::size_t row_start(std::size_t i, std::size_t n) { return i * n - i * (i + 1) / 2; }
}  // namespace detail

/// Visibility graph over a sampled grid. One bit per unordered vertex pair,
/// so symmetry holds by construction and the diagonal is never stored.
class VisibilityGraph {
 public:
  VisibilityGraph() = default;
  VisibilityGraph(SampledGrid grid, std::vector<std::uint64_t> bits, std::size_t los_tests,
                  std::size_t wall_checks)
      : grid_(std::move(grid)), bits_(std::move(bits)), los_tests_(los_tests), wall_checks_(wall_checks) {}

  /// Abstract graph on n vertices (all in both regions, all at the origin);
  /// used to drive the forest kernels with arbitrary topologies.
  static VisibilityGraph from_edges(std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges) {
    SampledGrid grid;
    grid.vertices.assign(n, Point2{});
    grid.cells.assign(n, GridCell{});
    grid.query_mask.assign(n, 1);
    grid.reference_mask.assign(n, 1);
    std::vector<std::uint64_t> bits((pair_count(n) + 63) / 64, 0);
    for (auto [i, j] : edges) {
      if (i == j || i >= n || j >= n) throw Error("edge endpoints out of range");
      if (i > j) std::swap(i, j);
      const std::size_t off = detail::row_start(i, n) + (j - i - 1);
      bits[off >> 6] |= std::uint64_t{1} << (off & 63);
    }
    return VisibilityGraph(std::move(grid), std::move(bits), 0, 0);
  }

  std::size_t size() const { return grid_.size(); }
  const SampledGrid& grid() const { return grid_; }
  const std::vector<std::uint64_t>& bits() const { return bits_; }

  bool adjacent(std::size_t i, std::size_t j) const {
    if (i == j) return false;
    if (i > j) std::swap(i, j);
    const std::size_t off = detail::row_start(i, size()) + (j - i - 1);
    return (bits_[off >> 6] >> (off & 63)) & 1u;
  }
  std::size_t edge_count() const {
    std::size_t c = 0;
    for (auto w : bits_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

  // Instrumentation: line-of-sight evaluations and segment predicate calls.
  std::size_t los_tests() const { return los_tests_; }
  std::size_t wall_checks() const { return wall_checks_; }

 private:
  SampledGrid grid_;
  std::vector<std::uint64_t> bits_;
  std::size_t los_tests_ = 0;
  std::size_t wall_checks_ = 0;
};

// Query-reference and reference-reference pairs get sight lines; query-query
// pairs only when one of the two is also a reference vertex.
inline bool pair_eligible(const SampledGrid& g, std::size_t i, std::size_t j) {
  const bool ri = g.reference_mask[i] != 0, rj = g.reference_mask[j] != 0;
  const bool qi = g.query_mask[i] != 0, qj = g.query_mask[j] != 0;
  return (ri && rj) || (qi && rj) || (ri && qj);
}

inline bool line_of_sight(Point2 p, Point2 q, std::span<const WallSegment> walls, std::size_t& checks) {
  for (const auto& w : walls) {
    ++checks;
    if (segments_intersect(p, q, w.a, w.b)) return false;
  }
  return true;
}

/// Each eligible pair is an independent work item; the pair-offset range is
/// split into word-aligned chunks so workers never share an output word.
inline VisibilityGraph build_visibility_graph(SampledGrid grid, std::span<const WallSegment> walls) {
  const std::size_t n = grid.size();
  const std::size_t total = pair_count(n);
  std::vector<std::uint64_t> bits((total + 63) / 64, 0);
  std::atomic<std::size_t> los_tests{0};
  std::atomic<std::size_t> wall_checks{0};

  parallel_for_chunks(total, 64 * 64, [&](std::size_t begin, std::size_t end) {
    std::size_t i = 0;
    while (detail::row_start(i + 1, n) <= begin) ++i;
    std::size_t j = i + 1 + (begin - detail::row_start(i, n));
    std::size_t local_tests = 0, local_checks = 0;
    for (std::size_t off = begin; off < end; ++off) {
      if (pair_eligible(grid, i, j)) {
        ++local_tests;
        if (line_of_sight(grid.vertices[i], grid.vertices[j], walls, local_checks))
          bits[off >> 6] |= std::uint64_t{1} << (off & 63);
      }
      if (++j == n) {
        ++i;
        j = i + 1;
      }
    }
    los_tests += local_tests;
    wall_checks += local_checks;
  });

  return VisibilityGraph(std::move(grid), std::move(bits), los_tests.load(), wall_checks.load());
}

/// k_i: number of visible vertices from vertex i.
inline std::vector<std::uint32_t> degrees(const VisibilityGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> k(n, 0);
  const auto& bits = g.bits();
  std::size_t i = 0, row_end = n > 0 ? n - 1 : 0;  // first offset past row i
  for (std::size_t w = 0; w < bits.size(); ++w) {
    std::uint64_t word = bits[w];
    while (word) {
      const std::size_t off = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
      word &= word - 1;
      while (off >= row_end) {
        ++i;
        row_end += n - 1 - i;
      }
      const std::size_t j = off - detail::row_start(i, n) + i + 1;
      ++k[i];
      ++k[j];
    }
  }
  return k;
}

}  // namespace layoutforge
