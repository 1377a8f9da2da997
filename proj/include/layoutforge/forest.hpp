#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "layoutforge/errors.hpp"
#include "layoutforge/parallel.hpp"
#include "layoutforge/visibility.hpp"

namespace layoutforge {

// Level-synchronous BFS kernels. All three produce identical statistics and
// differ only in how much of the frontier each vertex lane inspects:
//   naive   - every lane scans the whole binary frontier at every level;
//   cutoff  - lanes whose vertex is already visited are not launched;
//   indexed - the frontier is compacted into an index list once per level.
enum class ForestStrategy { naive, cutoff, indexed };

inline std::string_view to_string(ForestStrategy s) {
  switch (s) {
    case ForestStrategy::naive: return "naive";
    case ForestStrategy::cutoff: return "cutoff";
    case ForestStrategy::indexed: return "indexed";
  }
  return "?";
}

struct TreeStats {
  std::vector<std::uint32_t> level_counts;  // level_counts[0] is the root level
  std::uint32_t visited_count = 0;

  std::size_t levels() const { return level_counts.size(); }
  friend bool operator==(const TreeStats&, const TreeStats&) = default;
};

struct ForestStats {
  std::vector<std::size_t> roots;
  std::vector<TreeStats> trees;  // parallel to roots
  std::size_t adjacency_checks = 0;

  // Equality ignores the work counter.
  friend bool operator==(const ForestStats& a, const ForestStats& b) {
    return a.roots == b.roots && a.trees == b.trees;
  }
};

namespace detail {

// Per-lane scratch. Lanes own their buffers; only the graph is shared.
struct BfsScratch {
  std::vector<std::uint8_t> frontier;
  std::vector<std::uint8_t> children;
  std::vector<std::uint8_t> parents;
  std::vector<std::uint32_t> frontier_index;

  explicit BfsScratch(std::size_t n) : frontier(n), children(n), parents(n) { frontier_index.reserve(n); }
};

inline TreeStats grow_tree(const VisibilityGraph& g, std::size_t root, ForestStrategy strategy,
                           BfsScratch& s, std::size_t& checks) {
  const std::size_t n = g.size();
  std::fill(s.frontier.begin(), s.frontier.end(), 0);
  std::fill(s.parents.begin(), s.parents.end(), 0);
  s.frontier[root] = 1;
  s.parents[root] = 1;
  s.frontier_index.assign(1, static_cast<std::uint32_t>(root));

  TreeStats stats;
  stats.level_counts.push_back(1);
  std::uint32_t visited = 1;

  for (;;) {
    std::fill(s.children.begin(), s.children.end(), 0);
    std::uint32_t discovered = 0;

    for (std::size_t i = 0; i < n; ++i) {
      switch (strategy) {
        case ForestStrategy::naive:
          for (std::size_t j = 0; j < n; ++j) {
            ++checks;
            if (s.frontier[j] && !s.parents[i] && g.adjacent(i, j)) s.children[i] = 1;
          }
          break;
        case ForestStrategy::cutoff:
          if (s.parents[i]) continue;
          for (std::size_t j = 0; j < n; ++j) {
            if (!s.frontier[j]) continue;
            ++checks;
            if (g.adjacent(i, j)) {
              s.children[i] = 1;
              break;
            }
          }
          break;
        case ForestStrategy::indexed:
          if (s.parents[i]) continue;
          for (const std::uint32_t j : s.frontier_index) {
            ++checks;
            if (g.adjacent(i, j)) {
              s.children[i] = 1;
              break;
            }
          }
          break;
      }
    }

    // Level bookkeeping: D(l), P |= C, F <- C.
    s.frontier_index.clear();
    for (std::size_t i = 0; i < n; ++i) {
      s.frontier[i] = s.children[i];
      if (s.children[i]) {
        s.parents[i] = 1;
        ++discovered;
        s.frontier_index.push_back(static_cast<std::uint32_t>(i));
      }
    }
    if (discovered == 0) break;
    stats.level_counts.push_back(discovered);
    visited += discovered;
  }
  stats.visited_count = visited;
  return stats;
}

}  // namespace detail

/// BFS level counts for every root. Roots are independent lanes distributed
/// across workers; the adjacency is the only shared (read-only) state.
inline ForestStats build_forest(const VisibilityGraph& g, std::span<const std::size_t> roots,
                                ForestStrategy strategy = ForestStrategy::indexed) {
  const std::size_t n = g.size();
  for (auto r : roots)
    if (r >= n) throw Error("forest root out of range");

  ForestStats out;
  out.roots.assign(roots.begin(), roots.end());
  out.trees.resize(roots.size());
  std::atomic<std::size_t> checks{0};
  parallel_for_chunks(roots.size(), 1, [&](std::size_t begin, std::size_t end) {
    detail::BfsScratch scratch(n);
    std::size_t local = 0;
    for (std::size_t k = begin; k < end; ++k) out.trees[k] = detail::grow_tree(g, roots[k], strategy, scratch, local);
    checks += local;
  });
  out.adjacency_checks = checks.load();
  return out;
}

inline ForestStats build_forest(const VisibilityGraph& g, ForestStrategy strategy = ForestStrategy::indexed) {
  std::vector<std::size_t> roots(g.size());
  for (std::size_t i = 0; i < roots.size(); ++i) roots[i] = i;
  return build_forest(g, roots, strategy);
}

}  // namespace layoutforge
