#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "layoutforge/clearance.hpp"
#include "layoutforge/cma.hpp"
#include "layoutforge/diversity.hpp"
#include "layoutforge/errors.hpp"
#include "layoutforge/forest.hpp"
#include "layoutforge/geometry.hpp"
#include "layoutforge/grid.hpp"
#include "layoutforge/hierarchy.hpp"
#include "layoutforge/metrics.hpp"
#include "layoutforge/parallel.hpp"
#include "layoutforge/progress.hpp"
#include "layoutforge/visibility.hpp"

namespace layoutforge {

inline constexpr double kDefaultFailurePenalty = 1e9;

enum class Metric { penalty, degree, depth, entropy, combined };

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::penalty: return "penalty";
    case Metric::degree: return "degree";
    case Metric::depth: return "depth";
    case Metric::entropy: return "entropy";
    case Metric::combined: return "combined";
  }
  return "?";
}

inline Metric metric_from_string(const std::string& s) {
  for (Metric m : {Metric::penalty, Metric::degree, Metric::depth, Metric::entropy, Metric::combined})
    if (s == to_string(m)) return m;
  throw Error("unknown objective metric '" + s + "'");
}

/// One ranked objective. Values are oriented for maximization: penalty and
/// depth enter negated. `inverted` flips the sign once more, turning an
/// improvement objective into one that adds complexity.
struct Objective {
  Metric metric = Metric::degree;
  bool inverted = false;
  double z = kDefaultThresholdRatio;

  std::string name() const { return (inverted ? "-" : "") + std::string(to_string(metric)); }
  friend bool operator==(const Objective&, const Objective&) = default;
};

inline std::vector<Objective> default_objectives() {
  return {{Metric::penalty}, {Metric::degree}, {Metric::depth}, {Metric::entropy}};
}

struct PenaltyConfig {
  bool clearance = true;
  double clearance_weight = 1.0;
  double clearance_radius = kDefaultClearanceRadius;
  bool wall_length = true;
  double wall_length_weight = 1.0;
  friend bool operator==(const PenaltyConfig&, const PenaltyConfig&) = default;
};

struct DesignProblem {
  ArchitecturalGraph graph;
  GridSpec grid;
  Region query;
  Region reference;
  std::vector<Objective> objectives = default_objectives();
  PenaltyConfig penalties;
  DiversityConfig diversity;
  CmaOptions cma;
  TerminationCriteria criteria;
  double threshold_weight = kDefaultThresholdWeight;
  double failure_penalty = kDefaultFailurePenalty;
  ForestStrategy strategy = ForestStrategy::indexed;

  void validate() const {
    grid.validate();
    query.validate();
    reference.validate();
    if (objectives.empty()) throw Error("at least one objective is required");
    for (const auto& o : objectives)
      if (!(o.z >= 0.0 && o.z <= 1.0)) throw Error("threshold ratios must lie in [0, 1]");
    if (penalties.clearance && !(penalties.clearance_radius > 0.0)) throw Error("clearance radius must be positive");
    if (!(penalties.clearance_weight >= 0.0) || !(penalties.wall_length_weight >= 0.0))
      throw Error("penalty weights must be non-negative");
    if (!(failure_penalty > 0.0) || !std::isfinite(failure_penalty)) throw Error("failure penalty must be positive");
    diversity.validate(graph.dimension() == 0 ? 1 : graph.dimension());
    criteria.validate();
  }
};

/// Per-vertex values laid out on the sampling lattice.
struct Heatmap {
  GridSpec spec;
  std::vector<Point2> vertices;
  std::vector<GridCell> cells;
  std::vector<double> degree, depth, entropy, combined;
  friend bool operator==(const Heatmap&, const Heatmap&) = default;
};

struct CandidateEvaluation {
  ParamVector p;
  std::vector<WallSegment> walls;
  bool failed = false;
  std::string failure;
  MetricsReport metrics;
  double clearance_term = 0.0;
  double wall_length_term = 0.0;
  double penalty = 0.0;   // g(p)
  double combined = 0.0;  // normalized K - D + H
  std::vector<double> objectives;
  Heatmap heatmap;
  friend bool operator==(const CandidateEvaluation&, const CandidateEvaluation&) = default;
};

inline Heatmap make_heatmap(const SampledGrid& grid, const MetricsReport& m) {
  Heatmap h;
  h.spec = grid.spec;
  h.vertices = grid.vertices;
  h.cells = grid.cells;
  h.degree.assign(m.degree.begin(), m.degree.end());
  h.depth = m.depth;
  h.entropy = m.entropy;
  const MetricScale s = MetricScale::for_vertex_count(m.vertex_count);
  h.combined.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) h.combined[i] = combined_value(h.degree[i], h.depth[i], h.entropy[i], s);
  return h;
}

inline double objective_value(const Objective& o, const CandidateEvaluation& e) {
  double v = 0.0;
  switch (o.metric) {
    case Metric::penalty: v = -e.penalty; break;
    case Metric::degree: v = e.metrics.K; break;
    case Metric::depth: v = -e.metrics.D; break;
    case Metric::entropy: v = e.metrics.H; break;
    case Metric::combined: v = e.combined; break;
  }
  return o.inverted ? -v : v;
}

/// Spatial analysis of a realized wall set, no penalties.
inline MetricsReport analyze_walls(const DesignProblem& problem, const std::vector<WallSegment>& walls,
                                   SampledGrid* grid_out = nullptr) {
  SampledGrid grid = sample_grid(problem.grid, walls, problem.query, problem.reference);
  MetricsReport report = compute_metrics(build_visibility_graph(grid, walls), problem.strategy);
  if (grid_out) *grid_out = std::move(grid);
  return report;
}

/// Realize p and score it. An empty query or reference set does not throw:
/// the candidate is marked failed and every objective gets -failure_penalty
/// so the search can move away from it.
inline CandidateEvaluation evaluate(const DesignProblem& problem, const ParamVector& p) {
  CandidateEvaluation e;
  e.p = p;
  e.walls = problem.graph.apply_params(p);
  const auto& pen = problem.penalties;
  if (pen.clearance) e.clearance_term = pen.clearance_weight * clearance_penalty(e.walls, pen.clearance_radius);
  if (pen.wall_length) e.wall_length_term = pen.wall_length_weight * wall_length_penalty(e.walls, problem.graph.walls());
  e.penalty = e.clearance_term + e.wall_length_term;

  try {
    SampledGrid grid;
    e.metrics = analyze_walls(problem, e.walls, &grid);
    e.combined = combined_value(e.metrics);
    e.heatmap = make_heatmap(grid, e.metrics);
  } catch (const EmptyRegionError& err) {
    e.failed = true;
    e.failure = err.what();
    e.penalty += problem.failure_penalty;
    e.objectives.assign(problem.objectives.size(), -problem.failure_penalty);
    return e;
  }
  e.objectives.reserve(problem.objectives.size());
  for (const auto& o : problem.objectives) e.objectives.push_back(objective_value(o, e));
  return e;
}

/// The base layout moved to p, with the same groups and relative bounds.
inline ArchitecturalGraph rebase(const ArchitecturalGraph& graph, const ParamVector& p) {
  return ArchitecturalGraph(graph.apply_params(p), graph.apply_params_to_groups(p), graph.spec());
}

struct RoundResult {
  CandidateEvaluation base;
  HierarchyResult hierarchy;
  std::vector<CandidateEvaluation> members;
};

/// One design round: the ranked objectives are optimized in order from the
/// base layout (p = 0), then a diversity set of problem.diversity.members
/// layouts is spread under the resulting thresholds.
inline RoundResult run_round(const DesignProblem& problem, std::uint64_t seed, const RunHooks& hooks = {}) {
  problem.validate();
  const std::size_t dim = problem.graph.dimension();
  if (dim == 0) throw Error("layout has no free parameters to optimize");

  RoundResult out;
  const ParamVector p0(dim, 0.0);
  out.base = evaluate(problem, p0);
  if (out.base.failed) throw EmptyRegionError(out.base.failure);

  HierarchySpec spec;
  for (const auto& o : problem.objectives) {
    spec.objective_names.push_back(o.name());
    spec.z.push_back(o.z);
  }
  spec.p0 = p0;
  spec.bounds = problem.graph.spec().bounds();
  if (!spec.bounds.contains(p0)) throw Error("parameter bounds must contain 0 (the base layout)");
  spec.threshold_weight = problem.threshold_weight;

  HierarchySettings settings;
  settings.cma = problem.cma;
  settings.criteria = problem.criteria;
  settings.diversity = problem.diversity;
  settings.seed = seed;

  auto objectives = [&](const ParamVector& p) { return evaluate(problem, p).objectives; };
  out.hierarchy = hierarchical_optimize(spec, settings, objectives, hooks);

  out.members.resize(out.hierarchy.set.members.size());
  parallel_for(out.members.size(), [&](std::size_t i) { out.members[i] = evaluate(problem, out.hierarchy.set.members[i]); });
  return out;
}

}  // namespace layoutforge
