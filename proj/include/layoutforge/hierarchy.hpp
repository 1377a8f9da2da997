#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "layoutforge/box.hpp"
#include "layoutforge/cma.hpp"
#include "layoutforge/diversity.hpp"
#include "layoutforge/errors.hpp"
#include "layoutforge/geometry.hpp"
#include "layoutforge/parallel.hpp"
#include "layoutforge/progress.hpp"

namespace layoutforge {

inline constexpr double kDefaultThresholdRatio = 0.7;
inline constexpr double kDefaultThresholdWeight = 1e12;
// Violation cost below which a point counts as satisfying every threshold.
inline constexpr double kFeasibilityTolerance = 1e-12;

/// Soft constraint l <= x <= u: zero inside, quadratic outside.
struct ThresholdFn {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  std::size_t objective_index = 0;
};

inline double threshold_value(const ThresholdFn& t, double x) {
  if (x < t.lower) return (t.lower - x) * (t.lower - x);
  if (x > t.upper) return (x - t.upper) * (x - t.upper);
  return 0.0;
}

/// Total violation cost over already-evaluated objective values.
inline double violation_cost(std::span<const double> objective_values, std::span<const ThresholdFn> constraints) {
  double total = 0.0;
  for (const auto& t : constraints) {
    if (t.objective_index >= objective_values.size()) throw Error("threshold gates an unknown objective");
    total += threshold_value(t, objective_values[t.objective_index]);
  }
  return total;
}

template <class Evaluator>
double violation_cost(const ParamVector& p, std::span<const ThresholdFn> constraints, Evaluator&& evaluate) {
  if (constraints.empty()) return 0.0;
  const std::vector<double> values = evaluate(p);
  return violation_cost(values, constraints);
}

struct HierarchySpec {
  std::vector<std::string> objective_names;  // in rank order
  std::vector<double> z;                     // one ratio in [0, 1] per objective
  ParamVector p0;
  Bounds bounds;
  // Multiplies the violation cost wherever it enters a fitness. With 1 the
  // thresholds are the plain quadratic penalty; large values make them
  // behave as hard constraints for the rank-based search.
  double threshold_weight = kDefaultThresholdWeight;

  void validate() const {
    if (objective_names.empty()) throw Error("hierarchy needs at least one objective");
    if (z.size() != objective_names.size()) throw Error("one threshold ratio per objective required");
    for (double r : z)
      if (!(r >= 0.0 && r <= 1.0)) throw Error("threshold ratios must lie in [0, 1]");
    if (p0.size() != bounds.size()) throw DimensionMismatch(bounds.size(), p0.size());
    if (!(threshold_weight > 0.0)) throw Error("threshold weight must be positive");
  }
};

struct HierarchySettings {
  CmaOptions cma;
  TerminationCriteria criteria;
  DiversityConfig diversity;
  std::uint64_t seed = 0;
};

struct StageLog {
  std::string name;
  std::size_t index = 0;
  std::size_t evaluations = 0;
  double f_p0 = 0.0;
  double f_opt = 0.0;
  double lower = 0.0;
  ParamVector p_opt;
};

struct HierarchyResult {
  DiversitySet set;
  std::vector<ThresholdFn> thresholds;
  std::vector<StageLog> stages;
  std::size_t evaluations = 0;
};

/// Optimizes the objectives one at a time in rank order. Stage i maximizes
/// f_i - w * Psi(T) from a fresh CMA state at p0; afterwards the constraint
/// f_i >= f_i(p0) + z_i (f_i(p_opt) - f_i(p0)) joins T. A final diversity
/// stage spreads the set under the accumulated constraints, starting from
/// the last stage's optimum.
///
/// `evaluate(p)` returns every objective value (maximization orientation) at
/// once and must be safe to call concurrently.
template <class Evaluator>
HierarchyResult hierarchical_optimize(const HierarchySpec& spec, const HierarchySettings& settings,
                                      Evaluator&& evaluate, const RunHooks& hooks = {}) {
  spec.validate();
  settings.criteria.validate();
  const std::size_t count = spec.objective_names.size();
  const std::size_t dim = spec.p0.size();
  const BoxMap box(spec.bounds);
  const Bounds unit = BoxMap::unit(dim);
  const double w = spec.threshold_weight;

  auto checked = [&](const ParamVector& p, std::size_t stage) {
    std::vector<double> v = evaluate(p);
    if (v.size() != count) throw StageFailure(stage, "evaluator returned wrong number of objectives");
    for (double x : v)
      if (!std::isfinite(x)) throw StageFailure(stage, "non-finite objective value");
    return v;
  };

  HierarchyResult result;
  for (std::size_t i = 0; i < count; ++i) {
    hooks.check_cancel();
    const std::vector<double> at_p0 = checked(spec.p0, i);
    std::size_t stage_evals = 1;

    ParamVector best_p = spec.p0;
    std::vector<double> best_values = at_p0;
    double best_y = at_p0[i] - w * violation_cost(at_p0, result.thresholds);
    std::vector<double> history;
    std::size_t settled = std::numeric_limits<std::size_t>::max();

    CmaState state = CmaState::create(box.to_unit(spec.p0), settings.cma);
    const std::uint64_t stage_seed = detail::splitmix64(settings.seed + 0x9e37 * (i + 1));
    while (!terminated(state, settings.criteria, history, settled)) {
      hooks.check_cancel();
      const Population pop = sample_population(state, unit, stage_seed);
      std::vector<ParamVector> params(pop.candidates.size());
      for (std::size_t j = 0; j < params.size(); ++j) params[j] = box.from_unit(pop.candidates[j]);
      std::vector<std::vector<double>> values(params.size());
      parallel_for(params.size(), [&](std::size_t j) { values[j] = checked(params[j], i); });

      std::vector<double> fitness(params.size());
      for (std::size_t j = 0; j < params.size(); ++j) {
        fitness[j] = values[j][i] - w * violation_cost(values[j], result.thresholds);
        if (fitness[j] > best_y) {
          best_y = fitness[j];
          best_p = params[j];
          best_values = values[j];
        }
      }
      state = update(state, pop.candidates, fitness);
      stage_evals += params.size();
      history.push_back(best_y);
      if (settled > history.size() && violation_cost(best_values, result.thresholds) <= kFeasibilityTolerance)
        settled = history.size() - 1;
      hooks.report({spec.objective_names[i], i, result.evaluations + stage_evals, best_y});
    }

    StageLog log;
    log.name = spec.objective_names[i];
    log.index = i;
    log.evaluations = stage_evals;
    log.f_p0 = at_p0[i];
    log.f_opt = best_values[i];
    // Same as f_p0 + z (f_opt - f_p0) when f_opt >= f_p0. If p0 broke earlier
    // thresholds f_opt can fall below f_p0; the slack is then taken below
    // f_opt so that p_opt stays admissible.
    log.lower = log.f_opt - (1.0 - spec.z[i]) * std::abs(log.f_opt - log.f_p0);
    log.p_opt = best_p;
    result.thresholds.push_back({log.lower, std::numeric_limits<double>::infinity(), i});
    result.evaluations += stage_evals;
    result.stages.push_back(std::move(log));
  }

  const auto thresholds = result.thresholds;
  auto penalty = [&](const ParamVector& p) { return w * violation_cost(checked(p, count), thresholds); };
  DivOptSettings div;
  div.cma = settings.cma;
  div.criteria = settings.criteria;
  div.seed = detail::splitmix64(settings.seed + 0xd1b54a32d192ed03ULL);
  div.stage_index = count;
  div.evaluation_offset = result.evaluations;
  div.penalty_tolerance = w * kFeasibilityTolerance;
  // The diversity stage starts from the last stage optimum, which already
  // meets the thresholds; p0 usually does not.
  result.set = div_opt(settings.diversity, penalty, result.stages.back().p_opt, spec.bounds, div, hooks);
  result.evaluations += result.set.evaluations;

  StageLog final_log;
  final_log.name = "diversity";
  final_log.index = count;
  final_log.evaluations = result.set.evaluations;
  result.stages.push_back(std::move(final_log));
  return result;
}

}  // namespace layoutforge
