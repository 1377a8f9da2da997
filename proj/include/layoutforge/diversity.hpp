#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "layoutforge/box.hpp"
#include "layoutforge/cma.hpp"
#include "layoutforge/errors.hpp"
#include "layoutforge/geometry.hpp"
#include "layoutforge/parallel.hpp"
#include "layoutforge/progress.hpp"

namespace layoutforge {

struct DiversityConfig {
  std::size_t members = 1;
  double k = 1.0;      // spread weight
  double k_m = 100.0;  // clustering weight
  double d_min = -1.0; // negative: 0.1 * sqrt(dim)

  double resolved_d_min(std::size_t dim) const { return d_min >= 0.0 ? d_min : 0.1 * std::sqrt(double(dim)); }

  void validate(std::size_t dim) const {
    if (members < 1) throw Error("diversity set needs at least one member");
    if (!(k >= 0.0) || !(k_m >= 0.0)) throw Error("diversity weights must be non-negative");
    const double d = resolved_d_min(dim);
    if (!(d >= 0.0) || d > std::sqrt(double(dim)) + 1e-12) throw Error("d_min must lie in [0, sqrt(dim)]");
  }
};

/// Euclidean distance after mapping each coordinate onto [0, 1] by its bounds.
inline double normalized_distance(std::span<const double> a, std::span<const double> b, const Bounds& bounds) {
  if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
  if (a.size() != bounds.size()) throw DimensionMismatch(bounds.size(), a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double w = bounds.upper[i] - bounds.lower[i];
    if (!(w > 0.0) || !std::isfinite(w)) continue;
    const double d = (a[i] - b[i]) / w;
    s += d * d;
  }
  return std::sqrt(s);
}

/// (min(0, nearest - d_min))^2 where nearest is over members other than `self`.
inline double min_distance_penalty(std::span<const double> candidate, std::span<const ParamVector> members,
                                   std::size_t self, const Bounds& bounds, double d_min) {
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < members.size(); ++j) {
    if (j == self) continue;
    nearest = std::min(nearest, normalized_distance(members[j], candidate, bounds));
  }
  if (!std::isfinite(nearest)) return 0.0;
  const double short_by = std::min(0.0, nearest - d_min);
  return short_by * short_by;
}

/// k * sum_j d(p_j, candidate) - k_m * min_distance_penalty, with the
/// candidate occupying slot `self` (contributing distance 0 to the sum).
inline double diversity_score(std::span<const double> candidate, std::span<const ParamVector> members,
                              std::size_t self, const Bounds& bounds, const DiversityConfig& cfg) {
  double spread = 0.0;
  for (std::size_t j = 0; j < members.size(); ++j) {
    if (j == self) continue;
    spread += normalized_distance(members[j], candidate, bounds);
  }
  const double d_min = cfg.resolved_d_min(bounds.size());
  return cfg.k * spread - cfg.k_m * min_distance_penalty(candidate, members, self, bounds, d_min);
}

struct DiversitySet {
  std::vector<ParamVector> members;
  std::vector<CmaState> states;  // unit-cube coordinates
  std::size_t evaluations = 0;
  std::size_t rounds = 0;
};

// Picks the member optimized in a given round. Default: in order.
using MemberSelector = std::function<std::size_t(std::size_t round, std::size_t members)>;

struct DivOptSettings {
  CmaOptions cma;
  TerminationCriteria criteria;
  std::uint64_t seed = 0;
  MemberSelector selector;
  std::size_t stage_index = 0;
  std::size_t evaluation_offset = 0;  // for cumulative progress reporting
  double penalty_tolerance = 0.0;     // a member costing at most this counts as feasible
};

/// Round-robin diversity optimization. Every member starts at p0 with its own
/// CMA state; each round one member samples lambda candidates, scores them as
/// diversity_score - penalty(candidate) against the current set and updates
/// its state. The round's best candidate replaces the member when it beats
/// the member's own score against the current set. Rounds continue until
/// every member meets the termination criteria.
///
/// `penalty` must be safe to call concurrently.
template <class Penalty>
DiversitySet div_opt(const DiversityConfig& cfg, Penalty&& penalty, const ParamVector& p0, const Bounds& bounds,
                     const DivOptSettings& settings = {}, const RunHooks& hooks = {}) {
  const std::size_t dim = p0.size();
  cfg.validate(dim);
  settings.criteria.validate();
  const BoxMap box(bounds);
  if (!bounds.contains(p0)) throw Error("initial parameters lie outside the bounds");
  const Bounds unit = BoxMap::unit(dim);
  const std::size_t n = cfg.members;
  const double d_min = cfg.resolved_d_min(dim);

  DiversitySet set;
  const ParamVector u0 = box.to_unit(p0);
  CmaOptions unit_opts = settings.cma;
  for (std::size_t m = 0; m < n; ++m) {
    set.members.push_back(p0);
    set.states.push_back(CmaState::create(u0, unit_opts));
  }
  const double p0_cost = penalty(p0);
  if (!std::isfinite(p0_cost)) throw StageFailure(settings.stage_index, "non-finite penalty in diversity stage");
  std::vector<double> member_cost(n, p0_cost);
  std::vector<std::vector<double>> history(n);
  std::vector<char> done(n, 0);
  std::vector<std::size_t> settled(n, std::numeric_limits<std::size_t>::max());
  const MemberSelector select =
      settings.selector ? settings.selector : [](std::size_t round, std::size_t count) { return round % count; };

  double best_seen = -std::numeric_limits<double>::infinity();
  for (std::size_t round = 0; std::count(done.begin(), done.end(), 0) > 0; ++round) {
    hooks.check_cancel();
    const std::size_t m = select(round, n) % n;
    if (done[m]) continue;
    CmaState& state = set.states[m];

    const Population pop = sample_population(state, unit, detail::splitmix64(settings.seed + 0x51ed27 * (m + 1)));
    std::vector<ParamVector> params(pop.candidates.size());
    std::vector<double> cost(pop.candidates.size());
    for (std::size_t i = 0; i < params.size(); ++i) params[i] = box.from_unit(pop.candidates[i]);
    parallel_for(params.size(), [&](std::size_t i) { cost[i] = penalty(params[i]); });

    std::vector<double> fitness(params.size());
    std::size_t winner = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!std::isfinite(cost[i])) throw StageFailure(settings.stage_index, "non-finite penalty in diversity stage");
      fitness[i] = diversity_score(params[i], set.members, m, bounds, cfg) - cost[i];
      if (fitness[i] > fitness[winner]) winner = i;
    }
    const double round_best = fitness[winner];
    state = update(state, pop.candidates, fitness);
    const double incumbent = diversity_score(set.members[m], set.members, m, bounds, cfg) - member_cost[m];
    if (round_best > incumbent) {
      set.members[m] = params[winner];
      member_cost[m] = cost[winner];
    }
    set.evaluations += params.size();
    ++set.rounds;
    history[m].push_back(round_best);
    if (settled[m] > history[m].size() && member_cost[m] <= settings.penalty_tolerance &&
        min_distance_penalty(set.members[m], set.members, m, bounds, d_min) == 0.0)
      settled[m] = history[m].size() - 1;
    best_seen = std::max(best_seen, round_best);
    if (terminated(state, settings.criteria, history[m], settled[m])) done[m] = 1;

    hooks.report({"diversity", settings.stage_index, settings.evaluation_offset + set.evaluations, best_seen});
  }
  return set;
}

}  // namespace layoutforge
