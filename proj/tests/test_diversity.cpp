#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "layoutforge/diversity.hpp"

using namespace layoutforge;

namespace {

// Direct transcription of the spread and clustering terms.
double transcribed_score(const std::vector<std::vector<double>>& set, std::size_t m, const std::vector<double>& lo,
                         const std::vector<double>& hi, double k, double k_m, double d_min) {
  auto d = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::pow((a[i] - lo[i]) / (hi[i] - lo[i]) - (b[i] - lo[i]) / (hi[i] - lo[i]), 2);
    return std::sqrt(s);
  };
  double sum = 0, nearest = INFINITY;
  for (std::size_t j = 0; j < set.size(); ++j) {
    sum += d(set[j], set[m]);
    if (j != m) nearest = std::min(nearest, d(set[j], set[m]));
  }
  const double delta = std::pow(std::min(0.0, nearest - d_min), 2);
  return k * sum - k_m * delta;
}

double min_pairwise(const DiversitySet& s, const Bounds& b) {
  double best = INFINITY;
  for (std::size_t i = 0; i < s.members.size(); ++i)
    for (std::size_t j = i + 1; j < s.members.size(); ++j)
      best = std::min(best, normalized_distance(s.members[i], s.members[j], b));
  return best;
}

}  // namespace

TEST(NormalizedDistance, Examples) {
  const ParamVector a{3.0, 4.0};
  EXPECT_EQ(normalized_distance(a, a, Bounds::box(2, 0, 10)), 0.0);
  EXPECT_DOUBLE_EQ(normalized_distance(ParamVector{0.0}, ParamVector{10.0}, Bounds::box(1, 0, 10)), 1.0);
  EXPECT_NEAR(normalized_distance(ParamVector{0.0, 0.0}, ParamVector{10.0, 10.0}, Bounds::box(2, 0, 10)),
              std::sqrt(2.0), 1e-12);
  // Zero-width coordinate contributes nothing.
  EXPECT_DOUBLE_EQ(normalized_distance(ParamVector{0.0, 1.0}, ParamVector{10.0, 1.0},
                                       Bounds{{0.0, 1.0}, {10.0, 1.0}}),
                   1.0);
  EXPECT_THROW(normalized_distance(ParamVector{0.0}, ParamVector{0.0, 1.0}, Bounds::box(2, 0, 1)), DimensionMismatch);
}

TEST(MinDistancePenalty, Examples) {
  const Bounds b = Bounds::box(1, 0, 1);
  std::vector<ParamVector> set = {ParamVector{0.0}, ParamVector{0.5}};
  EXPECT_EQ(min_distance_penalty(set[0], set, 0, b, 0.3), 0.0);
  std::vector<ParamVector> dup = {ParamVector{0.4}, ParamVector{0.4}};
  EXPECT_NEAR(min_distance_penalty(dup[0], dup, 0, b, 0.2), 0.04, 1e-15);
  std::vector<ParamVector> near = {ParamVector{0.4}, ParamVector{0.5}};
  EXPECT_NEAR(min_distance_penalty(near[0], near, 0, b, 0.3), 0.04, 1e-15);
  EXPECT_EQ(min_distance_penalty(set[0], std::vector<ParamVector>{set[0]}, 0, b, 0.3), 0.0);
}

TEST(DiversityScore, Examples) {
  const Bounds b = Bounds::box(1, 0, 1);
  DiversityConfig cfg;
  cfg.k = 1;
  cfg.k_m = 1;
  cfg.d_min = 0.2;
  std::vector<ParamVector> same(3, ParamVector{0.5});
  EXPECT_NEAR(diversity_score(same[1], same, 1, b, cfg), -0.04, 1e-15);

  cfg.k_m = 0;
  std::vector<ParamVector> pair = {ParamVector{0.0}, ParamVector{1.0}};
  EXPECT_DOUBLE_EQ(diversity_score(pair[0], pair, 0, b, cfg), 1.0);
  EXPECT_DOUBLE_EQ(diversity_score(pair[1], pair, 1, b, cfg), 1.0);
}

TEST(DiversityScore, MatchesTranscription) {
  std::mt19937_64 rng(123);
  const std::vector<double> lo = {-1, 0, 2}, hi = {1, 5, 2.5};
  const Bounds b{lo, hi};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> raw(3, std::vector<double>(3));
    std::vector<ParamVector> set;
    for (auto& v : raw) {
      for (std::size_t i = 0; i < 3; ++i) v[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
      set.emplace_back(v);
    }
    DiversityConfig cfg;
    cfg.k = std::uniform_real_distribution<double>(0, 2)(rng);
    cfg.k_m = std::uniform_real_distribution<double>(0, 200)(rng);
    cfg.d_min = std::uniform_real_distribution<double>(0, 1.5)(rng);
    for (std::size_t m = 0; m < 3; ++m)
      EXPECT_NEAR(diversity_score(set[m], set, m, b, cfg), transcribed_score(raw, m, lo, hi, cfg.k, cfg.k_m, cfg.d_min),
                  1e-9);
  }
}

TEST(DiversityScore, MovingAwayNeverHurts) {
  const Bounds b = Bounds::box(2, 0, 10);
  const DiversityConfig cfg;
  std::vector<ParamVector> set = {ParamVector{5.0, 5.0}, ParamVector{1.0, 1.0}, ParamVector{2.0, 0.0}};
  double last = -INFINITY;
  for (double t = 5.0; t <= 10.0; t += 0.25) {
    set[0] = ParamVector{t, t};
    const double s = diversity_score(set[0], set, 0, b, cfg);
    EXPECT_GE(s, last);
    last = s;
  }
}

TEST(DiversityConfig, Validation) {
  EXPECT_DOUBLE_EQ(DiversityConfig{}.resolved_d_min(4), 0.2);
  EXPECT_THROW((DiversityConfig{0}.validate(2)), Error);
  EXPECT_THROW((DiversityConfig{2, -1.0}.validate(2)), Error);
  EXPECT_THROW((DiversityConfig{2, 1.0, 100.0, 2.0}.validate(2)), Error);
  EXPECT_NO_THROW((DiversityConfig{2, 1.0, 100.0, 0.0}.validate(2)));
}

TEST(DivOpt, SingleMemberIsPlainMaximization) {
  const Bounds b = Bounds::box(2, -2, 2);
  auto f = [](const ParamVector& p) { return (p[0] - 0.7) * (p[0] - 0.7) + (p[1] + 1.2) * (p[1] + 1.2); };
  DivOptSettings settings;
  settings.criteria.target_fraction = 1.0;
  settings.criteria.relative_improvement_floor = 1e-12;
  settings.criteria.max_evaluations = 5000;
  const auto set = div_opt(DiversityConfig{}, f, ParamVector{0.0, 0.0}, b, settings);
  ASSERT_EQ(set.members.size(), 1u);
  EXPECT_NEAR(set.members[0][0], 0.7, 1e-4);
  EXPECT_NEAR(set.members[0][1], -1.2, 1e-4);
}

TEST(DivOpt, FlatObjectiveSeparatesMembers) {
  const Bounds b = Bounds::box(2, 0, 1);
  DiversityConfig cfg;
  cfg.members = 2;
  const auto set = div_opt(cfg, [](const ParamVector&) { return 0.0; }, ParamVector{0.5, 0.5}, b);
  const double d = normalized_distance(set.members[0], set.members[1], b);
  EXPECT_GT(d, 0.0);
  EXPECT_GE(d, cfg.resolved_d_min(2));
}

TEST(DivOpt, BimodalObjectiveSplitsBasins) {
  const Bounds b = Bounds::box(1, -2, 2);
  auto f = [](const ParamVector& p) { return 10.0 * std::min((p[0] - 1) * (p[0] - 1), (p[0] + 1) * (p[0] + 1)); };
  DiversityConfig cfg;
  cfg.members = 2;
  const auto set = div_opt(cfg, f, ParamVector{0.0}, b);
  const double x0 = set.members[0][0], x1 = set.members[1][0];
  EXPECT_LT(x0 * x1, 0.0) << x0 << " " << x1;
  EXPECT_GT(std::abs(x0 - x1), 1.0);  // half the separation of the optima
}

TEST(DivOpt, DeterministicAndInBounds) {
  const Bounds b{{-1.0, 0.0, -3.0}, {1.0, 0.5, 3.0}};
  auto f = [](const ParamVector& p) { return std::abs(p[0] * p[2]) + p[1]; };
  DiversityConfig cfg;
  cfg.members = 3;
  DivOptSettings settings;
  settings.seed = 77;
  const auto a = div_opt(cfg, f, ParamVector{0.0, 0.25, 0.0}, b, settings);
  const auto c = div_opt(cfg, f, ParamVector{0.0, 0.25, 0.0}, b, settings);
  EXPECT_EQ(a.members, c.members);
  EXPECT_EQ(a.evaluations, c.evaluations);
  for (const auto& m : a.members) EXPECT_TRUE(b.contains(m));
  EXPECT_GE(min_pairwise(a, b), cfg.resolved_d_min(3) - 1e-6);
}

TEST(DivOpt, SelectorChoosesMembers) {
  const Bounds b = Bounds::box(1, 0, 1);
  DiversityConfig cfg;
  cfg.members = 2;
  DivOptSettings settings;
  settings.criteria.max_evaluations = 30;
  std::vector<std::size_t> picked;
  settings.selector = [&](std::size_t round, std::size_t n) {
    picked.push_back(round);
    return (n - 1) - round % n;
  };
  const auto set = div_opt(cfg, [](const ParamVector&) { return 0.0; }, ParamVector{0.5}, b, settings);
  EXPECT_FALSE(picked.empty());
  EXPECT_GE(set.evaluations, 30u);
}

TEST(DivOpt, PropagatesFailures) {
  const Bounds b = Bounds::box(1, 0, 1);
  EXPECT_THROW(div_opt(DiversityConfig{}, [](const ParamVector&) { return std::nan(""); }, ParamVector{0.5}, b),
               StageFailure);
  EXPECT_THROW(div_opt(DiversityConfig{}, [](const ParamVector&) -> double { throw std::runtime_error("boom"); },
                       ParamVector{0.5}, b),
               std::runtime_error);
  EXPECT_THROW(div_opt(DiversityConfig{}, [](const ParamVector&) { return 0.0; }, ParamVector{2.0}, b), Error);
}
