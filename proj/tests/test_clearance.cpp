#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "layoutforge/clearance.hpp"
#include "oracles.hpp"

using namespace layoutforge;

TEST(Clearance, DisjointCapsulesContributeNothing) {
  std::vector<WallSegment> walls = {{{0, 0}, {1, 0}, "a"}, {{0, 2}, {1, 2}, "b"}};
  EXPECT_EQ(clearance(walls, 0.5), 0.0);
}

TEST(Clearance, AdjoiningAndDuplicateWallsExcluded) {
  std::vector<WallSegment> self = {{{0, 0}, {1, 0}, "a"}, {{0, 0}, {1, 0}, "a2"}};
  EXPECT_EQ(clearance(self, 0.5), 0.0);
  std::vector<WallSegment> corner = {{{0, 0}, {1, 0}, "a"}, {{1, 0}, {1, 1}, "b"}};
  EXPECT_EQ(clearance(corner, 0.5), 0.0);
  // Within the 1e-9 m adjacency tolerance.
  std::vector<WallSegment> near_corner = {{{0, 0}, {1, 0}, "a"}, {{1 + 5e-10, 0}, {1, 1}, "b"}};
  EXPECT_EQ(clearance(near_corner, 0.5), 0.0);
}

TEST(Clearance, ParallelWallsMatchMonteCarlo) {
  const WallSegment a{{0, 0}, {1, 0}, "a"}, b{{0, 0.5}, {1, 0.5}, "b"};
  std::vector<WallSegment> walls = {a, b};
  const double expected = oracle::monte_carlo_overlap(a, b, 0.5, 1'000'000, 2024);
  const double got = clearance(walls, 0.5);
  EXPECT_NEAR(got, expected, 0.01 * expected);
}

TEST(Clearance, RejectsNonPositiveRadius) {
  std::vector<WallSegment> walls = {{{0, 0}, {1, 0}, "a"}};
  EXPECT_THROW(clearance(walls, 0.0), Error);
  EXPECT_THROW(clearance(walls, -1.0), Error);
}

TEST(ClearancePenalty, IsTheSquare) {
  EXPECT_EQ(clearance_penalty(0.0), 0.0);
  EXPECT_DOUBLE_EQ(clearance_penalty(2.0), 4.0);
  EXPECT_DOUBLE_EQ(clearance_penalty(0.3), 0.09);
  std::vector<WallSegment> walls = {{{0, 0}, {1, 0}, "a"}, {{0, 0.5}, {1, 0.5}, "b"}};
  EXPECT_DOUBLE_EQ(clearance_penalty(walls), clearance(walls) * clearance(walls));
}

TEST(Clearance, SymmetricAndMonotoneInRadius) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int layout = 0; layout < 30; ++layout) {
    std::vector<WallSegment> walls;
    for (int w = 0; w < 5; ++w) walls.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}, std::to_string(w)});
    std::vector<WallSegment> reversed(walls.rbegin(), walls.rend());
    double previous = 0.0;
    for (double r = 0.05; r <= 1.5; r += 0.05) {
      const double c = clearance(walls, r);
      EXPECT_NEAR(c, clearance(reversed, r), 1e-9 * std::max(1.0, c));
      EXPECT_GE(c, previous - 1e-12);
      previous = c;
    }
  }
}

TEST(CapsulePolygon, ConvexCounterClockwiseWithExpectedArea) {
  const WallSegment w{{0, 0}, {2, 0}, "w"};
  const auto poly = capsule_polygon(w, 0.5, 16);
  EXPECT_EQ(poly.size(), 34u);
  // Rectangle 2 x 1 plus a 32-gon inscribed in a circle of radius 0.5.
  const double ngon = 0.5 * 32 * 0.25 * std::sin(2 * std::numbers::pi / 32);
  EXPECT_NEAR(signed_area(poly), 2.0 + ngon, 1e-12);
}
