#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "layoutforge/io.hpp"
#include "oracles.hpp"

using namespace layoutforge;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

fs::path fixture(const std::string& name) { return fs::path(LAYOUTFORGE_FIXTURES) / name; }

SampledGrid full_grid(const GridSpec& spec, const std::vector<WallSegment>& walls) {
  return sample_grid(spec, walls, Region::covering(spec), Region::covering(spec));
}

Outcome forest_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 300)(rng);
    const double density = std::uniform_real_distribution<double>(0.02, 0.5)(rng);
    const auto rg = oracle::erdos_renyi(n, density, rng());
    const auto g = VisibilityGraph::from_edges(n, rg.edges);
    std::vector<TreeStats> expected(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto levels = oracle::sequential_bfs(rg.adj, r);
      expected[r] = TreeStats{levels.counts, levels.visited};
    }
    for (auto s : {ForestStrategy::naive, ForestStrategy::cutoff, ForestStrategy::indexed}) {
      const auto forest = build_forest(g, s);
      if (forest.trees != expected) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 30.0, fmt("100 graphs, %.0f mismatching forests, %.2f s", double(mismatches), secs)};
}

Outcome closed_form() {
  const GridSpec spec{{0, 0}, 10, 10, 1.0};
  const auto r = compute_metrics(build_visibility_graph(full_grid(spec, {}), {}));
  const double v = double(r.vertex_count);
  const double h = -(1 / v) * std::log2(1 / v) - ((v - 1) / v) * std::log2((v - 1) / v);
  double worst = 0;
  bool exact = true;
  for (std::size_t i = 0; i < r.vertex_count; ++i) {
    exact = exact && r.degree[i] == r.vertex_count - 1 && r.depth[i] == 1.0;
    worst = std::max(worst, std::abs(r.entropy[i] - h));
  }
  return {exact && worst <= 1e-9, fmt("|V| = %.0f, max entropy error %.3g", v, worst)};
}

Outcome los_bound() {
  const auto doc = load_layout(fixture("gap_wall.json"));
  const auto g = build_visibility_graph(full_grid(*doc.grid, doc.walls), doc.walls);
  const std::size_t n = g.size();
  return {g.los_tests() == n * (n - 1) / 2, fmt("n = %.0f, tests %.0f, n(n-1)/2 = %.0f", double(n),
                                                  double(g.los_tests()), double(n * (n - 1) / 2))};
}

Outcome scaling_shape() {
  // Walls lie outside the lattice, so no vertex is dropped and no sight line is cut short.
  std::vector<WallSegment> walls;
  for (int k = 0; k < 3; ++k) walls.push_back({{-5.0 - k, 0}, {-5.0 - k, 10}, "w" + std::to_string(k)});
  const auto small = build_visibility_graph(full_grid({{0, 0}, 10, 10, 1.0}, walls), walls);
  const auto large = build_visibility_graph(full_grid({{0, 0}, 20, 10, 1.0}, walls), walls);
  const std::size_t n = small.size();
  const bool doubled = large.size() == 2 * n;
  const bool ratio = large.los_tests() * (n * (n - 1)) == small.los_tests() * (2 * n * (2 * n - 1));
  const bool linear = small.wall_checks() == small.los_tests() * walls.size() &&
                      large.wall_checks() == large.los_tests() * walls.size();
  return {doubled && ratio && linear,
          fmt("LOS tests x%.6f (expected %.6f), wall checks = tests x %.0f",
              double(large.los_tests()) / double(small.los_tests()), (2.0 * n * (2.0 * n - 1)) / (n * (n - 1.0)),
              double(walls.size()))};
}

Outcome clearance_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 2.0), ang(0.0, 2 * M_PI), len(0.5, 2.0), off(-0.6, 0.6);
  double worst = 0;
  bool ok = true;
  for (int k = 0; k < 10; ++k) {
    const Point2 a{u(rng), u(rng)};
    const double t1 = ang(rng), l1 = len(rng);
    const WallSegment s1{a, {a.x + l1 * std::cos(t1), a.y + l1 * std::sin(t1)}, "a"};
    const Point2 mid{(s1.a.x + s1.b.x) / 2 + off(rng), (s1.a.y + s1.b.y) / 2 + off(rng)};
    const double t2 = ang(rng), l2 = len(rng);
    const WallSegment s2{{mid.x - l2 / 2 * std::cos(t2), mid.y - l2 / 2 * std::sin(t2)},
                         {mid.x + l2 / 2 * std::cos(t2), mid.y + l2 / 2 * std::sin(t2)}, "b"};
    const std::vector<WallSegment> walls = {s1, s2};
    const double got = clearance(walls, kDefaultClearanceRadius);
    const double mc = oracle::monte_carlo_overlap(s1, s2, kDefaultClearanceRadius, 1'000'000, 1000 + k);
    const double err = std::abs(got - mc);
    if (!(err <= 0.01 * mc || err <= 1e-3)) ok = false;
    worst = std::max(worst, mc > 0 ? err / mc : err);
  }
  return {ok, fmt("10 configurations, worst relative error %.4f", worst)};
}

Outcome cma_sphere() {
  const auto t0 = Clock::now();
  CmaOptions opts;
  opts.sigma = 1.0;
  auto s = CmaState::create(ParamVector{3.0, 3.0}, opts);
  const Bounds b = Bounds::box(2, -5, 5);
  std::size_t gen = 0;
  double err = INFINITY;
  for (; gen < 200 && err >= 1e-6; ++gen) {
    const auto pop = sample_population(s, b, 2024);
    std::vector<double> fit;
    for (const auto& c : pop.candidates) fit.push_back(-(c[0] * c[0] + c[1] * c[1]));
    s = update(s, pop.candidates, fit);
    err = std::hypot(s.best[0], s.best[1]);
  }
  const double secs = seconds_since(t0);
  return {err < 1e-6 && secs < 5.0, fmt("error %.3g after %.0f generations, %.3f s", err, double(gen), secs)};
}

Outcome hierarchy_feasibility() {
  HierarchySpec spec;
  spec.objective_names = {"f1", "f2"};
  spec.z = {1.0, kDefaultThresholdRatio};
  spec.p0 = ParamVector{2.0};
  spec.bounds = Bounds::box(1, -3, 3);
  auto f = [](const ParamVector& p) {
    return std::vector<double>{-(p[0] - 1) * (p[0] - 1), -(p[0] + 1) * (p[0] + 1)};
  };
  const auto r = hierarchical_optimize(spec, {}, f);
  double worst = 0;
  for (const auto& m : r.set.members) worst = std::max(worst, violation_cost(f(m), r.thresholds));
  for (const auto& st : r.stages)
    if (st.name != "diversity") worst = std::max(worst, violation_cost(f(st.p_opt), r.thresholds));
  const double pin = std::abs(r.stages[1].p_opt[0] - r.stages[0].p_opt[0]);
  return {worst < 1e-6 && pin <= 1e-3, fmt("max violation %.3g, stage-2 offset from stage-1 optimum %.3g", worst, pin)};
}

Outcome diversity_contract() {
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.members = 5;
  const auto problem = make_problem(load_layout(fixture("simple_room.json")), cfg);
  const auto r = run_round(problem, 1);
  const double secs = seconds_since(t0);
  const auto bounds = problem.graph.spec().bounds();
  const double d_min = problem.diversity.resolved_d_min(problem.graph.dimension());
  double closest = INFINITY, weakest = INFINITY;
  for (std::size_t i = 0; i < r.members.size(); ++i) {
    weakest = std::min(weakest, r.members[i].combined);
    for (std::size_t j = i + 1; j < r.members.size(); ++j)
      closest = std::min(closest, normalized_distance(r.members[i].p, r.members[j].p, bounds));
  }
  const bool ok = r.members.size() == 5 && closest >= d_min - 1e-6 && weakest >= r.base.combined && secs < 120.0 &&
                  r.base.metrics.vertex_count <= 400;
  return {ok, fmt("min distance %.4f (d_min %.4f), min combined - base %.4f", closest, d_min, weakest - r.base.combined) +
                  fmt(", %.2f s", secs)};
}

Outcome sensitivity() {
  const auto doc = load_layout(fixture("gallery.json"));
  std::vector<double> k;
  for (double res : {0.5, 1.0, 2.0}) {
    GridSpec spec = *doc.grid;
    spec.resolution = res;
    const auto r = compute_metrics(build_visibility_graph(full_grid(spec, doc.walls), doc.walls));
    k.push_back(r.K / double(r.vertex_count - 1));
  }
  const double d1 = std::abs(k[1] - k[0]), d2 = std::abs(k[2] - k[1]);
  return {d2 < d1, fmt("normalized K changes %.5f then %.5f", d1, d2)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "layoutforge_acceptance";
  fs::remove_all(root);
  std::string manifests[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path out = root / ("run" + std::to_string(run));
    const std::string cmd = std::string("\"") + LAYOUTFORGE_CLI + "\" optimize --layout \"" +
                            fixture("simple_room.json").string() + "\" --members 3 --seed 17 --out \"" + out.string() +
                            "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "optimize exited with an error"};
    manifests[run] = read_file(out / "manifest.json");
  }
  fs::remove_all(root);
  return {!manifests[0].empty() && manifests[0] == manifests[1], fmt("manifest %.0f bytes", double(manifests[0].size()))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"forest-oracle-equivalence", forest_oracle},
      {"closed-form-metrics", closed_form},
      {"los-work-bound", los_bound},
      {"scaling-shape", scaling_shape},
      {"clearance-oracle", clearance_oracle},
      {"cma-sanity", cma_sphere},
      {"hierarchy-feasibility", hierarchy_feasibility},
      {"diversity-contract", diversity_contract},
      {"sensitivity-stabilization", sensitivity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
