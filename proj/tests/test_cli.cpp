#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sys/wait.h>

#include "layoutforge/service.hpp"

using namespace layoutforge;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const std::string& name) { return fs::path(LAYOUTFORGE_FIXTURES) / name; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + LAYOUTFORGE_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("layoutforge_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const auto out = scratch("codes");
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("analyze --layout " + fixture("gap_wall.json").string()), 2);
  EXPECT_EQ(run_cli("analyze --layout /nonexistent.json --out " + out.string()), 4);

  write_file(out / "bad.json", R"({"version": "1"})");
  EXPECT_EQ(run_cli("analyze --layout " + (out / "bad.json").string() + " --out " + out.string()), 2);

  auto doc = load_layout(fixture("gap_wall.json"));
  doc.query = Region{{Polygon{{0.1, 0.1}, {0.2, 0.1}, {0.2, 0.2}}}};
  write_file(out / "empty.json", dump(layout_to_json(doc)));
  EXPECT_EQ(run_cli("analyze --layout " + (out / "empty.json").string() + " --out " + out.string()), 3);

  EXPECT_EQ(run_cli("optimize --layout " + fixture("empty_room.json").string() + " --out " + out.string()), 5);
  EXPECT_EQ(run_cli("analyze --layout " + fixture("gap_wall.json").string() + " --out /proc/layoutforge"), 4);
  fs::remove_all(out);
}

TEST(Cli, AnalyzeMatchesServiceAnalysis) {
  const auto out = scratch("analyze");
  ASSERT_EQ(run_cli("analyze --layout " + fixture("museum.json").string() + " --resolution 1 --out " + out.string()), 0);
  Service s;
  const auto r = s.handle("POST", "/analyze",
                          Json{{"layout", parse_json_text(read_file(fixture("museum.json")))},
                               {"config", {{"resolution", 1}}}}
                              .dump());
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(parse_json_text(read_file(out / "metrics.json")), r.body["metrics"]);
  EXPECT_EQ(parse_json_text(read_file(out / "heatmap.json")), r.body["heatmap"]);
  EXPECT_EQ(r.body["heatmap"]["grid"]["resolution"].get<double>(), 1.0);
  fs::remove_all(out);
}

TEST(Cli, OptimizeWritesDistinctSpreadMembers) {
  const auto out = scratch("optimize");
  ASSERT_EQ(run_cli("optimize --layout " + fixture("simple_room.json").string() + " --members 5 --seed 4 --out " +
                    out.string()),
            0);
  const auto manifest = parse_json_text(read_file(out / "manifest.json"));
  const auto base = load_layout(fixture("simple_room.json"));
  const auto bounds = base.graph().spec().bounds();
  const double d_min = manifest["d_min"].get<double>();
  ASSERT_EQ(manifest["members"].size(), 5u);

  std::set<std::string> files;
  std::vector<ParamVector> params;
  for (std::size_t k = 1; k <= 5; ++k) {
    const auto text = read_file(out / member_file(k));
    files.insert(text);
    const auto doc = layout_from_json(parse_json_text(text));
    const auto p = ParamVector(manifest["members"][k - 1]["params"].get<std::vector<double>>());
    EXPECT_EQ(doc.walls.size(), base.walls.size());
    EXPECT_NEAR(doc.walls[4].a.x, base.graph().apply_params(p)[4].a.x, 1e-9);
    params.push_back(p);
    EXPECT_GE(manifest["members"][k - 1]["combined"].get<double>(), manifest["base"]["combined"].get<double>());
  }
  EXPECT_EQ(files.size(), 5u);
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = i + 1; j < params.size(); ++j)
      EXPECT_GE(normalized_distance(params[i], params[j], bounds), d_min - 1e-6);
  fs::remove_all(out);
}

TEST(Cli, SingleMemberWithConfig) {
  const auto out = scratch("single");
  write_file(out / "config.json", R"({"objectives": [{"metric": "degree"}], "seed": 5})");
  ASSERT_EQ(run_cli("optimize --layout " + fixture("simple_room.json").string() + " --config " +
                    (out / "config.json").string() + " --out " + (out / "round").string()),
            0);
  const auto manifest = parse_json_text(read_file(out / "round" / "manifest.json"));
  ASSERT_EQ(manifest["members"].size(), 1u);
  EXPECT_EQ(manifest["seed"].get<int>(), 5);
  EXPECT_GE(manifest["members"][0]["K"].get<double>(), manifest["base"]["K"].get<double>());
  EXPECT_EQ(run_cli("optimize --layout " + fixture("simple_room.json").string() + " --config " +
                    (out / "missing.json").string() + " --out " + out.string()),
            4);
  fs::remove_all(out);
}
