#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "layoutforge/http.hpp"
#include "layoutforge/io.hpp"

using namespace layoutforge;

namespace {

enum Exit { kOk = 0, kUsage = 2, kEmptyRegion = 3, kIo = 4, kOptimization = 5 };

RunConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return config_from_json(parse_json_text(read_file(path), path));
}

int analyze(const std::string& layout, std::optional<double> resolution, const std::string& config, const std::string& out) {
  const auto doc = load_layout(layout);
  RunConfig cfg = load_config(config);
  if (resolution) cfg.resolution = resolution;
  const auto a = analyze_document(doc, cfg);
  write_analysis(out, a);
  const auto& m = a.evaluation.metrics;
  std::printf("vertices %zu  K %.6g  D %.6g  H %.6g  combined %.6g\n", m.vertex_count, m.K, m.D, m.H,
              a.evaluation.combined);
  return kOk;
}

int optimize(const std::string& layout, std::optional<std::size_t> members, std::optional<std::uint64_t> seed,
             const std::string& config, const std::string& out) {
  const auto doc = load_layout(layout);
  RunConfig cfg = load_config(config);
  if (members) cfg.members = *members;
  if (seed) cfg.seed = *seed;
  const auto problem = make_problem(doc, cfg);
  RoundResult r;
  try {
    r = run_round(problem, cfg.seed);
  } catch (const EmptyRegionError&) {
    throw;
  } catch (const Error& e) {
    std::cerr << "optimization failed: " << e.what() << "\n";
    return kOptimization;
  }
  write_round(out, doc, problem, r, cfg.seed);
  std::printf("base combined %.6g\n", r.base.combined);
  for (std::size_t k = 0; k < r.members.size(); ++k)
    std::printf("member %zu combined %.6g  -> %s\n", k + 1, r.members[k].combined, member_file(k + 1).c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layout analysis and optimization"};
  app.require_subcommand(1);

  std::string layout, config, out;
  std::optional<double> resolution;
  auto* an = app.add_subcommand("analyze", "Compute visibility heatmaps for a layout");
  an->add_option("--layout", layout, "Layout document")->required();
  an->add_option("--resolution", resolution, "Grid resolution in cells per metre");
  an->add_option("--config", config, "Run configuration");
  an->add_option("--out", out, "Output directory")->required();

  std::optional<std::size_t> members;
  std::optional<std::uint64_t> seed;
  auto* op = app.add_subcommand("optimize", "Run one optimization round");
  op->add_option("--layout", layout, "Layout document")->required();
  op->add_option("--members", members, "Diversity set size");
  op->add_option("--seed", seed, "Random seed");
  op->add_option("--config", config, "Run configuration");
  op->add_option("--out", out, "Output directory")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  auto* sv = app.add_subcommand("serve", "Serve the HTTP job API");
  sv->add_option("--host", host, "Bind address");
  sv->add_option("--port", port, "Port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*an) return analyze(layout, resolution, config, out);
    if (*op) return optimize(layout, members, seed, config, out);
    std::printf("listening on %s:%d\n", host.c_str(), port);
    std::fflush(stdout);
    if (!serve(host, port)) {
      std::cerr << "cannot listen on " << host << ":" << port << "\n";
      return kIo;
    }
    return kOk;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const InvalidLayout& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  } catch (const EmptyRegionError& e) {
    std::cerr << e.what() << "\n";
    return kEmptyRegion;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kOptimization;
  }
}
