#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "layoutforge/errors.hpp"
#include "layoutforge/geometry.hpp"
#include "layoutforge/grid.hpp"
#include "layoutforge/pipeline.hpp"

namespace layoutforge {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

// Unreadable or unwritable files.
class IoError : public Error {
 public:
  using Error::Error;
};

struct LayoutDocument {
  std::vector<WallSegment> walls;
  std::vector<ElementGroup> groups;
  ParamSpec params;
  std::optional<GridSpec> grid;
  std::optional<Region> query;
  std::optional<Region> reference;

  friend bool operator==(const LayoutDocument&, const LayoutDocument&) = default;

  ArchitecturalGraph graph() const { return ArchitecturalGraph(walls, groups, params); }

  // Declared grid, else the walls' bounding box at the default resolution.
  GridSpec grid_or_default() const {
    if (grid) return *grid;
    if (walls.empty()) throw InvalidLayout("layout has no walls and no grid");
    Point2 lo = walls[0].a, hi = walls[0].a;
    for (const auto& w : walls)
      for (Point2 q : {w.a, w.b}) {
        lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
        hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
      }
    return GridSpec{lo, hi.x - lo.x, hi.y - lo.y, kDefaultResolution};
  }
};

inline const char* to_string(ParamKind k) {
  switch (k) {
    case ParamKind::translation_x: return "translation-x";
    case ParamKind::translation_y: return "translation-y";
    case ParamKind::rotation: return "rotation";
  }
  return "?";
}

namespace detail {

inline void require_keys(const Json& j, const std::string& where, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  for (const char* k : required)
    if (!j.contains(k)) throw ParseError(where + ": missing '" + k + "'");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : required) known = known || item.key() == k;
    for (const char* k : optional) known = known || item.key() == k;
    if (!known) throw ParseError(where + ": unknown key '" + item.key() + "'");
  }
}

inline double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(where + ": expected a finite number");
  return v;
}

inline std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a string");
  return j.get<std::string>();
}

inline bool flag(const Json& j, const std::string& where) {
  if (!j.is_boolean()) throw ParseError(where + ": expected true or false");
  return j.get<bool>();
}

inline std::uint64_t count(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    throw ParseError(where + ": expected a non-negative integer");
  return j.get<std::uint64_t>();
}

inline Point2 point(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ParseError(where + ": expected [x, y]");
  return {number(j[0], where + "[0]"), number(j[1], where + "[1]")};
}

inline Json to_json(Point2 p) { return Json::array({p.x, p.y}); }

inline Region region(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected a list of polygons");
  Region r;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() < 3) throw ParseError(at + ": a polygon needs at least 3 points");
    Polygon poly;
    for (std::size_t k = 0; k < j[i].size(); ++k) poly.push_back(point(j[i][k], at + "[" + std::to_string(k) + "]"));
    r.polygons.push_back(std::move(poly));
  }
  try {
    r.validate();
  } catch (const Error& e) {
    throw ParseError(where + ": " + e.what());
  }
  return r;
}

inline Json to_json(const Region& r) {
  Json out = Json::array();
  for (const auto& poly : r.polygons) {
    Json pj = Json::array();
    for (Point2 p : poly) pj.push_back(to_json(p));
    out.push_back(std::move(pj));
  }
  return out;
}

}  // namespace detail

inline Json grid_to_json(const GridSpec& g) {
  return {{"origin", detail::to_json(g.origin)}, {"width", g.width}, {"height", g.height}, {"resolution", g.resolution}};
}

inline GridSpec grid_from_json(const Json& j, const std::string& where = "grid") {
  detail::require_keys(j, where, {"origin", "width", "height", "resolution"});
  GridSpec g{detail::point(j["origin"], where + ".origin"), detail::number(j["width"], where + ".width"),
             detail::number(j["height"], where + ".height"), detail::number(j["resolution"], where + ".resolution")};
  try {
    g.validate();
  } catch (const Error& e) {
    throw ParseError(where + ": " + e.what());
  }
  return g;
}

/// Parses and validates a layout document. Any schema or content problem is
/// reported as ParseError naming the offending location.
inline LayoutDocument layout_from_json(const Json& j) {
  using namespace detail;
  require_keys(j, "layout", {"version", "walls"}, {"groups", "params", "grid", "regions"});
  if (text(j["version"], "version") != kSchemaVersion) throw ParseError("version: unsupported schema version");

  LayoutDocument doc;
  if (!j["walls"].is_array()) throw ParseError("walls: expected a list");
  for (std::size_t i = 0; i < j["walls"].size(); ++i) {
    const std::string at = "walls[" + std::to_string(i) + "]";
    const Json& w = j["walls"][i];
    require_keys(w, at, {"id", "a", "b"});
    doc.walls.push_back({point(w["a"], at + ".a"), point(w["b"], at + ".b"), text(w["id"], at + ".id")});
  }
  if (j.contains("groups")) {
    if (!j["groups"].is_array()) throw ParseError("groups: expected a list");
    for (std::size_t i = 0; i < j["groups"].size(); ++i) {
      const std::string at = "groups[" + std::to_string(i) + "]";
      const Json& g = j["groups"][i];
      require_keys(g, at, {"id", "walls"}, {"pivot"});
      ElementGroup group;
      group.id = text(g["id"], at + ".id");
      if (!g["walls"].is_array()) throw ParseError(at + ".walls: expected a list of wall ids");
      for (std::size_t k = 0; k < g["walls"].size(); ++k)
        group.wall_ids.push_back(text(g["walls"][k], at + ".walls[" + std::to_string(k) + "]"));
      if (g.contains("pivot")) {
        group.pivot = point(g["pivot"], at + ".pivot");
      } else {
        std::vector<WallSegment> members;
        for (const auto& id : group.wall_ids)
          for (const auto& w : doc.walls)
            if (w.id == id) members.push_back(w);
        if (members.empty()) throw ParseError(at + ": group has no known walls");
        group.pivot = centroid_of(members);
      }
      doc.groups.push_back(std::move(group));
    }
  }
  if (j.contains("params")) {
    if (!j["params"].is_array()) throw ParseError("params: expected a list");
    for (std::size_t i = 0; i < j["params"].size(); ++i) {
      const std::string at = "params[" + std::to_string(i) + "]";
      const Json& p = j["params"][i];
      require_keys(p, at, {"group", "kind", "lower", "upper"});
      const std::string kind = text(p["kind"], at + ".kind");
      ParamBound b;
      b.group_id = text(p["group"], at + ".group");
      if (kind == "translation-x") b.kind = ParamKind::translation_x;
      else if (kind == "translation-y") b.kind = ParamKind::translation_y;
      else if (kind == "rotation") b.kind = ParamKind::rotation;
      else throw ParseError(at + ".kind: expected translation-x, translation-y or rotation");
      b.lower = number(p["lower"], at + ".lower");
      b.upper = number(p["upper"], at + ".upper");
      doc.params.entries.push_back(std::move(b));
    }
  }
  if (j.contains("grid")) doc.grid = grid_from_json(j["grid"]);
  if (j.contains("regions")) {
    require_keys(j["regions"], "regions", {}, {"query", "reference"});
    if (j["regions"].contains("query")) doc.query = region(j["regions"]["query"], "regions.query");
    if (j["regions"].contains("reference")) doc.reference = region(j["regions"]["reference"], "regions.reference");
  }
  try {
    (void)doc.graph();
  } catch (const InvalidLayout& e) {
    throw ParseError(std::string("layout: ") + e.what());
  }
  return doc;
}

inline Json layout_to_json(const LayoutDocument& doc) {
  using detail::to_json;
  Json j;
  j["version"] = kSchemaVersion;
  j["walls"] = Json::array();
  for (const auto& w : doc.walls) j["walls"].push_back({{"id", w.id}, {"a", to_json(w.a)}, {"b", to_json(w.b)}});
  if (!doc.groups.empty()) {
    j["groups"] = Json::array();
    for (const auto& g : doc.groups) j["groups"].push_back({{"id", g.id}, {"walls", g.wall_ids}, {"pivot", to_json(g.pivot)}});
  }
  if (!doc.params.entries.empty()) {
    j["params"] = Json::array();
    for (const auto& p : doc.params.entries)
      j["params"].push_back({{"group", p.group_id}, {"kind", to_string(p.kind)}, {"lower", p.lower}, {"upper", p.upper}});
  }
  if (doc.grid) j["grid"] = grid_to_json(*doc.grid);
  if (doc.query || doc.reference) {
    j["regions"] = Json::object();
    if (doc.query) j["regions"]["query"] = to_json(*doc.query);
    if (doc.reference) j["regions"]["reference"] = to_json(*doc.reference);
  }
  return j;
}

inline Json parse_json_text(const std::string& text, const std::string& what = "document") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content) || !out.flush()) throw IoError("cannot write " + path.string());
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline LayoutDocument load_layout(const std::filesystem::path& path) {
  return layout_from_json(parse_json_text(read_file(path), path.string()));
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::optional<double> resolution;
  std::size_t members = 1;
  std::uint64_t seed = 0;
  std::vector<Objective> objectives = default_objectives();
  PenaltyConfig penalties;
  DiversityConfig diversity;
  CmaOptions cma;
  TerminationCriteria criteria;
  double threshold_weight = kDefaultThresholdWeight;
  double failure_penalty = kDefaultFailurePenalty;
  ForestStrategy strategy = ForestStrategy::indexed;
};

inline RunConfig config_from_json(const Json& j) {
  using namespace detail;
  RunConfig c;
  if (j.is_null()) return c;
  require_keys(j, "config", {},
               {"resolution", "members", "seed", "objectives", "penalties", "diversity", "cma", "termination",
                "threshold_weight", "failure_penalty", "strategy"});
  if (j.contains("resolution")) c.resolution = number(j["resolution"], "config.resolution");
  if (j.contains("members")) c.members = count(j["members"], "config.members");
  if (j.contains("seed")) c.seed = count(j["seed"], "config.seed");
  if (j.contains("objectives")) {
    if (!j["objectives"].is_array()) throw ParseError("config.objectives: expected a list");
    c.objectives.clear();
    for (std::size_t i = 0; i < j["objectives"].size(); ++i) {
      const std::string at = "config.objectives[" + std::to_string(i) + "]";
      const Json& o = j["objectives"][i];
      require_keys(o, at, {"metric"}, {"invert", "z"});
      Objective obj;
      try {
        obj.metric = metric_from_string(text(o["metric"], at + ".metric"));
      } catch (const ParseError&) {
        throw;
      } catch (const Error& e) {
        throw ParseError(at + ": " + e.what());
      }
      if (o.contains("invert")) obj.inverted = flag(o["invert"], at + ".invert");
      if (o.contains("z")) obj.z = number(o["z"], at + ".z");
      c.objectives.push_back(obj);
    }
  }
  if (j.contains("penalties")) {
    const Json& p = j["penalties"];
    require_keys(p, "config.penalties", {},
                 {"clearance", "clearance_weight", "clearance_radius", "wall_length", "wall_length_weight"});
    if (p.contains("clearance")) c.penalties.clearance = flag(p["clearance"], "config.penalties.clearance");
    if (p.contains("clearance_weight")) c.penalties.clearance_weight = number(p["clearance_weight"], "config.penalties.clearance_weight");
    if (p.contains("clearance_radius")) c.penalties.clearance_radius = number(p["clearance_radius"], "config.penalties.clearance_radius");
    if (p.contains("wall_length")) c.penalties.wall_length = flag(p["wall_length"], "config.penalties.wall_length");
    if (p.contains("wall_length_weight")) c.penalties.wall_length_weight = number(p["wall_length_weight"], "config.penalties.wall_length_weight");
  }
  if (j.contains("diversity")) {
    const Json& d = j["diversity"];
    require_keys(d, "config.diversity", {}, {"k", "k_m", "d_min"});
    if (d.contains("k")) c.diversity.k = number(d["k"], "config.diversity.k");
    if (d.contains("k_m")) c.diversity.k_m = number(d["k_m"], "config.diversity.k_m");
    if (d.contains("d_min")) c.diversity.d_min = number(d["d_min"], "config.diversity.d_min");
  }
  if (j.contains("cma")) {
    const Json& m = j["cma"];
    require_keys(m, "config.cma", {}, {"sigma", "lambda", "max_sigma"});
    if (m.contains("sigma")) c.cma.sigma = number(m["sigma"], "config.cma.sigma");
    if (m.contains("lambda")) c.cma.lambda = count(m["lambda"], "config.cma.lambda");
    if (m.contains("max_sigma")) c.cma.max_sigma = number(m["max_sigma"], "config.cma.max_sigma");
  }
  if (j.contains("termination")) {
    const Json& t = j["termination"];
    require_keys(t, "config.termination", {},
                 {"max_evaluations", "stagnation_window", "relative_improvement_floor", "target_fraction"});
    if (t.contains("max_evaluations")) c.criteria.max_evaluations = count(t["max_evaluations"], "config.termination.max_evaluations");
    if (t.contains("stagnation_window")) c.criteria.stagnation_window = count(t["stagnation_window"], "config.termination.stagnation_window");
    if (t.contains("relative_improvement_floor"))
      c.criteria.relative_improvement_floor = number(t["relative_improvement_floor"], "config.termination.relative_improvement_floor");
    if (t.contains("target_fraction")) c.criteria.target_fraction = number(t["target_fraction"], "config.termination.target_fraction");
  }
  if (j.contains("threshold_weight")) c.threshold_weight = number(j["threshold_weight"], "config.threshold_weight");
  if (j.contains("failure_penalty")) c.failure_penalty = number(j["failure_penalty"], "config.failure_penalty");
  if (j.contains("strategy")) {
    const std::string s = text(j["strategy"], "config.strategy");
    if (s == "naive") c.strategy = ForestStrategy::naive;
    else if (s == "cutoff") c.strategy = ForestStrategy::cutoff;
    else if (s == "indexed") c.strategy = ForestStrategy::indexed;
    else throw ParseError("config.strategy: expected naive, cutoff or indexed");
  }
  return c;
}

/// Builds the problem for a document; regions default to the whole grid.
inline DesignProblem make_problem(const LayoutDocument& doc, const RunConfig& cfg = {}) {
  DesignProblem p;
  p.graph = doc.graph();
  p.grid = doc.grid_or_default();
  if (cfg.resolution) p.grid.resolution = *cfg.resolution;
  p.query = doc.query.value_or(Region::covering(p.grid));
  p.reference = doc.reference.value_or(Region::covering(p.grid));
  p.objectives = cfg.objectives;
  p.penalties = cfg.penalties;
  p.diversity = cfg.diversity;
  p.diversity.members = cfg.members;
  p.cma = cfg.cma;
  p.criteria = cfg.criteria;
  p.threshold_weight = cfg.threshold_weight;
  p.failure_penalty = cfg.failure_penalty;
  p.strategy = cfg.strategy;
  try {
    p.validate();
  } catch (const EmptyRegionError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("configuration: ") + e.what());
  }
  return p;
}

/// The layout a candidate realizes, as a standalone document: walls moved,
/// pivots moved with their groups, bounds kept relative.
inline LayoutDocument realized_layout(const LayoutDocument& base, const ParamVector& p) {
  const ArchitecturalGraph g = rebase(base.graph(), p);
  LayoutDocument out = base;
  out.walls = g.walls();
  out.groups = g.groups();
  return out;
}

// ---------------------------------------------------------------------------
// Outputs

inline std::string heatmap_csv(const Heatmap& h) {
  std::ostringstream out;
  out.precision(17);
  out << "x,y,k,d,h,combined\n";
  for (std::size_t i = 0; i < h.vertices.size(); ++i)
    out << h.vertices[i].x << ',' << h.vertices[i].y << ',' << h.degree[i] << ',' << h.depth[i] << ','
        << h.entropy[i] << ',' << h.combined[i] << '\n';
  return out.str();
}

/// Lattice-shaped document: one row-major array per metric, null where a
/// cell has no vertex.
inline Json heatmap_to_json(const Heatmap& h) {
  const std::size_t cols = h.spec.cols(), rows = h.spec.rows();
  Json j;
  j["version"] = kSchemaVersion;
  j["grid"] = grid_to_json(h.spec);
  j["cols"] = cols;
  j["rows"] = rows;
  auto layer = [&](const std::vector<double>& v) {
    Json arr = Json(std::vector<Json>(cols * rows, nullptr));
    for (std::size_t i = 0; i < h.cells.size(); ++i) arr[h.cells[i].row * cols + h.cells[i].col] = v[i];
    return arr;
  };
  j["k"] = layer(h.degree);
  j["d"] = layer(h.depth);
  j["h"] = layer(h.entropy);
  j["combined"] = layer(h.combined);
  return j;
}

inline Json metrics_to_json(const CandidateEvaluation& e, const std::vector<Objective>& objectives) {
  Json j;
  j["failed"] = e.failed;
  if (e.failed) j["failure"] = e.failure;
  j["K"] = e.metrics.K;
  j["D"] = e.metrics.D;
  j["H"] = e.metrics.H;
  j["combined"] = e.combined;
  j["vertex_count"] = e.metrics.vertex_count;
  j["query_count"] = e.metrics.query_count;
  j["penalty"] = e.penalty;
  j["clearance_penalty"] = e.clearance_term;
  j["wall_length_penalty"] = e.wall_length_term;
  Json obj = Json::object();
  for (std::size_t i = 0; i < objectives.size() && i < e.objectives.size(); ++i)
    obj[objectives[i].name()] = e.objectives[i];
  j["objectives"] = obj;
  return j;
}

inline Json stage_to_json(const StageLog& s) {
  Json j{{"stage", s.name}, {"index", s.index}, {"evaluations", s.evaluations}};
  if (s.name != "diversity") {
    j["f_p0"] = s.f_p0;
    j["f_opt"] = s.f_opt;
    j["lower"] = s.lower;
    j["p_opt"] = s.p_opt.values();
  }
  return j;
}

inline std::string stage_log_lines(const HierarchyResult& r) {
  std::string out;
  for (const auto& s : r.stages) out += stage_to_json(s).dump() + "\n";
  return out;
}

inline std::string member_file(std::size_t k) { return "member_" + std::to_string(k) + ".json"; }
inline std::string member_heatmap(std::size_t k, const char* ext) {
  return "heatmaps/member_" + std::to_string(k) + "." + ext;
}

/// Round manifest. Contains no timings or paths outside the output
/// directory, so a fixed seed reproduces it byte for byte.
inline Json manifest_to_json(const RoundResult& r, const DesignProblem& problem, std::uint64_t seed) {
  Json j;
  j["version"] = kSchemaVersion;
  j["seed"] = seed;
  j["grid"] = grid_to_json(problem.grid);
  j["objectives"] = Json::array();
  for (const auto& o : problem.objectives) j["objectives"].push_back(o.name());
  j["d_min"] = problem.diversity.resolved_d_min(problem.graph.dimension());
  j["evaluations"] = r.hierarchy.evaluations;
  j["stage_log"] = "stages.jsonl";
  j["thresholds"] = Json::array();
  for (const auto& t : r.hierarchy.thresholds)
    j["thresholds"].push_back({{"objective", problem.objectives[t.objective_index].name()}, {"lower", t.lower}});
  j["base"] = metrics_to_json(r.base, problem.objectives);
  j["members"] = Json::array();
  for (std::size_t k = 0; k < r.members.size(); ++k) {
    Json m = metrics_to_json(r.members[k], problem.objectives);
    m["index"] = k + 1;
    m["layout"] = member_file(k + 1);
    m["params"] = r.members[k].p.values();
    m["heatmap_csv"] = member_heatmap(k + 1, "csv");
    m["heatmap_json"] = member_heatmap(k + 1, "json");
    j["members"].push_back(std::move(m));
  }
  return j;
}

struct AnalyzeOutput {
  CandidateEvaluation evaluation;
  DesignProblem problem;
};

inline AnalyzeOutput analyze_document(const LayoutDocument& doc, const RunConfig& cfg = {}) {
  AnalyzeOutput out{{}, make_problem(doc, cfg)};
  out.evaluation = evaluate(out.problem, ParamVector(out.problem.graph.dimension(), 0.0));
  if (out.evaluation.failed) throw EmptyRegionError(out.evaluation.failure);
  return out;
}

inline void write_analysis(const std::filesystem::path& dir, const AnalyzeOutput& a) {
  write_file(dir / "heatmap.csv", heatmap_csv(a.evaluation.heatmap));
  write_file(dir / "heatmap.json", dump(heatmap_to_json(a.evaluation.heatmap)));
  write_file(dir / "metrics.json", dump(metrics_to_json(a.evaluation, a.problem.objectives)));
}

inline void write_round(const std::filesystem::path& dir, const LayoutDocument& base, const DesignProblem& problem,
                        const RoundResult& r, std::uint64_t seed) {
  for (std::size_t k = 0; k < r.members.size(); ++k) {
    write_file(dir / member_file(k + 1), dump(layout_to_json(realized_layout(base, r.members[k].p))));
    write_file(dir / member_heatmap(k + 1, "csv"), heatmap_csv(r.members[k].heatmap));
    write_file(dir / member_heatmap(k + 1, "json"), dump(heatmap_to_json(r.members[k].heatmap)));
  }
  write_file(dir / "stages.jsonl", stage_log_lines(r.hierarchy));
  write_file(dir / "manifest.json", dump(manifest_to_json(r, problem, seed)));
}

}  // namespace layoutforge
