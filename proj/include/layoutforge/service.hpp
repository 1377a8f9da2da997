#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "layoutforge/io.hpp"

namespace layoutforge {

enum class JobStatus { queued, running, done, failed };

inline const char* to_string(JobStatus s) {
  switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "?";
}

struct Response {
  int status = 200;
  Json body;
};

/// Thread-safe store of layouts and optimization jobs behind a
/// transport-independent request handler. Job status only moves forward:
/// queued, running, then done or failed. Cancelling a job fails it.
class Service {
 public:
  Service() = default;
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ~Service() {
    std::vector<std::shared_ptr<Job>> jobs;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      for (auto& [id, job] : jobs_) jobs.push_back(job);
    }
    for (auto& job : jobs) job->cancel = true;
    for (auto& job : jobs) join(*job);
  }

  Response handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      return route(method, split(path), body);
    } catch (const HttpError& e) {
      return error(e.status, e.what());
    } catch (const ParseError& e) {
      return error(400, e.what());
    } catch (const EmptyRegionError& e) {
      return error(400, e.what());
    } catch (const InvalidLayout& e) {
      return error(400, e.what());
    } catch (const std::exception& e) {
      return error(500, e.what());
    }
  }

  /// Blocks until the job leaves the running state. For tests and shutdown.
  void wait(const std::string& job_id) {
    join(*find_job(job_id));
  }

 private:
  struct HttpError : Error {
    int status;
    HttpError(int s, const std::string& what) : Error(what), status(s) {}
  };

  struct Job {
    std::string id;
    std::string layout_id;
    LayoutDocument layout;
    DesignProblem problem;
    std::uint64_t seed = 0;
    std::atomic<bool> cancel{false};
    std::thread worker;
    std::mutex join_mutex;

    // Guarded by Service::mutex_.
    JobStatus status = JobStatus::queued;
    std::string error;
    std::string stage;
    std::size_t stage_index = 0;
    std::size_t evaluations = 0;
    std::vector<double> best;
    std::optional<RoundResult> result;
  };

  static void join(Job& job) {
    std::lock_guard<std::mutex> lock(job.join_mutex);
    if (job.worker.joinable()) job.worker.join();
  }

  static Response error(int status, const std::string& message) { return {status, Json{{"error", message}}}; }

  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path.substr(0, path.find('?'))) {
      if (c == '/') {
        if (!cur.empty()) parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
  }

  static Json body_json(const std::string& body) {
    Json j = parse_json_text(body.empty() ? "{}" : body, "request body");
    if (!j.is_object()) throw ParseError("request body: expected an object");
    return j;
  }

  Response route(const std::string& method, const std::vector<std::string>& p, const std::string& body) {
    const std::size_t n = p.size();
    if (n == 1 && p[0] == "layouts") return method == "POST" ? post_layout(body) : not_allowed();
    if (n == 2 && p[0] == "layouts") return method == "GET" ? Response{200, layout_to_json(find_layout(p[1]))} : not_allowed();
    if (n == 1 && p[0] == "analyze") return method == "POST" ? post_analyze(body) : not_allowed();
    if (n == 1 && p[0] == "jobs") return method == "POST" ? post_job(body) : not_allowed();
    if (n == 2 && p[0] == "jobs") return method == "GET" ? get_job(p[1]) : not_allowed();
    if (n == 3 && p[0] == "jobs" && p[2] == "cancel") return method == "POST" ? cancel_job(p[1]) : not_allowed();
    if (n == 4 && p[0] == "jobs" && p[2] == "members") return method == "GET" ? get_member(p[1], p[3]) : not_allowed();
    if (n == 1 && p[0] == "rounds") return method == "POST" ? post_round(body) : not_allowed();
    throw HttpError(404, "no such endpoint");
  }

  static Response not_allowed() { return error(405, "method not allowed"); }

  std::string store_layout(LayoutDocument doc) {
    std::lock_guard<std::mutex> lock(mutex_);
    const std::string id = "layout-" + std::to_string(++layout_counter_);
    layouts_.emplace(id, std::move(doc));
    return id;
  }

  LayoutDocument find_layout(const std::string& id) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = layouts_.find(id);
    if (it == layouts_.end()) throw HttpError(404, "unknown layout '" + id + "'");
    return it->second;
  }

  std::shared_ptr<Job> find_job(const std::string& id) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) throw HttpError(404, "unknown job '" + id + "'");
    return it->second;
  }

  // A request names a stored layout by "layout_id" or carries one inline as "layout".
  std::pair<std::string, LayoutDocument> layout_of(const Json& j) {
    if (j.contains("layout_id") == j.contains("layout")) throw ParseError("request: give exactly one of layout_id, layout");
    if (j.contains("layout_id")) {
      if (!j["layout_id"].is_string()) throw ParseError("layout_id: expected a string");
      const std::string id = j["layout_id"].get<std::string>();
      return {id, find_layout(id)};
    }
    return {"", layout_from_json(j["layout"])};
  }

  Response post_layout(const std::string& body) {
    LayoutDocument doc = layout_from_json(parse_json_text(body, "request body"));
    return {201, Json{{"id", store_layout(std::move(doc))}}};
  }

  Response post_analyze(const std::string& body) {
    const Json j = body_json(body);
    detail::require_keys(j, "request", {}, {"layout_id", "layout", "config"});
    const auto [id, doc] = layout_of(j);
    const RunConfig cfg = config_from_json(j.value("config", Json()));
    const auto a = analyze_document(doc, cfg);
    return {200, Json{{"metrics", metrics_to_json(a.evaluation, a.problem.objectives)},
                      {"heatmap", heatmap_to_json(a.evaluation.heatmap)}}};
  }

  Response post_job(const std::string& body) {
    const Json j = body_json(body);
    detail::require_keys(j, "request", {}, {"layout_id", "layout", "config"});
    auto [layout_id, doc] = layout_of(j);
    const RunConfig cfg = config_from_json(j.value("config", Json()));
    DesignProblem problem = make_problem(doc, cfg);
    if (problem.graph.dimension() == 0) throw ParseError("layout has no free parameters to optimize");
    if (layout_id.empty()) layout_id = store_layout(doc);

    auto job = std::make_shared<Job>();
    job->layout_id = layout_id;
    job->layout = std::move(doc);
    job->problem = std::move(problem);
    job->seed = cfg.seed;
    std::lock_guard<std::mutex> join_lock(job->join_mutex);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      job->id = "job-" + std::to_string(++job_counter_);
      jobs_.emplace(job->id, job);
    }
    job->worker = std::thread([this, job] { run(*job); });
    return {202, Json{{"id", job->id}, {"status", to_string(JobStatus::queued)}}};
  }

  void run(Job& job) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      job.status = JobStatus::running;
    }
    RunHooks hooks;
    hooks.cancel = &job.cancel;
    hooks.on_progress = [&](const ProgressEvent& e) {
      std::lock_guard<std::mutex> lock(mutex_);
      job.stage = e.stage;
      job.stage_index = e.stage_index;
      job.evaluations = std::max(job.evaluations, e.evaluations);
      if (job.best.size() <= e.stage_index) job.best.resize(e.stage_index + 1, -INFINITY);
      job.best[e.stage_index] = std::max(job.best[e.stage_index], e.best);
    };
    try {
      RoundResult r = run_round(job.problem, job.seed, hooks);
      std::lock_guard<std::mutex> lock(mutex_);
      job.evaluations = std::max(job.evaluations, r.hierarchy.evaluations);
      job.result = std::move(r);
      job.status = JobStatus::done;
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(mutex_);
      job.error = e.what();
      job.status = JobStatus::failed;
    }
  }

  Response get_job(const std::string& id) {
    auto job = find_job(id);
    std::lock_guard<std::mutex> lock(mutex_);
    Json best = Json::array();
    for (double b : job->best) best.push_back(std::isfinite(b) ? Json(b) : Json());
    Json out{{"id", job->id},
             {"layout_id", job->layout_id},
             {"status", to_string(job->status)},
             {"progress",
              {{"stage", job->stage},
               {"stage_index", job->stage_index},
               {"stages", job->problem.objectives.size() + 1},
               {"evaluations", job->evaluations},
               {"best", best}}}};
    if (!job->error.empty()) out["error"] = job->error;
    if (job->result) {
      out["members"] = job->result->members.size();
      out["manifest"] = manifest_to_json(*job->result, job->problem, job->seed);
    }
    return {200, out};
  }

  Response cancel_job(const std::string& id) {
    auto job = find_job(id);
    std::lock_guard<std::mutex> lock(mutex_);
    if (job->status == JobStatus::done || job->status == JobStatus::failed)
      throw HttpError(409, "job already finished");
    job->cancel = true;
    return {202, Json{{"id", job->id}, {"status", to_string(job->status)}, {"cancelling", true}}};
  }

  // Member k is 1-based. Returns the job and the member index once finished.
  std::pair<std::shared_ptr<Job>, std::size_t> finished_member(const std::string& job_id, const Json& k) {
    auto job = find_job(job_id);
    std::lock_guard<std::mutex> lock(mutex_);
    if (job->status != JobStatus::done) throw HttpError(409, "job not finished");
    if (!k.is_number_integer()) throw ParseError("member: expected an integer");
    const long long idx = k.get<long long>();
    if (idx < 1 || static_cast<std::size_t>(idx) > job->result->members.size())
      throw HttpError(404, "no member " + std::to_string(idx));
    return {job, static_cast<std::size_t>(idx - 1)};
  }

  Response get_member(const std::string& job_id, const std::string& k) {
    Json index;
    try {
      std::size_t used = 0;
      index = std::stoll(k, &used);
      if (used != k.size()) throw std::invalid_argument(k);
    } catch (const std::logic_error&) {
      throw HttpError(404, "no member '" + k + "'");
    }
    const auto [job, m] = finished_member(job_id, index);
    const CandidateEvaluation& e = job->result->members[m];
    return {200, Json{{"index", m + 1},
                      {"params", e.p.values()},
                      {"layout", layout_to_json(realized_layout(job->layout, e.p))},
                      {"metrics", metrics_to_json(e, job->problem.objectives)},
                      {"heatmap", heatmap_to_json(e.heatmap)}}};
  }

  Response post_round(const std::string& body) {
    const Json j = body_json(body);
    detail::require_keys(j, "request", {"job", "member"});
    if (!j["job"].is_string()) throw ParseError("job: expected a string");
    const auto [job, m] = finished_member(j["job"].get<std::string>(), j["member"]);
    LayoutDocument next = realized_layout(job->layout, job->result->members[m].p);
    return {201, Json{{"id", store_layout(std::move(next))}, {"job", job->id}, {"member", m + 1}}};
  }

  std::mutex mutex_;
  std::map<std::string, LayoutDocument> layouts_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::uint64_t layout_counter_ = 0;
  std::uint64_t job_counter_ = 0;
};

}  // namespace layoutforge
