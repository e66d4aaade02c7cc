// Copyright 2026 The CoMRAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "comrat/service.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <list>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "comrat/commit_analyzer.hpp"

namespace comrat {

using ojson = nlohmann::ordered_json;

namespace {

int rank(JobState s) { return static_cast<int>(s); }

bool is_terminal(JobState s) { return s == JobState::kDone || s == JobState::kFailed; }

std::string new_job_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  return fmt::format("{:016x}", rng());
}

}  // namespace

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::kQueued: return "queued";
    case JobState::kFetching: return "fetching";
    case JobState::kClassifying: return "classifying";
    case JobState::kAnalyzing: return "analyzing";
    case JobState::kDone: return "done";
    case JobState::kFailed: return "failed";
  }
  return "failed";
}

bool is_valid_transition(JobState from, JobState to) {
  if (is_terminal(from)) return false;
  if (to == JobState::kFailed) return true;
  return rank(to) > rank(from);
}

// ---------------------------------------------------------------------------
// JobRegistry
// ---------------------------------------------------------------------------

namespace {

struct Job {
  std::string id;
  ModuleRef module;  // holds the token for the job's lifetime only
  RateLimitPolicy policy;
  Timestamp created_at;

  std::atomic<std::size_t> fetched{0};
  std::atomic<std::size_t> classified{0};
  std::atomic<std::size_t> total_sentences{0};
  std::atomic<bool> total_known{false};
  std::atomic<bool> cancel{false};

  mutable std::mutex mu;
  JobState state = JobState::kQueued;
  std::optional<std::string> error;
  std::shared_ptr<const ModuleAnalysisResult> result;

  void advance(JobState next) {
    std::lock_guard lock(mu);
    if (is_valid_transition(state, next)) state = next;
  }
};

}  // namespace

struct JobRegistry::Impl {
  ServiceConfig config;
  mutable std::mutex mu;
  std::condition_variable cv;
  std::unordered_map<std::string, std::shared_ptr<Job>> jobs;
  std::list<std::string> lru;  // front = most recently used
  std::deque<std::shared_ptr<Job>> queue;
  std::vector<std::thread> workers;
  bool stopping = false;

  explicit Impl(ServiceConfig c) : config(std::move(c)) {
    const auto n = std::max<std::size_t>(1, config.workers);
    for (std::size_t i = 0; i < n; ++i) workers.emplace_back([this] { worker_loop(); });
  }

  void touch(const std::string& id) {
    lru.remove(id);
    lru.push_front(id);
  }

  void evict_locked() {
    for (auto it = lru.end(); jobs.size() > config.max_jobs && it != lru.begin();) {
      --it;
      auto job = jobs.at(*it);
      std::lock_guard job_lock(job->mu);
      if (!is_terminal(job->state)) continue;
      jobs.erase(*it);
      it = lru.erase(it);
    }
  }

  void worker_loop() {
    while (true) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        job = std::move(queue.front());
        queue.pop_front();
      }
      run(*job);
    }
  }

  void run(Job& job) {
    ModuleAnalysisOptions options;
    options.classifier = config.classifier;
    options.preprocess = config.preprocess;
    options.report = config.report;
    options.rate_limit = job.policy;
    ModuleAnalysisHooks hooks;
    hooks.on_stage = [&](Stage s) {
      switch (s) {
        case Stage::kFetching: job.advance(JobState::kFetching); break;
        case Stage::kClassifying: job.advance(JobState::kClassifying); break;
        case Stage::kAnalyzing: job.advance(JobState::kAnalyzing); break;
      }
    };
    hooks.on_fetched = [&](std::size_t n) { job.fetched.store(n); };
    hooks.on_classified = [&](std::size_t done, std::size_t total) {
      job.total_sentences.store(total);
      job.total_known.store(true);
      job.classified.store(done);
    };
    hooks.cancelled = [&] { return job.cancel.load(); };

    std::optional<std::string> error;
    std::shared_ptr<const ModuleAnalysisResult> result;
    try {
      auto transport = config.transport_factory();
      result = std::make_shared<ModuleAnalysisResult>(
          run_module_analysis(job.module, *transport, *config.clock, options, hooks));
    } catch (const RateLimited& e) {
      error = std::string("GitHub rate limit exhausted; resets at ") + format_iso8601(e.reset_at()) +
              ". Partial data was discarded.";
    } catch (const std::exception& e) {
      error = e.what();
    }

    std::lock_guard lock(job.mu);
    if (error) {
      job.error = redact(*error, job.module.token);
      job.state = JobState::kFailed;
    } else {
      job.result = std::move(result);
      job.state = JobState::kDone;
    }
    job.module.token.reset();
  }
};

JobRegistry::JobRegistry(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

JobRegistry::~JobRegistry() { shutdown(); }

std::string JobRegistry::submit(ModuleRef module, std::optional<RateLimitPolicy> policy) {
  module.validate();
  auto job = std::make_shared<Job>();
  job->id = new_job_id();
  if (!module.cache_dir) module.cache_dir = impl_->config.cache_dir;
  job->module = std::move(module);
  job->policy = policy.value_or(impl_->config.default_rate_limit);
  job->created_at = impl_->config.clock->now();
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->stopping) throw std::runtime_error("service is shutting down");
    impl_->jobs.emplace(job->id, job);
    impl_->touch(job->id);
    impl_->queue.push_back(job);
    impl_->evict_locked();
  }
  impl_->cv.notify_one();
  return job->id;
}

std::optional<JobSnapshot> JobRegistry::snapshot(const std::string& id) {
  std::shared_ptr<Job> job;
  {
    std::lock_guard lock(impl_->mu);
    auto it = impl_->jobs.find(id);
    if (it == impl_->jobs.end()) return std::nullopt;
    job = it->second;
    impl_->touch(id);
  }
  JobSnapshot s;
  s.id = job->id;
  s.module_url = job->module.api_url;
  s.created_at = job->created_at;
  {
    std::lock_guard lock(job->mu);
    s.state = job->state;
    s.error = job->error;
  }
  s.progress.fetched_commits = job->fetched.load();
  s.progress.classified_sentences = job->classified.load();
  if (job->total_known.load()) s.progress.total_sentences = job->total_sentences.load();
  return s;
}

std::optional<std::shared_ptr<const ModuleAnalysisResult>> JobRegistry::result(const std::string& id) {
  std::shared_ptr<Job> job;
  {
    std::lock_guard lock(impl_->mu);
    auto it = impl_->jobs.find(id);
    if (it == impl_->jobs.end()) return std::nullopt;
    job = it->second;
    impl_->touch(id);
  }
  std::lock_guard lock(job->mu);
  return job->result;
}

std::size_t JobRegistry::size() const {
  std::lock_guard lock(impl_->mu);
  return impl_->jobs.size();
}

void JobRegistry::shutdown() {
  if (!impl_) return;
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->stopping && impl_->workers.empty()) return;
    impl_->stopping = true;
    for (auto& [id, job] : impl_->jobs) job->cancel.store(true);
    for (auto& job : impl_->queue) {
      std::lock_guard job_lock(job->mu);
      job->state = JobState::kFailed;
      job->error = "service shut down before the job started";
      job->module.token.reset();
    }
    impl_->queue.clear();
  }
  impl_->cv.notify_all();
  for (auto& t : impl_->workers) {
    if (t.joinable()) t.join();
  }
  impl_->workers.clear();
}

// ---------------------------------------------------------------------------
// HTTP
// ---------------------------------------------------------------------------

namespace {

ojson snapshot_json(const JobSnapshot& s) {
  ojson progress{{"fetched_commits", s.progress.fetched_commits},
                 {"classified_sentences", s.progress.classified_sentences},
                 {"total_sentences", s.progress.total_sentences ? ojson(*s.progress.total_sentences) : ojson(nullptr)}};
  return ojson{{"id", s.id},
               {"module_url", s.module_url},
               {"state", std::string(to_string(s.state))},
               {"progress", std::move(progress)},
               {"created_at", format_iso8601(s.created_at)},
               {"error", s.error ? ojson(*s.error) : ojson(nullptr)}};
}

void send_json(httplib::Response& res, int status, const ojson& body) {
  res.status = status;
  res.set_content(body.dump(2, ' ', false, ojson::error_handler_t::replace) + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, ojson{{"error", message}});
}

}  // namespace

struct Service::Impl {
  ServiceConfig config;
  JobRegistry registry;
  httplib::Server server;
  bool bound = false;

  explicit Impl(ServiceConfig c) : config(c), registry(std::move(c)) {
    server.set_payload_max_length(4 * config.max_message_bytes + 4096);
    // httplib's default adds SO_REUSEPORT, which lets a second server share a
    // port that is already taken.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    const auto origin = config.cors_origin;
    server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, ojson{{"status", "ok"}});
    });
    server.Post("/api/commit-analysis",
                [this](const httplib::Request& req, httplib::Response& res) { commit_analysis(req, res); });
    server.Post("/api/module-analysis",
                [this](const httplib::Request& req, httplib::Response& res) { module_analysis(req, res); });
    server.Get(R"(/api/jobs/([0-9A-Za-z_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto snap = registry.snapshot(req.matches[1]);
      if (!snap) return send_error(res, 404, "unknown job");
      send_json(res, 200, snapshot_json(*snap));
    });
    server.Get(R"(/api/jobs/([0-9A-Za-z_-]+)/report)", [this](const httplib::Request& req, httplib::Response& res) {
      if (auto r = finished(req.matches[1], res)) res.set_content(r->report_json, "application/json");
    });
    server.Get(R"(/api/jobs/([0-9A-Za-z_-]+)/dataset\.csv)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 if (auto r = finished(req.matches[1], res)) {
                   res.set_header("Content-Disposition", "attachment; filename=\"dataset.csv\"");
                   res.set_content(r->dataset_csv, "text/csv; charset=utf-8");
                 }
               });
  }

  std::shared_ptr<const ModuleAnalysisResult> finished(const std::string& id, httplib::Response& res) {
    const auto r = registry.result(id);
    if (!r) {
      send_error(res, 404, "unknown job");
      return nullptr;
    }
    if (!*r) {
      const auto snap = registry.snapshot(id);
      send_error(res, 409, fmt::format("job is {}", snap ? to_string(snap->state) : "gone"));
      return nullptr;
    }
    res.status = 200;
    return *r;
  }

  void commit_analysis(const httplib::Request& req, httplib::Response& res) {
    ojson body;
    try {
      body = ojson::parse(req.body);
    } catch (const ojson::parse_error&) {
      return send_error(res, 400, "request body is not valid JSON");
    }
    if (!body.is_object() || !body.contains("message") || !body["message"].is_string()) {
      return send_error(res, 400, "expected {\"message\": string, \"threshold\"?: number}");
    }
    double threshold = kDefaultRationaleThreshold;
    if (body.contains("threshold") && !body["threshold"].is_null()) {
      if (!body["threshold"].is_number()) return send_error(res, 400, "threshold must be a number");
      threshold = body["threshold"].get<double>();
      if (!(threshold >= 0.0 && threshold <= 1.0)) return send_error(res, 400, "threshold must lie in [0, 1]");
    }
    const auto& message = body["message"].get_ref<const std::string&>();
    if (message.size() > config.max_message_bytes) {
      return send_error(res, 413, fmt::format("message exceeds {} bytes", config.max_message_bytes));
    }
    try {
      const auto report = analyze_commit_message(message, config.classifier, threshold, config.preprocess);
      res.status = 200;
      res.set_content(commit_report_json(report), "application/json");
    } catch (const ClassifierError& e) {
      send_error(res, 502, std::string("classifier failure: ") + e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  }

  void module_analysis(const httplib::Request& req, httplib::Response& res) {
    ojson body;
    try {
      body = ojson::parse(req.body);
    } catch (const ojson::parse_error&) {
      return send_error(res, 400, "request body is not valid JSON");
    }
    if (!body.is_object() || !body.contains("module_url") || !body["module_url"].is_string()) {
      return send_error(res, 400, "expected {\"module_url\": string, \"token\"?: string}");
    }
    ModuleRef module;
    module.api_url = body["module_url"].get<std::string>();
    if (body.contains("token") && body["token"].is_string() && !body["token"].get<std::string>().empty()) {
      module.token = body["token"].get<std::string>();
    }
    std::optional<RateLimitPolicy> policy;
    if (body.contains("rate_limit")) {
      const auto p = body["rate_limit"].is_string() ? body["rate_limit"].get<std::string>() : std::string{};
      if (p == "wait") {
        policy = RateLimitPolicy::kWait;
      } else if (p == "abort") {
        policy = RateLimitPolicy::kAbort;
      } else {
        return send_error(res, 400, "rate_limit must be \"wait\" or \"abort\"");
      }
    }
    try {
      const auto id = registry.submit(std::move(module), policy);
      send_json(res, 202, ojson{{"job_id", id}});
    } catch (const InvalidModuleUrl& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 503, e.what());
    }
  }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() {
  stop();
  impl_->registry.shutdown();
}

bool Service::bind(const std::string& host, int port) {
  impl_->bound = impl_->server.bind_to_port(host, port);
  return impl_->bound;
}

int Service::bind_any_port(const std::string& host) {
  const int port = impl_->server.bind_to_any_port(host);
  impl_->bound = port > 0;
  return impl_->bound ? port : -1;
}

bool Service::run() {
  if (!impl_->bound) return false;
  return impl_->server.listen_after_bind();
}

void Service::stop() { impl_->server.stop(); }

bool Service::wait_until_ready(std::chrono::milliseconds timeout) const {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!impl_->server.is_running()) {
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  return true;
}

JobRegistry& Service::jobs() { return impl_->registry; }

std::pair<std::string, int> parse_listen_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon + 1 == addr.size()) {
    throw std::invalid_argument("listen address must be HOST:PORT, got '" + addr + "'");
  }
  std::string host = addr.substr(0, colon);
  if (host.size() >= 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  if (host.empty()) host = "0.0.0.0";
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad port in listen address '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw std::invalid_argument("port out of range in '" + addr + "'");
  return {host, port};
}

}  // namespace comrat
