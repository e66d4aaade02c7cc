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

#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "comrat/pipeline.hpp"

namespace comrat {

enum class JobState { kQueued, kFetching, kClassifying, kAnalyzing, kDone, kFailed };

std::string_view to_string(JobState s);
/// Forward-only order: queued < fetching < classifying < analyzing < done;
/// failed is reachable from every non-terminal state.
bool is_valid_transition(JobState from, JobState to);

struct JobProgress {
  std::size_t fetched_commits = 0;
  std::size_t classified_sentences = 0;
  std::optional<std::size_t> total_sentences;
};

struct JobSnapshot {
  std::string id;
  std::string module_url;
  JobState state = JobState::kQueued;
  JobProgress progress;
  Timestamp created_at{};
  std::optional<std::string> error;
};

struct ServiceConfig {
  ClassifierSpec classifier;
  PreprocessConfig preprocess = PreprocessConfig::defaults();
  ReportOptions report;
  RateLimitPolicy default_rate_limit = RateLimitPolicy::kAbort;
  std::optional<std::filesystem::path> cache_dir;
  std::size_t max_jobs = 16;  // finished jobs beyond this are evicted, least recently used first
  std::size_t workers = 2;
  std::string cors_origin = "*";
  std::size_t max_message_bytes = 64 * 1024;
  std::function<std::unique_ptr<HttpTransport>()> transport_factory = make_default_transport;
  std::shared_ptr<Clock> clock = std::make_shared<SystemClock>();
};

/// In-memory job store with a bounded worker pool. Thread-safe.
class JobRegistry {
 public:
  explicit JobRegistry(ServiceConfig config);
  ~JobRegistry();
  JobRegistry(const JobRegistry&) = delete;
  JobRegistry& operator=(const JobRegistry&) = delete;

  std::string submit(ModuleRef module, std::optional<RateLimitPolicy> policy = std::nullopt);
  std::optional<JobSnapshot> snapshot(const std::string& id);
  /// Result of a finished job; nullptr while not done. nullopt for unknown ids.
  std::optional<std::shared_ptr<const ModuleAnalysisResult>> result(const std::string& id);
  std::size_t size() const;

  /// Cancels queued and running jobs and joins the workers.
  void shutdown();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP facade: /api/health, /api/commit-analysis, /api/module-analysis,
/// /api/jobs/{id}, /api/jobs/{id}/report, /api/jobs/{id}/dataset.csv.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Returns false when the address cannot be bound.
  bool bind(const std::string& host, int port);
  /// Binds an ephemeral port and returns it, or -1.
  int bind_any_port(const std::string& host);
  /// Serves until stop(). Requires a successful bind.
  bool run();
  void stop();
  bool wait_until_ready(std::chrono::milliseconds timeout) const;

  JobRegistry& jobs();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "HOST:PORT" (IPv6 as "[::1]:8080"). Throws std::invalid_argument.
std::pair<std::string, int> parse_listen_address(const std::string& addr);

}  // namespace comrat
