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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "comrat/time.hpp"

namespace comrat {

/// A module is one source path inside a repository, addressed by its
/// commits-by-path endpoint, e.g.
/// https://api.github.com/repos/torvalds/linux/commits?path=mm/slob.c
struct ModuleRef {
  std::string api_url;
  std::optional<std::string> token;
  std::optional<std::filesystem::path> cache_dir;

  /// Throws InvalidModuleUrl when api_url is not an absolute https URL
  /// whose path contains /repos/ and /commits. Plain http is accepted for
  /// loopback hosts only.
  void validate() const;
};

struct Commit {
  std::string sha;
  std::string author_id;  // email when present, else name
  std::string author_name;
  Timestamp committed_at;
  std::string message;

  friend bool operator==(const Commit&, const Commit&) = default;
};

struct RateLimitState {
  std::optional<std::int64_t> remaining;  // unknown until the first response
  Timestamp reset_at{};
};

enum class RateLimitPolicy { kWait, kAbort };

// Errors. Messages never contain the token.

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidModuleUrl : public IngestError {
 public:
  using IngestError::IngestError;
};

class AuthError : public IngestError {
 public:
  using IngestError::IngestError;
};

class NotFound : public IngestError {
 public:
  using IngestError::IngestError;
};

class NetworkError : public IngestError {
 public:
  using IngestError::IngestError;
};

class MalformedResponse : public IngestError {
 public:
  using IngestError::IngestError;
};

class RateLimited : public IngestError {
 public:
  RateLimited(Timestamp reset_at, std::vector<Commit> partial);
  Timestamp reset_at() const { return reset_at_; }
  /// Commits fetched before the limit was hit.
  const std::vector<Commit>& partial() const { return partial_; }

 private:
  Timestamp reset_at_;
  std::vector<Commit> partial_;
};

class Cancelled : public std::runtime_error {
 public:
  Cancelled() : std::runtime_error("cancelled") {}
};

struct Proceed {};
struct WaitUntil {
  Timestamp reset_at;
};
using RateLimitDecision = std::variant<Proceed, WaitUntil>;

/// Decides whether the next request may go out. Throws RateLimited under
/// kAbort when the budget is exhausted.
RateLimitDecision check_rate_limit(const RateLimitState& state, RateLimitPolicy policy);

/// Updates `state` from X-RateLimit-Remaining / X-RateLimit-Reset. Missing
/// or unparsable headers leave the corresponding field untouched.
void update_rate_limit(RateLimitState& state, const std::multimap<std::string, std::string>& headers);

struct HttpResponse {
  int status = 0;
  std::multimap<std::string, std::string> headers;  // keys lowercased
  std::string body;
};

/// Minimal GET transport. Throws NetworkError on connection failure.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string& url, const std::multimap<std::string, std::string>& headers) = 0;
};

/// cpp-httplib backed transport (https through OpenSSL).
std::unique_ptr<HttpTransport> make_default_transport();

struct FetchOptions {
  RateLimitPolicy policy = RateLimitPolicy::kAbort;
  int per_page = 100;
  int max_retries = 3;  // on 5xx / network errors, backoff 1s, 2s, 4s
  /// Called after each page with the running commit count.
  std::function<void(std::size_t)> on_progress;
  /// Polled between requests; returning true aborts with Cancelled.
  std::function<bool()> cancelled;
};

struct FetchResult {
  std::vector<Commit> commits;
  Timestamp fetched_at;
  bool from_cache = false;
};

/// Page-by-page commit fetcher with its own rate-limit bookkeeping. One
/// instance serves one session; it is not safe to share across threads.
class CommitFetcher {
 public:
  CommitFetcher(HttpTransport& transport, Clock& clock, FetchOptions options = {});

  /// Returns the module's history newest-first as delivered by the API,
  /// de-duplicated by sha. Consults module.cache_dir first and stores the
  /// result there after a network fetch.
  FetchResult fetch(const ModuleRef& module);

  const RateLimitState& rate_limit() const { return state_; }

 private:
  HttpResponse get_with_retries(const std::string& url, const ModuleRef& module);

  HttpTransport& transport_;
  Clock& clock_;
  FetchOptions options_;
  RateLimitState state_;
};

/// Convenience wrapper using the default transport and the system clock.
std::vector<Commit> fetch_commits(const ModuleRef& module, FetchOptions options = {});

/// Parses one page of the commits endpoint.
std::vector<Commit> parse_commit_page(const std::string& body);

struct CachedHistory {
  std::vector<Commit> commits;
  Timestamp fetched_at;
};

std::filesystem::path cache_path(const ModuleRef& module);

/// Writes the commit list for module.api_url. Throws std::runtime_error on IO failure.
void cache_store(const ModuleRef& module, const std::vector<Commit>& commits, Timestamp fetched_at);

/// Returns nullopt on a miss. A corrupt file or one recorded for another URL
/// is a miss; corruption is reported through the warning sink.
std::optional<CachedHistory> cache_load(const ModuleRef& module);

/// Receives non-fatal diagnostics (default: stderr).
void set_warning_sink(std::function<void(const std::string&)> sink);
void warn(const std::string& message);

std::uint64_t fnv1a64(std::string_view data);

/// Replaces every occurrence of `secret` in `text` with "***".
std::string redact(std::string text, const std::optional<std::string>& secret);

}  // namespace comrat
