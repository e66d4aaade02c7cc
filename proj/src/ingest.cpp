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

#include "comrat/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace comrat {

using json = nlohmann::json;

namespace {

std::mutex g_sink_mutex;
std::function<void(const std::string&)> g_sink;

struct UrlParts {
  std::string scheme;
  std::string host;
  int port = 0;
  std::string path_and_query;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::optional<UrlParts> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  UrlParts parts;
  parts.scheme = lower(url.substr(0, scheme_end));
  const auto authority_begin = scheme_end + 3;
  auto path_begin = url.find_first_of("/?", authority_begin);
  std::string authority = url.substr(authority_begin, path_begin == std::string::npos ? std::string::npos
                                                                                       : path_begin - authority_begin);
  if (authority.empty() || authority.find('@') != std::string::npos) return std::nullopt;
  parts.path_and_query = path_begin == std::string::npos ? "/" : url.substr(path_begin);
  if (parts.path_and_query.front() == '?') parts.path_and_query.insert(0, "/");
  parts.port = parts.scheme == "https" ? 443 : 80;
  std::string host = authority;
  if (host.front() == '[') {
    const auto close = host.find(']');
    if (close == std::string::npos) return std::nullopt;
    parts.host = host.substr(1, close - 1);
    host = host.substr(close + 1);
    if (!host.empty() && host.front() != ':') return std::nullopt;
    if (!host.empty()) host = host.substr(1);
    else host.clear();
    if (!host.empty()) {
      try {
        parts.port = std::stoi(host);
      } catch (const std::exception&) {
        return std::nullopt;
      }
    }
    return parts;
  }
  const auto colon = host.rfind(':');
  if (colon != std::string::npos) {
    try {
      std::size_t used = 0;
      parts.port = std::stoi(host.substr(colon + 1), &used);
      if (used != host.size() - colon - 1) return std::nullopt;
    } catch (const std::exception&) {
      return std::nullopt;
    }
    host = host.substr(0, colon);
  }
  if (host.empty()) return std::nullopt;
  parts.host = lower(host);
  return parts;
}

constexpr int kMaxRateLimitWaits = 10;

bool is_loopback(const std::string& host) { return host == "localhost" || host == "127.0.0.1" || host == "::1"; }

// Drops any per_page/page parameters so pagination owns them.
std::string page_url(const std::string& api_url, int per_page, int page) {
  std::string base = api_url;
  std::string fragment;
  if (auto hash = base.find('#'); hash != std::string::npos) base.resize(hash);
  std::string query;
  if (auto q = base.find('?'); q != std::string::npos) {
    query = base.substr(q + 1);
    base.resize(q);
  }
  std::string kept;
  std::stringstream ss(query);
  std::string param;
  while (std::getline(ss, param, '&')) {
    if (param.empty()) continue;
    const auto key = param.substr(0, param.find('='));
    if (key == "per_page" || key == "page") continue;
    if (!kept.empty()) kept += '&';
    kept += param;
  }
  std::string url = base + '?';
  if (!kept.empty()) url += kept + '&';
  url += fmt::format("per_page={}&page={}", per_page, page);
  return url;
}

std::optional<std::string> header(const HttpResponse& r, const std::string& key) {
  auto it = r.headers.find(key);
  if (it == r.headers.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int64_t> parse_int(const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// rel="next" absent from a present Link header means this was the last page.
bool link_says_last_page(const HttpResponse& r) {
  const auto link = header(r, "link");
  if (!link) return false;
  return link->find("rel=\"next\"") == std::string::npos;
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse get(const std::string& url, const std::multimap<std::string, std::string>& headers) override {
    const auto parts = split_url(url);
    if (!parts) throw NetworkError("unparsable URL");
    std::unique_ptr<httplib::Client> client;
    if (parts->scheme == "https") {
#ifdef CPPHTTPLIB_OPENSSL_SUPPORT
      client = std::make_unique<httplib::Client>(fmt::format("https://{}:{}", parts->host, parts->port));
#else
      throw NetworkError("https support not compiled in");
#endif
    } else {
      client = std::make_unique<httplib::Client>(parts->host, parts->port);
    }
    client->set_connection_timeout(10);
    client->set_read_timeout(60);
    httplib::Headers h(headers.begin(), headers.end());
    auto res = client->Get(parts->path_and_query, h);
    if (!res) throw NetworkError(fmt::format("request to {} failed: {}", parts->host, httplib::to_string(res.error())));
    HttpResponse out;
    out.status = res->status;
    out.body = std::move(res->body);
    for (const auto& [k, v] : res->headers) out.headers.emplace(lower(k), v);
    return out;
  }
};

}  // namespace

void ModuleRef::validate() const {
  const auto parts = split_url(api_url);
  if (!parts) throw InvalidModuleUrl("module URL is not an absolute URL: " + api_url);
  if (parts->scheme != "https" && !(parts->scheme == "http" && is_loopback(parts->host))) {
    throw InvalidModuleUrl("module URL must use https: " + api_url);
  }
  const auto path = parts->path_and_query.substr(0, parts->path_and_query.find('?'));
  const auto repos = path.find("/repos/");
  if (repos == std::string::npos || path.find("/commits", repos) == std::string::npos) {
    throw InvalidModuleUrl("module URL must point at /repos/<owner>/<repo>/commits: " + api_url);
  }
}

RateLimited::RateLimited(Timestamp reset_at, std::vector<Commit> partial)
    : IngestError(fmt::format("GitHub API rate limit exhausted; resets at {}", format_iso8601(reset_at))),
      reset_at_(reset_at),
      partial_(std::move(partial)) {}

RateLimitDecision check_rate_limit(const RateLimitState& state, RateLimitPolicy policy) {
  if (!state.remaining || *state.remaining > 0) return Proceed{};
  if (policy == RateLimitPolicy::kAbort) throw RateLimited(state.reset_at, {});
  return WaitUntil{state.reset_at};
}

void update_rate_limit(RateLimitState& state, const std::multimap<std::string, std::string>& headers) {
  if (auto it = headers.find("x-ratelimit-remaining"); it != headers.end()) {
    if (auto v = parse_int(it->second)) state.remaining = std::max<std::int64_t>(0, *v);
  }
  if (auto it = headers.find("x-ratelimit-reset"); it != headers.end()) {
    if (auto v = parse_int(it->second)) state.reset_at = Timestamp{std::chrono::seconds{*v}};
  }
}

std::unique_ptr<HttpTransport> make_default_transport() { return std::make_unique<HttplibTransport>(); }

std::vector<Commit> parse_commit_page(const std::string& body) {
  json page;
  try {
    page = json::parse(body);
  } catch (const json::parse_error& e) {
    throw MalformedResponse(std::string("commit page is not valid JSON: ") + e.what());
  }
  if (!page.is_array()) throw MalformedResponse("commit page is not a JSON array");
  std::vector<Commit> out;
  out.reserve(page.size());
  try {
    for (const auto& item : page) {
      Commit c;
      c.sha = item.at("sha").get<std::string>();
      const auto& commit = item.at("commit");
      const auto& author = commit.at("author");
      c.author_name = author.value("name", std::string{});
      const auto email = author.contains("email") && author["email"].is_string() ? author["email"].get<std::string>()
                                                                                  : std::string{};
      c.author_id = email.empty() ? c.author_name : email;
      std::string date;
      if (commit.contains("committer") && commit["committer"].is_object() && commit["committer"].contains("date")) {
        date = commit["committer"]["date"].get<std::string>();
      } else {
        date = author.at("date").get<std::string>();
      }
      auto ts = parse_iso8601(date);
      if (!ts) throw MalformedResponse("bad commit timestamp: " + date);
      c.committed_at = *ts;
      c.message = commit.at("message").is_null() ? std::string{} : commit.at("message").get<std::string>();
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("unexpected commit JSON shape: ") + e.what());
  }
  return out;
}

CommitFetcher::CommitFetcher(HttpTransport& transport, Clock& clock, FetchOptions options)
    : transport_(transport), clock_(clock), options_(std::move(options)) {}

HttpResponse CommitFetcher::get_with_retries(const std::string& url, const ModuleRef& module) {
  std::multimap<std::string, std::string> headers{{"Accept", "application/vnd.github+json"},
                                                  {"User-Agent", "comrat"}};
  if (module.token && !module.token->empty()) headers.emplace("Authorization", "Bearer " + *module.token);
  for (int attempt = 0;; ++attempt) {
    std::string failure;
    try {
      auto res = transport_.get(url, headers);
      if (res.status < 500) return res;
      failure = fmt::format("server error {}", res.status);
    } catch (const NetworkError& e) {
      failure = e.what();
    }
    if (attempt >= options_.max_retries) {
      throw NetworkError(redact(fmt::format("{} (after {} retries)", failure, attempt), module.token));
    }
    clock_.sleep_for(std::chrono::seconds{1 << attempt});
  }
}

FetchResult CommitFetcher::fetch(const ModuleRef& module) {
  module.validate();
  if (module.cache_dir) {
    if (auto cached = cache_load(module)) {
      if (options_.on_progress) options_.on_progress(cached->commits.size());
      return {std::move(cached->commits), cached->fetched_at, true};
    }
  }

  std::vector<Commit> commits;
  std::unordered_set<std::string> seen;
  int consecutive_limit_hits = 0;
  for (int page = 1;;) {
    if (options_.cancelled && options_.cancelled()) throw Cancelled();
    RateLimitDecision decision;
    try {
      decision = check_rate_limit(state_, options_.policy);
    } catch (const RateLimited& e) {
      throw RateLimited(e.reset_at(), std::move(commits));
    }
    if (auto* wait = std::get_if<WaitUntil>(&decision)) clock_.sleep_until(wait->reset_at);

    const auto res = get_with_retries(page_url(module.api_url, options_.per_page, page), module);
    update_rate_limit(state_, res.headers);

    if ((res.status == 403 || res.status == 429) && state_.remaining && *state_.remaining == 0) {
      if (options_.policy == RateLimitPolicy::kAbort || ++consecutive_limit_hits > kMaxRateLimitWaits) {
        throw RateLimited(state_.reset_at, std::move(commits));
      }
      // A reset already in the past would otherwise retry immediately.
      if (state_.reset_at <= clock_.now()) clock_.sleep_for(std::chrono::seconds{1});
      continue;  // waits at the top of the loop, then retries this page
    }
    consecutive_limit_hits = 0;
    if (res.status == 401 || res.status == 403) {
      throw AuthError(fmt::format("GitHub refused the request (HTTP {}); check the token", res.status));
    }
    if (res.status == 404) throw NotFound("module not found: " + module.api_url);
    if (res.status < 200 || res.status >= 300) {
      throw IngestError(fmt::format("unexpected HTTP status {} from GitHub", res.status));
    }

    auto batch = parse_commit_page(res.body);
    if (batch.empty()) break;
    for (auto& c : batch) {
      if (seen.insert(c.sha).second) commits.push_back(std::move(c));
    }
    if (options_.on_progress) options_.on_progress(commits.size());
    if (link_says_last_page(res)) break;
    ++page;
  }

  FetchResult result{std::move(commits), clock_.now(), false};
  if (module.cache_dir) cache_store(module, result.commits, result.fetched_at);
  return result;
}

std::vector<Commit> fetch_commits(const ModuleRef& module, FetchOptions options) {
  auto transport = make_default_transport();
  SystemClock clock;
  CommitFetcher fetcher(*transport, clock, std::move(options));
  return fetcher.fetch(module).commits;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::filesystem::path cache_path(const ModuleRef& module) {
  if (!module.cache_dir) throw std::invalid_argument("module has no cache_dir");
  return *module.cache_dir / fmt::format("commits-{:016x}.json", fnv1a64(module.api_url));
}

void cache_store(const ModuleRef& module, const std::vector<Commit>& commits, Timestamp fetched_at) {
  nlohmann::ordered_json doc;
  doc["format"] = "comrat-commit-cache";
  doc["version"] = 1;
  doc["api_url"] = module.api_url;
  doc["fetched_at"] = format_iso8601(fetched_at);
  auto& list = doc["commits"] = nlohmann::ordered_json::array();
  for (const auto& c : commits) {
    list.push_back({{"sha", c.sha},
                    {"author_id", c.author_id},
                    {"author_name", c.author_name},
                    {"committed_at", format_iso8601(c.committed_at)},
                    {"message", c.message}});
  }
  const auto path = cache_path(module);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write cache file " + tmp);
    out << doc.dump(1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
    if (!out) throw std::runtime_error("failed writing cache file " + tmp);
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("cannot move cache file into place: " + ec.message());
}

std::optional<CachedHistory> cache_load(const ModuleRef& module) {
  if (!module.cache_dir) return std::nullopt;
  const auto path = cache_path(module);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const auto doc = json::parse(in);
    if (doc.at("format") != "comrat-commit-cache" || doc.at("version") != 1) {
      warn("ignoring cache file with unknown format: " + path.string());
      return std::nullopt;
    }
    if (doc.at("api_url").get<std::string>() != module.api_url) return std::nullopt;
    CachedHistory h;
    const auto fetched = parse_iso8601(doc.at("fetched_at").get<std::string>());
    if (!fetched) throw std::runtime_error("bad fetched_at");
    h.fetched_at = *fetched;
    for (const auto& item : doc.at("commits")) {
      Commit c;
      c.sha = item.at("sha").get<std::string>();
      c.author_id = item.at("author_id").get<std::string>();
      c.author_name = item.at("author_name").get<std::string>();
      const auto ts = parse_iso8601(item.at("committed_at").get<std::string>());
      if (!ts) throw std::runtime_error("bad committed_at");
      c.committed_at = *ts;
      c.message = item.at("message").get<std::string>();
      h.commits.push_back(std::move(c));
    }
    return h;
  } catch (const std::exception& e) {
    warn("ignoring corrupt cache file " + path.string() + ": " + e.what());
    return std::nullopt;
  }
}

void set_warning_sink(std::function<void(const std::string&)> sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

std::string redact(std::string text, const std::optional<std::string>& secret) {
  if (!secret || secret->empty()) return text;
  for (auto pos = text.find(*secret); pos != std::string::npos; pos = text.find(*secret, pos + 3)) {
    text.replace(pos, secret->size(), "***");
  }
  return text;
}

}  // namespace comrat
