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

// In-process stand-in for the GitHub commits endpoint, plus a manually
// advanced clock shared between the fetcher and the server.

#include <atomic>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "comrat/time.hpp"

namespace comrat::testing {

class MockClock final : public Clock {
 public:
  explicit MockClock(Timestamp start = Timestamp{std::chrono::seconds{1'700'000'000}}) : now_(start.time_since_epoch().count()) {}

  Timestamp now() const override { return Timestamp{std::chrono::seconds{now_.load()}}; }

  void sleep_until(Timestamp when) override {
    std::lock_guard lock(mu_);
    sleeps_.push_back(when);
    const auto target = when.time_since_epoch().count();
    auto cur = now_.load();
    while (cur < target && !now_.compare_exchange_weak(cur, target)) {
    }
  }

  void advance(std::chrono::seconds d) { now_ += d.count(); }

  std::vector<Timestamp> sleeps() const {
    std::lock_guard lock(mu_);
    return sleeps_;
  }

 private:
  std::atomic<long long> now_;
  mutable std::mutex mu_;
  std::vector<Timestamp> sleeps_;
};

struct RecordedRequest {
  int page = 0;
  int per_page = 0;
  Timestamp at{};
  std::string authorization;
  std::string path;
  int status = 0;
};

class MockGitHub {
 public:
  /// `commits` are GitHub-shaped JSON objects, newest first.
  MockGitHub(std::vector<nlohmann::json> commits, Clock& clock) : commits_(std::move(commits)), clock_(clock) {
    server_.Get(R"(/repos/.*)", [this](const httplib::Request& req, httplib::Response& res) { handle(req, res); });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockGitHub() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  MockGitHub(const MockGitHub&) = delete;
  MockGitHub& operator=(const MockGitHub&) = delete;

  std::string url(const std::string& path = "mm/slob.c") const {
    return fmt::format("http://127.0.0.1:{}/repos/torvalds/linux/commits?path={}", port_, path);
  }
  int port() const { return port_; }

  /// After serving this page, report remaining=0 with a reset `reset_in` ahead.
  void exhaust_after_page(int page, std::chrono::seconds reset_in = std::chrono::seconds{3}) {
    std::lock_guard lock(mu_);
    exhaust_after_page_ = page;
    reset_in_ = reset_in;
  }
  /// Next `n` requests answer with this status.
  void fail_next(int n, int status) {
    std::lock_guard lock(mu_);
    fail_remaining_ = n;
    fail_status_ = status;
  }
  void set_link_headers(bool on) {
    std::lock_guard lock(mu_);
    link_headers_ = on;
  }
  void set_raw_body(std::string body) {
    std::lock_guard lock(mu_);
    raw_body_ = std::move(body);
  }

  std::vector<RecordedRequest> requests() const {
    std::lock_guard lock(mu_);
    return log_;
  }
  /// Requests that arrived while the budget was exhausted.
  int violations() const {
    std::lock_guard lock(mu_);
    return violations_;
  }
  std::optional<Timestamp> reset_at() const {
    std::lock_guard lock(mu_);
    return reset_at_;
  }

 private:
  void handle(const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mu_);
    RecordedRequest rec;
    rec.page = req.has_param("page") ? std::stoi(req.get_param_value("page")) : 1;
    rec.per_page = req.has_param("per_page") ? std::stoi(req.get_param_value("per_page")) : 30;
    rec.at = clock_.now();
    rec.authorization = req.get_header_value("Authorization");
    rec.path = req.path;
    const auto now = clock_.now();

    if (reset_at_ && now >= *reset_at_) {
      reset_at_.reset();
      remaining_ = 5000;
    }
    auto reset_epoch = (reset_at_ ? *reset_at_ : now + std::chrono::seconds{3600}).time_since_epoch().count();

    if (remaining_ == 0) {
      ++violations_;
      rec.status = 403;
      res.status = 403;
      res.set_header("X-RateLimit-Remaining", "0");
      res.set_header("X-RateLimit-Reset", std::to_string(reset_epoch));
      res.set_content(R"({"message":"API rate limit exceeded"})", "application/json");
      log_.push_back(rec);
      return;
    }
    if (fail_remaining_ > 0) {
      --fail_remaining_;
      rec.status = fail_status_;
      res.status = fail_status_;
      res.set_header("X-RateLimit-Remaining", std::to_string(remaining_));
      res.set_header("X-RateLimit-Reset", std::to_string(reset_epoch));
      res.set_content(R"({"message":"scripted failure"})", "application/json");
      log_.push_back(rec);
      return;
    }

    --remaining_;
    if (exhaust_after_page_ && rec.page == *exhaust_after_page_) {
      remaining_ = 0;
      reset_at_ = now + reset_in_;
      reset_epoch = reset_at_->time_since_epoch().count();
      exhaust_after_page_.reset();
    }

    rec.status = 200;
    res.status = 200;
    res.set_header("X-RateLimit-Remaining", std::to_string(remaining_));
    res.set_header("X-RateLimit-Reset", std::to_string(reset_epoch));
    if (raw_body_) {
      res.set_content(*raw_body_, "application/json");
      log_.push_back(rec);
      return;
    }
    nlohmann::json page = nlohmann::json::array();
    const std::size_t begin = static_cast<std::size_t>(rec.page - 1) * static_cast<std::size_t>(rec.per_page);
    for (std::size_t i = begin; i < commits_.size() && i < begin + static_cast<std::size_t>(rec.per_page); ++i) {
      page.push_back(commits_[i]);
    }
    if (link_headers_) {
      const bool more = begin + static_cast<std::size_t>(rec.per_page) < commits_.size();
      res.set_header("Link", more ? fmt::format("<{}&page={}>; rel=\"next\"", url(), rec.page + 1)
                                  : fmt::format("<{}&page=1>; rel=\"first\"", url()));
    }
    res.set_content(page.dump(), "application/json");
    log_.push_back(rec);
  }

  std::vector<nlohmann::json> commits_;
  Clock& clock_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mu_;
  std::vector<RecordedRequest> log_;
  long long remaining_ = 5000;
  std::optional<Timestamp> reset_at_;
  std::optional<int> exhaust_after_page_;
  std::chrono::seconds reset_in_{3};
  int fail_remaining_ = 0;
  int fail_status_ = 500;
  bool link_headers_ = false;
  std::optional<std::string> raw_body_;
  int violations_ = 0;
};

}  // namespace comrat::testing
