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


#include <gtest/gtest.h>

#include <filesystem>
#include <regex>
#include <set>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "comrat/report.hpp"
#include "support/fixtures.hpp"
#include "support/json_schema.hpp"
#include "support/mock_github.hpp"
#include "support/process.hpp"

namespace comrat {
namespace {

using namespace std::chrono_literals;
using testing::run_process;

const std::string kBin = COMRAT_BIN;
const std::string kMsg1of4 =
    "Fix the race in the allocator.\n\nOtherwise the old code leaks memory. See the thread at the list archive. "
    "The function is called from reclaim.\n";
const std::string kMsg3of4 =
    "Fix the race in the allocator.\n\nOtherwise the old code leaks memory. Take the lock because the path is "
    "shared. The check is redundant.\n";

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("comrat_cli_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

int free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  socklen_t len = sizeof(addr);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

httplib::Result wait_for_health(int port) {
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(1);
  client.set_read_timeout(2);
  httplib::Result res;
  for (int i = 0; i < 400 && !res; ++i) {
    res = client.Get("/api/health");
    if (!res) std::this_thread::sleep_for(10ms);
  }
  return res;
}

TEST(CliCommit, ExitCodesFollowVerdict) {
  auto r = run_process({kBin, "commit"}, kMsg1of4);
  EXPECT_EQ(r.exit_code, 1) << r.err;
  EXPECT_NE(r.out.find("warning"), std::string::npos);
  EXPECT_NE(r.out.find("rationale_density: 0.25"), std::string::npos);

  r = run_process({kBin, "commit"}, kMsg3of4);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("success"), std::string::npos);

  r = run_process({kBin, "commit", "--threshold", "0"}, "See the thread at the list archive.");
  EXPECT_EQ(r.exit_code, 0);
}

TEST(CliCommit, EmptyMessage) {
  EXPECT_EQ(run_process({kBin, "commit"}, "").exit_code, 0);
  EXPECT_EQ(run_process({kBin, "commit", "--strict"}, "").exit_code, 2);
}

TEST(CliCommit, JsonFormatAndFileInput) {
  const auto dir = fresh_dir("commit_file");
  std::filesystem::create_directories(dir);
  write_file(dir / "msg.txt", "Fix leak. Otherwise boot fails.");
  const auto r = run_process({kBin, "commit", "--file", (dir / "msg.txt").string(), "--format", "doc"});
  EXPECT_EQ(r.exit_code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["number_of_sentences"], 2);
  EXPECT_EQ(j["verdict"], "success");
  std::filesystem::remove_all(dir);
}

TEST(CliCommit, UsageErrors) {
  EXPECT_EQ(run_process({kBin, "commit", "--threshold", "1.5"}, "x").exit_code, 2);
  EXPECT_EQ(run_process({kBin, "commit", "--format", "yaml"}, "x").exit_code, 2);
  EXPECT_EQ(run_process({kBin, "commit", "--file", "/nonexistent/msg"}).exit_code, 2);
  EXPECT_EQ(run_process({kBin, "commit", "--classifier", "bilstm"}, "x").exit_code, 2);
  EXPECT_EQ(run_process({kBin}).exit_code, 2);
  EXPECT_EQ(run_process({kBin, "frobnicate"}).exit_code, 2);
}

TEST(CliCommit, AdapterClassifier) {
  const auto r = run_process({kBin, "commit", "--classifier", std::string("adapter:") + STUB_ADAPTER + " echo"},
                             "One. Two. Three. Four.");
  // Echo marks ids 0 and 3 as rationale.
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("rationale_density: 0.50"), std::string::npos);
  const auto crash = run_process(
      {kBin, "commit", "--classifier", std::string("adapter:") + STUB_ADAPTER + " crash-after 1"}, "One. Two.");
  EXPECT_EQ(crash.exit_code, 4);
}

TEST(CliModule, MissingUrlIsUsage) {
  const auto r = run_process({kBin, "module"});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("--url"), std::string::npos);
}

TEST(CliModule, UnsetTokenVariableIsUsage) {
  const auto r = run_process({kBin, "module", "--url", "https://api.github.com/repos/o/r/commits?path=x",
                              "--token-env", "COMRAT_TEST_UNSET_TOKEN"},
                             {}, {{"COMRAT_TEST_UNSET_TOKEN", std::nullopt}});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("COMRAT_TEST_UNSET_TOKEN"), std::string::npos);
}

TEST(CliModule, BadUrlIsUsage) {
  EXPECT_EQ(run_process({kBin, "module", "--url", "https://example.org/x"}).exit_code, 2);
  EXPECT_EQ(run_process({kBin, "module", "--url", "https://api.github.com/repos/o/r/commits", "--rate-limit", "later"})
                .exit_code,
            2);
}

TEST(CliModule, RunAgainstMockWritesOutputs) {
  testing::MockClock clock;
  testing::MockGitHub github(testing::synthetic_history(217), clock);
  const auto out = fresh_dir("module_out");
  const auto cache = fresh_dir("module_cache");
  const std::string token = "ghp_CliSecretToken_77";
  const auto r = run_process({kBin, "module", "--url", github.url(), "--out", out.string(), "--cache", cache.string(),
                              "--token-env", "COMRAT_TEST_TOKEN"},
                             {}, {{"COMRAT_TEST_TOKEN", token}});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("Rationale Percentage: "), std::string::npos);
  EXPECT_TRUE(std::regex_search(r.out, std::regex(R"(Rationale Percentage: \d{1,3}\.\d{2}%)")));
  std::set<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(out)) files.insert(e.path().filename().string());
  EXPECT_EQ(files, (std::set<std::string>{"dataset.csv", "report.json", "factor_size_scatter.svg",
                                          "factor_author_bars.svg", "evolution_lines.svg", "structure_bars.svg",
                                          "words_decision.svg", "words_rationale.svg"}));
  for (const auto& dir : {out, cache}) {
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      EXPECT_EQ(read_file(e.path()).find(token), std::string::npos) << e.path();
    }
  }
  EXPECT_EQ(r.out.find(token), std::string::npos);
  EXPECT_EQ(r.err.find(token), std::string::npos);

  // A second run hits the cache and reproduces the report byte for byte.
  const auto first = read_file(out / "report.json");
  const auto requests = github.requests().size();
  const auto again = run_process({kBin, "module", "--url", github.url(), "--out", out.string(), "--cache", cache.string()});
  ASSERT_EQ(again.exit_code, 0) << again.err;
  EXPECT_EQ(github.requests().size(), requests);
  EXPECT_EQ(read_file(out / "report.json"), first);
  std::filesystem::remove_all(out);
  std::filesystem::remove_all(cache);
}

TEST(CliModule, IngestFailureExit3) {
  testing::MockClock clock;
  testing::MockGitHub github(testing::synthetic_history(5), clock);
  github.fail_next(1, 404);
  const auto out = fresh_dir("module_404");
  const auto r = run_process({kBin, "module", "--url", github.url(), "--out", out.string()});
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_FALSE(std::filesystem::exists(out / "report.json"));
}

TEST(CliModule, MissingAdapterExit4) {
  const auto r = run_process({kBin, "module", "--url", "https://api.github.com/repos/o/r/commits?path=x",
                              "--classifier", "adapter:/nonexistent/classifier"});
  EXPECT_EQ(r.exit_code, 4);
}

TEST(CliServe, HealthThenSigterm) {
  const int port = free_port();
  testing::Process serve({kBin, "serve", "--addr", "127.0.0.1:" + std::to_string(port)});
  const auto res = wait_for_health(port);
  ASSERT_TRUE(res) << serve.err();
  EXPECT_EQ(res->status, 200);
  serve.signal(SIGTERM);
  EXPECT_EQ(serve.wait(10s), 0);
}

TEST(CliServe, AddressFromEnvironment) {
  const int port = free_port();
  testing::Process serve({kBin, "serve"}, {}, {{"COMRAT_ADDR", "127.0.0.1:" + std::to_string(port)}});
  const auto res = wait_for_health(port);
  ASSERT_TRUE(res) << serve.err();
  serve.signal(SIGINT);
  EXPECT_EQ(serve.wait(10s), 0);
}

TEST(CliServe, OccupiedPort) {
  httplib::Server blocker;
  const int port = blocker.bind_to_any_port("127.0.0.1");
  const auto r = run_process({kBin, "serve", "--addr", "127.0.0.1:" + std::to_string(port)});
  EXPECT_NE(r.exit_code, 0);
  EXPECT_EQ(r.exit_code, 5);
  EXPECT_NE(r.err.find("cannot listen"), std::string::npos);
}

TEST(CliServe, MissingAdapterRefusesToStart) {
  const auto r = run_process({kBin, "serve", "--addr", "127.0.0.1:0", "--classifier", "adapter:/nonexistent/cls"});
  EXPECT_EQ(r.exit_code, 4);
}

TEST(CliServe, BadAddress) {
  EXPECT_EQ(run_process({kBin, "serve", "--addr", "nonsense"}).exit_code, 2);
}

}  // namespace
}  // namespace comrat
