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

// Subprocess helpers for exercising the comrat binary.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace comrat::testing {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Process {
 public:
  /// Starts `args` with stdout/stderr redirected to temporary files.
  Process(const std::vector<std::string>& args, const std::string& stdin_text = {},
          const std::map<std::string, std::optional<std::string>>& env = {}) {
    static int counter = 0;
    const auto stem = std::filesystem::temp_directory_path() /
                      ("comrat_proc_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    out_path_ = stem.string() + ".out";
    err_path_ = stem.string() + ".err";
    in_path_ = stem.string() + ".in";
    {
      std::ofstream in(in_path_, std::ios::binary);
      in << stdin_text;
    }
    // Everything the child needs is prepared before fork(); the child only
    // calls async-signal-safe functions.
    std::map<std::string, std::string> merged;
    for (char** e = environ; *e; ++e) {
      const std::string kv(*e);
      const auto eq = kv.find('=');
      if (eq != std::string::npos) merged[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    for (const auto& [k, v] : env) {
      if (v) {
        merged[k] = *v;
      } else {
        merged.erase(k);
      }
    }
    std::vector<std::string> env_strings;
    for (const auto& [k, v] : merged) env_strings.push_back(k + "=" + v);
    std::vector<char*> envp;
    for (auto& e : env_strings) envp.push_back(e.data());
    envp.push_back(nullptr);
    std::vector<std::string> args_copy = args;
    std::vector<char*> argv;
    for (auto& a : args_copy) argv.push_back(a.data());
    argv.push_back(nullptr);

    pid_ = ::fork();
    if (pid_ == 0) {
      const int in_fd = ::open(in_path_.c_str(), O_RDONLY);
      const int out_fd = ::open(out_path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
      const int err_fd = ::open(err_path_.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0600);
      ::dup2(in_fd, 0);
      ::dup2(out_fd, 1);
      ::dup2(err_fd, 2);
      ::execve(argv[0], argv.data(), envp.data());
      ::_exit(127);
    }
  }

  ~Process() {
    if (pid_ > 0 && !finished_) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
    std::error_code ec;
    for (const auto& p : {out_path_, err_path_, in_path_}) std::filesystem::remove(p, ec);
  }

  Process(const Process&) = delete;
  Process& operator=(const Process&) = delete;

  /// Returns the exit code, or nullopt when still running after `timeout`.
  std::optional<int> wait(std::chrono::milliseconds timeout = std::chrono::seconds(60)) {
    if (finished_) return code_;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        finished_ = true;
        code_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        return code_;
      }
      if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }

  void signal(int sig) { ::kill(pid_, sig); }

  std::string out() const { return slurp(out_path_); }
  std::string err() const { return slurp(err_path_); }

 private:
  pid_t pid_ = -1;
  bool finished_ = false;
  int code_ = -1;
  std::string out_path_;
  std::string err_path_;
  std::string in_path_;
};

inline ProcessResult run_process(const std::vector<std::string>& args, const std::string& stdin_text = {},
                                 const std::map<std::string, std::optional<std::string>>& env = {}) {
  Process p(args, stdin_text, env);
  const auto code = p.wait();
  return {code.value_or(-1), p.out(), p.err()};
}

}  // namespace comrat::testing
