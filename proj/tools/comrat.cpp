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

// comrat: commit message rationale analysis from the command line.
//
//   comrat module --url <api-url> [--token-env VAR] [--cache DIR]
//                 [--classifier lexicon|adapter:<cmd>] [--out DIR]
//                 [--rate-limit wait|abort]
//   comrat commit [--file PATH] [--threshold 0.5] [--format text|doc] [--strict]
//   comrat serve  [--addr HOST:PORT]
//
// Exit codes: 0 success, 1 commit below threshold, 2 usage error,
// 3 ingest failure, 4 classifier failure, 5 service could not start.

#include <signal.h>

#include <cstdlib>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "comrat/commit_analyzer.hpp"
#include "comrat/pipeline.hpp"
#include "comrat/service.hpp"

namespace {

constexpr int kExitWarning = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIngest = 3;
constexpr int kExitClassifier = 4;
constexpr int kExitServe = 5;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClassifierOptions {
  std::string classifier = "lexicon";
  std::string lexicon;
  std::string preprocess_config;

  comrat::ClassifierSpec spec() const {
    comrat::ClassifierSpec s;
    try {
      s = comrat::ClassifierSpec::from_string(classifier);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (!lexicon.empty()) s.lexicon_path = lexicon;
    return s;
  }

  comrat::PreprocessConfig preprocess() const {
    if (preprocess_config.empty()) return comrat::PreprocessConfig::defaults();
    try {
      return comrat::PreprocessConfig::load(preprocess_config);
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  }

  void add_to(CLI::App& app) {
    app.add_option("--classifier", classifier, "lexicon or adapter:<command>")->capture_default_str();
    app.add_option("--lexicon", lexicon, "Lexicon file replacing the built-in word lists");
    app.add_option("--preprocess-config", preprocess_config, "Trailer/code-line rule file");
  }
};

comrat::RateLimitPolicy parse_policy(const std::string& s) {
  if (s == "wait") return comrat::RateLimitPolicy::kWait;
  if (s == "abort") return comrat::RateLimitPolicy::kAbort;
  throw UsageError("--rate-limit must be wait or abort");
}

int run_module(const std::string& url, const std::string& token_env, const std::string& cache,
               const ClassifierOptions& copts, const std::string& out_dir, const std::string& rate_limit,
               const std::vector<std::string>& stopword_files) {
  comrat::ModuleRef module;
  module.api_url = url;
  if (!token_env.empty()) {
    const char* value = std::getenv(token_env.c_str());
    if (!value || !*value) throw UsageError(fmt::format("environment variable {} is not set", token_env));
    module.token = value;
  }
  if (!cache.empty()) module.cache_dir = cache;
  try {
    module.validate();
  } catch (const comrat::InvalidModuleUrl& e) {
    throw UsageError(e.what());
  }

  comrat::ModuleAnalysisOptions options;
  options.classifier = copts.spec();
  options.preprocess = copts.preprocess();
  options.rate_limit = parse_policy(rate_limit);
  for (const auto& f : stopword_files) {
    try {
      options.report.stopwords.extend_from_file(f);
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  }
  if (options.classifier.kind == comrat::ClassifierKind::kExternalAdapter &&
      !comrat::adapter_command_available(*options.classifier.adapter_command)) {
    std::cerr << "error: classifier adapter command not found: " << *options.classifier.adapter_command << '\n';
    return kExitClassifier;
  }

  auto transport = comrat::make_default_transport();
  comrat::SystemClock clock;
  comrat::ModuleAnalysisHooks hooks;
  hooks.on_fetched = [](std::size_t n) { std::cerr << "\rfetched " << n << " commits" << std::flush; };
  hooks.on_stage = [](comrat::Stage s) {
    if (s == comrat::Stage::kClassifying) std::cerr << "\nclassifying sentences\n";
  };

  comrat::ModuleAnalysisResult result;
  try {
    result = comrat::run_module_analysis(module, *transport, clock, options, hooks);
  } catch (const comrat::IngestError& e) {
    std::cerr << "\nerror: " << comrat::redact(e.what(), module.token) << '\n';
    return kExitIngest;
  } catch (const comrat::ClassifierError& e) {
    std::cerr << "\nerror: classifier failed: " << e.what() << '\n';
    return kExitClassifier;
  }

  comrat::write_outputs(result, out_dir);
  std::cout << "The " << url << " module\n\n" << comrat::format_summary(result.report);
  std::cout << "\nWrote " << out_dir << "/" << comrat::kDatasetFileName << ", " << comrat::kReportFileName
            << " and figures\n";
  return 0;
}

int run_commit(const std::string& file, double threshold, const std::string& format, bool strict,
               const ClassifierOptions& copts) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw UsageError("--threshold must lie in [0, 1]");
  if (format != "text" && format != "doc") throw UsageError("--format must be text or doc");
  std::string message;
  if (file.empty() || file == "-") {
    message.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    try {
      message = comrat::read_file(file);
    } catch (const std::runtime_error& e) {
      throw UsageError(e.what());
    }
  }

  comrat::CommitReport report;
  try {
    report = comrat::analyze_commit_message(message, copts.spec(), threshold, copts.preprocess());
  } catch (const comrat::ClassifierError& e) {
    std::cerr << "error: classifier failed: " << e.what() << '\n';
    return kExitClassifier;
  }
  std::cout << (format == "doc" ? comrat::commit_report_json(report) : comrat::format_commit_report(report));
  switch (report.verdict) {
    case comrat::Verdict::kSuccess: return 0;
    case comrat::Verdict::kWarning: return kExitWarning;
    case comrat::Verdict::kEmpty: return strict ? kExitUsage : 0;
  }
  return 0;
}

int run_serve(std::string addr, const ClassifierOptions& copts, const std::string& cache, const std::string& cors,
              std::size_t workers, std::size_t max_jobs, const std::string& rate_limit,
              const std::vector<std::string>& stopword_files) {
  if (addr.empty()) {
    const char* env = std::getenv("COMRAT_ADDR");
    addr = env && *env ? env : "127.0.0.1:8080";
  }
  std::pair<std::string, int> listen;
  try {
    listen = comrat::parse_listen_address(addr);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  comrat::ServiceConfig config;
  config.classifier = copts.spec();
  config.preprocess = copts.preprocess();
  config.default_rate_limit = parse_policy(rate_limit);
  config.cors_origin = cors;
  config.workers = workers;
  config.max_jobs = max_jobs;
  if (!cache.empty()) config.cache_dir = cache;
  for (const auto& f : stopword_files) config.report.stopwords.extend_from_file(f);
  if (config.classifier.kind == comrat::ClassifierKind::kExternalAdapter &&
      !comrat::adapter_command_available(*config.classifier.adapter_command)) {
    std::cerr << "error: classifier adapter command not found: " << *config.classifier.adapter_command << '\n';
    return kExitClassifier;
  }

  // Signals are handled on a dedicated thread; block them everywhere else.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  comrat::Service service(config);
  if (!service.bind(listen.first, listen.second)) {
    std::cerr << "error: cannot listen on " << addr << " (address in use or not permitted)\n";
    return kExitServe;
  }
  std::thread signal_thread([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "shutting down\n";
    service.stop();
  });
  std::cerr << "comrat service listening on " << addr << '\n';
  service.run();
  // run() also returns when the server fails; wake the signal thread.
  pthread_kill(signal_thread.native_handle(), SIGTERM);
  signal_thread.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Commit message rationale analysis"};
  app.require_subcommand(1);

  ClassifierOptions module_copts;
  std::string url, token_env, cache, out_dir = "comrat-out", module_rate_limit = "abort";
  std::vector<std::string> module_stopwords;
  auto* module_cmd = app.add_subcommand("module", "Analyze the commit history of a GitHub module");
  module_cmd->add_option("--url", url, "GitHub commits API URL with a path query")->required();
  module_cmd->add_option("--token-env", token_env, "Environment variable holding a GitHub token");
  module_cmd->add_option("--cache", cache, "Directory for cached commit histories");
  module_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  module_cmd->add_option("--rate-limit", module_rate_limit, "wait or abort when the API budget runs out")
      ->capture_default_str();
  module_cmd->add_option("--stopwords", module_stopwords, "Extra stop-word file(s), one word per line");
  module_copts.add_to(*module_cmd);

  ClassifierOptions commit_copts;
  std::string file, format = "text";
  double threshold = comrat::kDefaultRationaleThreshold;
  bool strict = false;
  auto* commit_cmd = app.add_subcommand("commit", "Score one commit message (read from --file or stdin)");
  commit_cmd->add_option("--file", file, "Message file; standard input when omitted");
  commit_cmd->add_option("--threshold", threshold, "Rationale density threshold")->capture_default_str();
  commit_cmd->add_option("--format", format, "text or doc (JSON)")->capture_default_str();
  commit_cmd->add_flag("--strict", strict, "Exit 2 when the message has no sentences");
  commit_copts.add_to(*commit_cmd);

  ClassifierOptions serve_copts;
  std::string addr, serve_cache, cors = "*", serve_rate_limit = "abort";
  std::size_t workers = 2, max_jobs = 16;
  std::vector<std::string> serve_stopwords;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--addr", addr, "HOST:PORT (default $COMRAT_ADDR or 127.0.0.1:8080)");
  serve_cmd->add_option("--cache", serve_cache, "Directory for cached commit histories");
  serve_cmd->add_option("--cors-origin", cors, "Access-Control-Allow-Origin value")->capture_default_str();
  serve_cmd->add_option("--workers", workers, "Concurrent module jobs")->capture_default_str()->check(
      CLI::PositiveNumber);
  serve_cmd->add_option("--max-jobs", max_jobs, "Finished jobs kept in memory")->capture_default_str()->check(
      CLI::PositiveNumber);
  serve_cmd->add_option("--rate-limit", serve_rate_limit, "Default rate-limit policy")->capture_default_str();
  serve_cmd->add_option("--stopwords", serve_stopwords, "Extra stop-word file(s)");
  serve_copts.add_to(*serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    const auto parsed = app.get_subcommands();
    std::cerr << '\n' << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  }

  try {
    if (*module_cmd) {
      return run_module(url, token_env, cache, module_copts, out_dir, module_rate_limit, module_stopwords);
    }
    if (*commit_cmd) return run_commit(file, threshold, format, strict, commit_copts);
    if (*serve_cmd) {
      return run_serve(addr, serve_copts, serve_cache, cors, workers, max_jobs, serve_rate_limit, serve_stopwords);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
