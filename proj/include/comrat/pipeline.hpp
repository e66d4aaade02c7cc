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

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "comrat/classify.hpp"
#include "comrat/ingest.hpp"
#include "comrat/metrics.hpp"
#include "comrat/preprocess.hpp"
#include "comrat/report.hpp"

namespace comrat {

/// The module-analysis workflow shared by the CLI and the service:
/// fetch -> preprocess -> classify -> analyze.

enum class Stage { kFetching, kClassifying, kAnalyzing };

struct ModuleAnalysisOptions {
  ClassifierSpec classifier;
  PreprocessConfig preprocess = PreprocessConfig::defaults();
  ReportOptions report;
  RateLimitPolicy rate_limit = RateLimitPolicy::kAbort;
};

struct ModuleAnalysisHooks {
  std::function<void(Stage)> on_stage;
  std::function<void(std::size_t fetched)> on_fetched;
  /// Called once with (0, total) when classification starts, then per sentence.
  std::function<void(std::size_t done, std::size_t total)> on_classified;
  std::function<bool()> cancelled;
};

struct ModuleAnalysisResult {
  LabelledDataset dataset;
  AnalysisReport report;
  std::string dataset_csv;
  std::string report_json;
};

/// Preprocesses and labels every commit, one classifier batch for the whole
/// history. Commits that preprocess to nothing are kept with no sentences.
LabelledDataset label_commits(const std::vector<Commit>& commits, const ClassifierSpec& spec,
                              const PreprocessConfig& preprocess = PreprocessConfig::defaults(),
                              const std::function<void(std::size_t, std::size_t)>& progress = {});

/// Builds report, CSV and serialized report from a labelled dataset.
ModuleAnalysisResult analyze_dataset(LabelledDataset dataset, const ReportOptions& options = {});

ModuleAnalysisResult run_module_analysis(const ModuleRef& module, HttpTransport& transport, Clock& clock,
                                         const ModuleAnalysisOptions& options, const ModuleAnalysisHooks& hooks = {});

/// Writes dataset.csv, report.json and the figure files into `dir`.
std::vector<std::filesystem::path> write_outputs(const ModuleAnalysisResult& result, const std::filesystem::path& dir);

}  // namespace comrat
