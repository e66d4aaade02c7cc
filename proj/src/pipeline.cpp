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

#include "comrat/pipeline.hpp"

namespace comrat {

LabelledDataset label_commits(const std::vector<Commit>& commits, const ClassifierSpec& spec,
                              const PreprocessConfig& preprocess_config,
                              const std::function<void(std::size_t, std::size_t)>& progress) {
  std::vector<std::vector<SentenceUnit>> per_commit;
  per_commit.reserve(commits.size());
  std::vector<SentenceUnit> flat;
  for (const auto& c : commits) {
    per_commit.push_back(preprocess(c.message, preprocess_config));
    flat.insert(flat.end(), per_commit.back().begin(), per_commit.back().end());
  }
  const auto total = flat.size();
  if (progress) progress(0, total);
  auto labelled = classify_batch(flat, spec, [&](std::size_t done) {
    if (progress) progress(done, total);
  });

  LabelledDataset d;
  d.classifier = spec.kind_name();
  d.commits.reserve(commits.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < commits.size(); ++i) {
    CommitLabelled c{commits[i], {}};
    const auto n = per_commit[i].size();
    c.sentences.assign(std::make_move_iterator(labelled.begin() + static_cast<long>(next)),
                       std::make_move_iterator(labelled.begin() + static_cast<long>(next + n)));
    next += n;
    d.commits.push_back(std::move(c));
  }
  return d;
}

ModuleAnalysisResult analyze_dataset(LabelledDataset dataset, const ReportOptions& options) {
  ModuleAnalysisResult r;
  r.dataset_csv = export_dataset_csv(dataset);
  r.report = build_report(dataset, options);
  r.report_json = serialize_report(r.report);
  r.dataset = std::move(dataset);
  return r;
}

ModuleAnalysisResult run_module_analysis(const ModuleRef& module, HttpTransport& transport, Clock& clock,
                                         const ModuleAnalysisOptions& options, const ModuleAnalysisHooks& hooks) {
  module.validate();
  options.classifier.validate();
  auto check_cancel = [&] {
    if (hooks.cancelled && hooks.cancelled()) throw Cancelled();
  };

  if (hooks.on_stage) hooks.on_stage(Stage::kFetching);
  FetchOptions fetch_options;
  fetch_options.policy = options.rate_limit;
  fetch_options.on_progress = hooks.on_fetched;
  fetch_options.cancelled = hooks.cancelled;
  CommitFetcher fetcher(transport, clock, fetch_options);
  auto fetched = fetcher.fetch(module);
  check_cancel();

  if (hooks.on_stage) hooks.on_stage(Stage::kClassifying);
  auto dataset = label_commits(fetched.commits, options.classifier, options.preprocess,
                               [&](std::size_t done, std::size_t total) {
                                 if (hooks.on_classified) hooks.on_classified(done, total);
                               });
  dataset.api_url = module.api_url;
  dataset.fetched_at = fetched.fetched_at;
  check_cancel();

  if (hooks.on_stage) hooks.on_stage(Stage::kAnalyzing);
  return analyze_dataset(std::move(dataset), options.report);
}

std::vector<std::filesystem::path> write_outputs(const ModuleAnalysisResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  write_file(dir / kDatasetFileName, result.dataset_csv);
  written.push_back(dir / kDatasetFileName);
  write_file(dir / kReportFileName, result.report_json);
  written.push_back(dir / kReportFileName);
  auto figures = export_figures(result.report, dir);
  written.insert(written.end(), figures.begin(), figures.end());
  return written;
}

}  // namespace comrat
