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

#include "comrat/commit_analyzer.hpp"

#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "comrat/metrics.hpp"

namespace comrat {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kSuccess: return "success";
    case Verdict::kWarning: return "warning";
    case Verdict::kEmpty: return "empty";
  }
  return "empty";
}

Verdict verdict_for(double rationale_density, double threshold) {
  return rationale_density < threshold ? Verdict::kWarning : Verdict::kSuccess;
}

CommitReport analyze_commit_message(std::string_view raw, const ClassifierSpec& spec, double threshold,
                                    const PreprocessConfig& config) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in [0, 1]");
  CommitReport r;
  r.threshold = threshold;
  r.sentences = classify_batch(preprocess(raw, config), spec);
  r.number_of_sentences = r.sentences.size();
  if (r.sentences.empty()) return r;
  r.rationale_density = rationale_density(r.sentences);
  r.decision_density = decision_density(r.sentences);
  r.verdict = verdict_for(*r.rationale_density, threshold);
  return r;
}

std::string format_commit_report(const CommitReport& r) {
  std::string out;
  for (const auto& s : r.sentences) {
    std::string tags;
    if (s.verdict.decision) tags += "[Decision]";
    if (s.verdict.rationale) tags += "[Rationale]";
    if (tags.empty()) tags = "[-]";
    out += fmt::format("{:>3}. {} {}\n", s.unit.index + 1, tags, s.unit.text);
  }
  if (!r.sentences.empty()) out += '\n';
  out += fmt::format("number_of_sentences: {}\n", r.number_of_sentences);
  out += fmt::format("rationale_density: {}\n", r.rationale_density ? format_ratio(*r.rationale_density) : "n/a");
  out += fmt::format("decision_density: {}\n", r.decision_density ? format_ratio(*r.decision_density) : "n/a");
  switch (r.verdict) {
    case Verdict::kSuccess:
      out += fmt::format("success: rationale density is at or above the {} threshold\n", format_ratio(r.threshold));
      break;
    case Verdict::kWarning:
      out += fmt::format("warning: rationale density is below the {} threshold; consider explaining why the change "
                         "is needed\n",
                         format_ratio(r.threshold));
      break;
    case Verdict::kEmpty:
      out += "empty: the message has no sentences to analyze\n";
      break;
  }
  return out;
}

std::string commit_report_json(const CommitReport& r) {
  nlohmann::ordered_json doc;
  auto sentences = nlohmann::ordered_json::array();
  for (const auto& s : r.sentences) {
    sentences.push_back({{"index", s.unit.index},
                         {"text", s.unit.text},
                         {"decision", s.verdict.decision},
                         {"rationale", s.verdict.rationale}});
  }
  doc["sentences"] = std::move(sentences);
  doc["number_of_sentences"] = r.number_of_sentences;
  doc["rationale_density"] = r.rationale_density ? nlohmann::ordered_json(*r.rationale_density) : nullptr;
  doc["decision_density"] = r.decision_density ? nlohmann::ordered_json(*r.decision_density) : nullptr;
  doc["threshold"] = r.threshold;
  doc["verdict"] = std::string(to_string(r.verdict));
  return doc.dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n";
}

}  // namespace comrat
