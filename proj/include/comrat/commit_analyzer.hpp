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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "comrat/classify.hpp"
#include "comrat/preprocess.hpp"

namespace comrat {

inline constexpr double kDefaultRationaleThreshold = 0.5;

enum class Verdict { kSuccess, kWarning, kEmpty };

std::string_view to_string(Verdict v);

/// Result of scoring one commit message.
struct CommitReport {
  std::vector<LabelledSentence> sentences;
  std::size_t number_of_sentences = 0;
  std::optional<double> rationale_density;  // defined iff number_of_sentences > 0
  std::optional<double> decision_density;
  double threshold = kDefaultRationaleThreshold;
  Verdict verdict = Verdict::kEmpty;
};

/// warning iff density < threshold; density == threshold is a success.
Verdict verdict_for(double rationale_density, double threshold);

/// normalize -> segment -> classify -> densities -> verdict. Classifier
/// errors propagate. Throws std::invalid_argument for a threshold outside [0, 1].
CommitReport analyze_commit_message(std::string_view raw, const ClassifierSpec& spec,
                                    double threshold = kDefaultRationaleThreshold,
                                    const PreprocessConfig& config = PreprocessConfig::defaults());

/// Human-readable rendering (labelled sentences, densities, verdict message).
std::string format_commit_report(const CommitReport& r);
/// Structured document form used by the CLI's --format doc and the service.
std::string commit_report_json(const CommitReport& r);

}  // namespace comrat
