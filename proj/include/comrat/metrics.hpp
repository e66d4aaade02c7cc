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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "comrat/classify.hpp"
#include "comrat/ingest.hpp"

namespace comrat {

struct CommitLabelled {
  Commit commit;
  std::vector<LabelledSentence> sentences;
};

/// All labelled sentences of one module, grouped by commit in fetch order.
/// Holds the module URL but never its token.
struct LabelledDataset {
  std::string api_url;
  std::optional<Timestamp> fetched_at;
  std::string classifier = "lexicon";
  std::vector<CommitLabelled> commits;

  std::size_t sentence_count() const;
};

class ZeroSentences : public std::domain_error {
 public:
  explicit ZeroSentences(const std::string& sha)
      : std::domain_error("commit " + sha + " has no sentences; density is undefined") {}
};

/// Fraction of the commit's sentences labelled Rationale (multi-labelled
/// sentences included). Throws ZeroSentences.
double rationale_density(const CommitLabelled& c);
/// Fraction of the commit's sentences labelled Decision. Throws ZeroSentences.
double decision_density(const CommitLabelled& c);

double rationale_density(const std::vector<LabelledSentence>& sentences);
double decision_density(const std::vector<LabelledSentence>& sentences);

bool contains_rationale(const CommitLabelled& c);

struct PresenceMetrics {
  std::size_t n_commits = 0;
  std::size_t n_commits_with_rationale = 0;
  std::optional<double> rationale_percentage;       // [0, 100]; null for an empty dataset
  std::optional<double> average_rationale_density;  // over rationale-containing commits; null when none

  friend bool operator==(const PresenceMetrics&, const PresenceMetrics&) = default;
};

PresenceMetrics presence_metrics(const LabelledDataset& d);

struct LabelDistribution {
  std::size_t decision_only = 0;
  std::size_t rationale_only = 0;
  std::size_t both = 0;
  std::size_t neither = 0;
  std::size_t total = 0;

  friend bool operator==(const LabelDistribution&, const LabelDistribution&) = default;
};

LabelDistribution label_distribution(const LabelledDataset& d);

/// "84.93%" style rendering, two decimals.
std::string format_percentage(double percent);
/// "0.56" style rendering, two decimals.
std::string format_ratio(double ratio);

}  // namespace comrat
