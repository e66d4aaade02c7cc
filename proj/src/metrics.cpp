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

#include "comrat/metrics.hpp"

#include <fmt/format.h>

namespace comrat {

namespace {

template <typename Pred>
double fraction(const std::vector<LabelledSentence>& sentences, Pred pred, const std::string& sha) {
  if (sentences.empty()) throw ZeroSentences(sha);
  std::size_t hits = 0;
  for (const auto& s : sentences) hits += pred(s.verdict) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(sentences.size());
}

}  // namespace

std::size_t LabelledDataset::sentence_count() const {
  std::size_t n = 0;
  for (const auto& c : commits) n += c.sentences.size();
  return n;
}

double rationale_density(const std::vector<LabelledSentence>& sentences) {
  return fraction(sentences, [](const LabelVerdict& v) { return v.rationale; }, "<message>");
}

double decision_density(const std::vector<LabelledSentence>& sentences) {
  return fraction(sentences, [](const LabelVerdict& v) { return v.decision; }, "<message>");
}

double rationale_density(const CommitLabelled& c) {
  return fraction(c.sentences, [](const LabelVerdict& v) { return v.rationale; }, c.commit.sha);
}

double decision_density(const CommitLabelled& c) {
  return fraction(c.sentences, [](const LabelVerdict& v) { return v.decision; }, c.commit.sha);
}

bool contains_rationale(const CommitLabelled& c) {
  for (const auto& s : c.sentences) {
    if (s.verdict.rationale) return true;
  }
  return false;
}

PresenceMetrics presence_metrics(const LabelledDataset& d) {
  PresenceMetrics m;
  m.n_commits = d.commits.size();
  double density_sum = 0.0;
  for (const auto& c : d.commits) {
    if (!contains_rationale(c)) continue;
    ++m.n_commits_with_rationale;
    density_sum += rationale_density(c);
  }
  if (m.n_commits > 0) {
    m.rationale_percentage =
        100.0 * static_cast<double>(m.n_commits_with_rationale) / static_cast<double>(m.n_commits);
  }
  if (m.n_commits_with_rationale > 0) {
    m.average_rationale_density = density_sum / static_cast<double>(m.n_commits_with_rationale);
  }
  return m;
}

LabelDistribution label_distribution(const LabelledDataset& d) {
  LabelDistribution out;
  for (const auto& c : d.commits) {
    for (const auto& s : c.sentences) {
      const auto& v = s.verdict;
      if (v.decision && v.rationale) {
        ++out.both;
      } else if (v.decision) {
        ++out.decision_only;
      } else if (v.rationale) {
        ++out.rationale_only;
      } else {
        ++out.neither;
      }
      ++out.total;
    }
  }
  return out;
}

std::string format_percentage(double percent) { return fmt::format("{:.2f}%", percent); }

std::string format_ratio(double ratio) { return fmt::format("{:.2f}", ratio); }

}  // namespace comrat
