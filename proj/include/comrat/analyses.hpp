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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "comrat/metrics.hpp"

namespace comrat {

// Impact factors: message size and author experience.

struct FactorPoint {
  std::string commit_sha;
  std::size_t size = 0;  // sentences
  double rationale_density = 0.0;

  friend bool operator==(const FactorPoint&, const FactorPoint&) = default;
};

struct AuthorStat {
  std::string author_id;
  std::size_t n_commits = 0;
  std::optional<double> avg_rationale_density;  // null when every commit had zero sentences

  friend bool operator==(const AuthorStat&, const AuthorStat&) = default;
};

/// One point per commit with at least one sentence, in commit order.
std::vector<FactorPoint> factor_size_series(const LabelledDataset& d);

/// One entry per author_id, sorted by n_commits descending then author_id.
/// n_commits counts every commit; the average only density-defined ones.
std::vector<AuthorStat> author_series(const LabelledDataset& d);

// Evolution.

struct YearPoint {
  int year = 0;
  double avg_rationale_density = 0.0;
  double avg_decision_density = 0.0;
  std::size_t n_commits = 0;

  friend bool operator==(const YearPoint&, const YearPoint&) = default;
};

/// Per UTC calendar year, averages over every commit of that year with at
/// least one sentence (not only rationale-containing ones). Ascending years.
std::vector<YearPoint> evolution_series(const LabelledDataset& d);

// Structure.

struct StructureHistogram {
  std::size_t n_bins = 10;
  std::vector<std::size_t> decision;
  std::vector<std::size_t> rationale;
  std::vector<std::size_t> none;

  friend bool operator==(const StructureHistogram&, const StructureHistogram&) = default;
};

/// Bin index of a sentence at normalized position (index + 0.5) / total.
std::size_t position_bin(std::size_t index, std::size_t total, std::size_t n_bins);

/// Throws std::invalid_argument when n_bins == 0.
StructureHistogram structure_histogram(const LabelledDataset& d, std::size_t n_bins = 10);

// Word frequencies.

using WordCount = std::pair<std::string, std::size_t>;

struct WordFrequencyTable {
  std::string category;  // "decision" or "rationale"
  std::vector<WordCount> entries;  // count desc, then word asc

  friend bool operator==(const WordFrequencyTable&, const WordFrequencyTable&) = default;
};

struct WordFrequencies {
  WordFrequencyTable decision{"decision", {}};
  WordFrequencyTable rationale{"rationale", {}};
};

class StopWords {
 public:
  /// The built-in English list.
  static StopWords builtin();
  static StopWords parse(std::string_view text);

  /// Adds words from a plain-text file (one per line, # comments).
  void extend_from_file(const std::filesystem::path& path);
  void extend(std::string_view text);
  void add(std::string word);

  bool contains(const std::string& word) const { return words_.count(word) > 0; }
  const std::set<std::string>& words() const { return words_; }

 private:
  std::set<std::string> words_;
};

/// Lowercases and splits on ASCII non-alphanumerics; drops tokens shorter
/// than two characters and digit-only tokens.
std::vector<std::string> frequency_tokens(std::string_view text);

/// Tables over Decision-only and Rationale-only sentences. Sentences with
/// both labels or neither contribute nothing.
WordFrequencies word_frequencies(const LabelledDataset& d, const StopWords& stopwords);

}  // namespace comrat
