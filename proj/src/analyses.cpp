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

#include "comrat/analyses.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace comrat {

namespace {

#include "builtin_stopwords.inc"

struct Accumulator {
  double sum = 0.0;
  std::size_t n = 0;
};

}  // namespace

std::vector<FactorPoint> factor_size_series(const LabelledDataset& d) {
  std::vector<FactorPoint> out;
  for (const auto& c : d.commits) {
    if (c.sentences.empty()) continue;
    out.push_back({c.commit.sha, c.sentences.size(), rationale_density(c)});
  }
  return out;
}

std::vector<AuthorStat> author_series(const LabelledDataset& d) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::pair<std::size_t, Accumulator>> by_author;
  for (const auto& c : d.commits) {
    auto [it, inserted] = by_author.try_emplace(c.commit.author_id);
    if (inserted) order.push_back(c.commit.author_id);
    auto& [n_commits, acc] = it->second;
    ++n_commits;
    if (!c.sentences.empty()) {
      acc.sum += rationale_density(c);
      ++acc.n;
    }
  }
  std::vector<AuthorStat> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    const auto& [n_commits, acc] = by_author.at(id);
    AuthorStat s{id, n_commits, std::nullopt};
    if (acc.n > 0) s.avg_rationale_density = acc.sum / static_cast<double>(acc.n);
    out.push_back(std::move(s));
  }
  std::stable_sort(out.begin(), out.end(), [](const AuthorStat& a, const AuthorStat& b) {
    if (a.n_commits != b.n_commits) return a.n_commits > b.n_commits;
    return a.author_id < b.author_id;
  });
  return out;
}

std::vector<YearPoint> evolution_series(const LabelledDataset& d) {
  std::map<int, std::pair<Accumulator, Accumulator>> years;
  for (const auto& c : d.commits) {
    if (c.sentences.empty()) continue;
    auto& [rat, dec] = years[utc_year(c.commit.committed_at)];
    rat.sum += rationale_density(c);
    ++rat.n;
    dec.sum += decision_density(c);
    ++dec.n;
  }
  std::vector<YearPoint> out;
  for (const auto& [year, acc] : years) {
    const auto& [rat, dec] = acc;
    out.push_back({year, rat.sum / static_cast<double>(rat.n), dec.sum / static_cast<double>(dec.n), rat.n});
  }
  return out;
}

std::size_t position_bin(std::size_t index, std::size_t total, std::size_t n_bins) {
  // floor(((index + 0.5) / total) * n_bins) in integer arithmetic.
  return std::min(n_bins - 1, ((2 * index + 1) * n_bins) / (2 * total));
}

StructureHistogram structure_histogram(const LabelledDataset& d, std::size_t n_bins) {
  if (n_bins == 0) throw std::invalid_argument("structure histogram needs at least one bin");
  StructureHistogram h;
  h.n_bins = n_bins;
  h.decision.assign(n_bins, 0);
  h.rationale.assign(n_bins, 0);
  h.none.assign(n_bins, 0);
  for (const auto& c : d.commits) {
    const auto total = c.sentences.size();
    for (std::size_t i = 0; i < total; ++i) {
      const auto bin = position_bin(i, total, n_bins);
      const auto& v = c.sentences[i].verdict;
      if (v.decision) ++h.decision[bin];
      if (v.rationale) ++h.rationale[bin];
      if (!v.decision && !v.rationale) ++h.none[bin];
    }
  }
  return h;
}

StopWords StopWords::builtin() { return parse(kBuiltinStopwords); }

StopWords StopWords::parse(std::string_view text) {
  StopWords s;
  s.extend(text);
  return s;
}

void StopWords::extend(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::string w;
    while (words >> w) add(std::move(w));
  }
}

void StopWords::add(std::string word) {
  std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });
  if (!word.empty()) words_.insert(std::move(word));
}

void StopWords::extend_from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read stop-word file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  extend(ss.str());
}

std::vector<std::string> frequency_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const bool digits_only =
        std::all_of(cur.begin(), cur.end(), [](unsigned char c) { return std::isdigit(c); });
    if (cur.size() >= 2 && !digits_only) out.push_back(cur);
    cur.clear();
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      flush();
    }
  }
  if (!cur.empty()) flush();
  return out;
}

WordFrequencies word_frequencies(const LabelledDataset& d, const StopWords& stopwords) {
  std::map<std::string, std::size_t> decision;
  std::map<std::string, std::size_t> rationale;
  for (const auto& c : d.commits) {
    for (const auto& s : c.sentences) {
      if (s.verdict.decision == s.verdict.rationale) continue;
      auto& table = s.verdict.decision ? decision : rationale;
      for (auto& tok : frequency_tokens(s.unit.text)) {
        if (!stopwords.contains(tok)) ++table[std::move(tok)];
      }
    }
  }
  auto sorted = [](const std::map<std::string, std::size_t>& counts) {
    std::vector<WordCount> v(counts.begin(), counts.end());
    std::stable_sort(v.begin(), v.end(), [](const WordCount& a, const WordCount& b) { return a.second > b.second; });
    return v;
  };
  WordFrequencies out;
  out.decision.entries = sorted(decision);
  out.rationale.entries = sorted(rationale);
  return out;
}

}  // namespace comrat
