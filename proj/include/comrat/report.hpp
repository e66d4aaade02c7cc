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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "comrat/analyses.hpp"
#include "comrat/metrics.hpp"

namespace comrat {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::size_t kReportTopWords = 50;
inline constexpr std::string_view kDatasetFileName = "dataset.csv";
inline constexpr std::string_view kReportFileName = "report.json";

// ---------------------------------------------------------------------------
// Dataset CSV
//
// RFC 4180, UTF-8, CRLF row terminators. Header:
//   commit_sha,commit_date,author_id,sentence_index,sentence_count,
//   sentence_text,decision,rationale
// One row per sentence. A commit with no sentences is written as a single
// row with sentence_count 0 and empty index/text/label fields so that it
// survives a round trip.
// ---------------------------------------------------------------------------

class CsvParseError : public std::runtime_error {
 public:
  CsvParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string export_dataset_csv(const LabelledDataset& d);
LabelledDataset import_dataset_csv(std::string_view bytes);

/// Parses RFC 4180 text into records. Exposed for tests and tooling.
std::vector<std::vector<std::string>> parse_csv(std::string_view bytes);

// ---------------------------------------------------------------------------
// Analysis report
// ---------------------------------------------------------------------------

struct ReportMetadata {
  std::string api_url;
  std::optional<Timestamp> fetched_at;
  std::string classifier;
  std::size_t n_commits = 0;
  std::size_t n_sentences = 0;
  std::string dataset_file{kDatasetFileName};
  std::string dataset_digest;  // "fnv1a64:<16 hex>" over the exported CSV bytes

  friend bool operator==(const ReportMetadata&, const ReportMetadata&) = default;
};

struct AnalysisReport {
  ReportMetadata metadata;
  LabelDistribution distribution;
  PresenceMetrics presence;
  std::vector<FactorPoint> size_series;
  std::vector<AuthorStat> author_series;
  std::vector<YearPoint> evolution;
  StructureHistogram structure;
  WordFrequencyTable decision_words{"decision", {}};   // top kReportTopWords
  WordFrequencyTable rationale_words{"rationale", {}};

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

struct ReportOptions {
  StopWords stopwords = StopWords::builtin();
  std::size_t n_bins = 10;
  std::size_t top_words = kReportTopWords;
};

AnalysisReport build_report(const LabelledDataset& d, const ReportOptions& options = {});

/// Single JSON document, fixed key order, schema_version first.
std::string serialize_report(const AnalysisReport& r);
/// Inverse of serialize_report. Throws SchemaError on shape mismatches.
AnalysisReport parse_report(std::string_view json_text);

/// The plain-text summary printed by the CLI, laid out in the order
/// Distribution, Word Frequencies, Rationale Presence, Rationale Factors,
/// Commit Message Structure, Rationale Evolution.
std::string format_summary(const AnalysisReport& r);

/// Presence block alone ("Total Number of commits: ...").
std::string format_presence_block(const PresenceMetrics& p);

// ---------------------------------------------------------------------------
// Figures (SVG)
// ---------------------------------------------------------------------------

/// File name -> SVG text, one per analysis family. Deterministic.
std::map<std::string, std::string> render_figures(const AnalysisReport& r);

/// Writes render_figures() into `dir`; returns the written paths.
std::vector<std::filesystem::path> export_figures(const AnalysisReport& r, const std::filesystem::path& dir);

void write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace comrat
