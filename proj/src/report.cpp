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

#include "comrat/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

namespace comrat {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::string_view kCsvHeader =
    "commit_sha,commit_date,author_id,sentence_index,sentence_count,sentence_text,decision,rationale";
const std::vector<std::string> kCsvColumns{"commit_sha",     "commit_date",   "author_id", "sentence_index",
                                           "sentence_count", "sentence_text", "decision",  "rationale"};

void append_field(std::string& out, std::string_view field) {
  const bool quote = field.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!quote) {
    out += field;
    return;
  }
  out += '"';
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_row(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    append_field(out, fields[i]);
  }
  out += "\r\n";
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& s, std::size_t line, const char* column) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw SchemaError(fmt::format("line {}: {} must be true or false, got '{}'", line, column, s));
}

std::size_t parse_count(const std::string& s, std::size_t line, const char* column) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }) ||
      s.size() > 18) {
    throw SchemaError(fmt::format("line {}: {} must be a non-negative integer, got '{}'", line, column, s));
  }
  return static_cast<std::size_t>(std::stoull(s));
}

ojson optional_number(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::optional<double> read_optional_number(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_number()) throw SchemaError("expected number or null");
  return j.get<double>();
}

std::string digest_of(std::string_view csv) { return fmt::format("fnv1a64:{:016x}", fnv1a64(csv)); }

std::vector<WordCount> top_entries(const std::vector<WordCount>& all, std::size_t n) {
  return {all.begin(), all.begin() + static_cast<long>(std::min(n, all.size()))};
}

ojson words_json(const WordFrequencyTable& t) {
  auto arr = ojson::array();
  for (const auto& [word, count] : t.entries) arr.push_back({{"word", word}, {"count", count}});
  return arr;
}

}  // namespace

CsvParseError::CsvParseError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("CSV line {}: {}", line, what)), line_(line) {}

std::string export_dataset_csv(const LabelledDataset& d) {
  std::string out(kCsvHeader);
  out += "\r\n";
  for (const auto& c : d.commits) {
    const auto date = format_iso8601(c.commit.committed_at);
    if (c.sentences.empty()) {
      append_row(out, {c.commit.sha, date, c.commit.author_id, "", "0", "", "", ""});
      continue;
    }
    for (const auto& s : c.sentences) {
      append_row(out, {c.commit.sha, date, c.commit.author_id, std::to_string(s.unit.index),
                       std::to_string(c.sentences.size()), s.unit.text, bool_text(s.verdict.decision),
                       bool_text(s.verdict.rationale)});
    }
  }
  return out;
}

namespace {

struct CsvRecord {
  std::size_t line = 0;  // 1-based line on which the record starts
  std::vector<std::string> fields;
};

std::vector<CsvRecord> parse_records(std::string_view bytes) {
  std::vector<CsvRecord> rows;
  std::vector<std::string> row;
  std::string field;
  std::size_t line = 1;
  std::size_t row_line = 1;
  std::size_t i = 0;
  bool row_open = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    rows.push_back({row_line, std::move(row)});
    row.clear();
    row_open = false;
  };
  while (i < bytes.size()) {
    if (!row_open) row_line = line;
    row_open = true;
    if (bytes[i] == '"' && field.empty()) {
      const std::size_t start_line = line;
      ++i;
      while (true) {
        if (i >= bytes.size()) throw CsvParseError(start_line, "unterminated quoted field");
        const char c = bytes[i];
        if (c == '"') {
          if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (c == '\n') ++line;
        field += c;
        ++i;
      }
      if (i < bytes.size() && bytes[i] != ',' && bytes[i] != '\r' && bytes[i] != '\n') {
        throw CsvParseError(line, "unexpected character after closing quote");
      }
      continue;
    }
    const char c = bytes[i];
    if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_row();
      if (c == '\r' && i + 1 < bytes.size() && bytes[i + 1] == '\n') ++i;
      ++i;
      ++line;
    } else if (c == '"') {
      throw CsvParseError(line, "quote inside unquoted field");
    } else {
      field += c;
      ++i;
    }
  }
  if (row_open) end_row();
  return rows;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view bytes) {
  std::vector<std::vector<std::string>> out;
  for (auto& rec : parse_records(bytes)) out.push_back(std::move(rec.fields));
  return out;
}

LabelledDataset import_dataset_csv(std::string_view bytes) {
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  const auto rows = parse_records(bytes);
  if (rows.empty()) throw SchemaError("CSV has no header row");
  std::vector<std::size_t> col(kCsvColumns.size());
  const auto& header = rows.front().fields;
  for (std::size_t k = 0; k < kCsvColumns.size(); ++k) {
    const auto it = std::find(header.begin(), header.end(), kCsvColumns[k]);
    if (it == header.end()) throw SchemaError("CSV is missing column " + kCsvColumns[k]);
    col[k] = static_cast<std::size_t>(it - header.begin());
  }

  LabelledDataset d;
  d.classifier = "imported";
  std::unordered_set<std::string> finished;
  CommitLabelled* current = nullptr;
  std::size_t expected_count = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r].fields;
    const std::size_t line = rows[r].line;
    if (row.size() != header.size()) {
      throw CsvParseError(line, fmt::format("expected {} fields, found {}", header.size(), row.size()));
    }
    const auto& sha = row[col[0]];
    if (sha.empty()) throw SchemaError(fmt::format("line {}: empty commit_sha", line));
    const auto ts = parse_iso8601(row[col[1]]);
    if (!ts) throw SchemaError(fmt::format("line {}: bad commit_date '{}'", line, row[col[1]]));
    const auto count = parse_count(row[col[4]], line, "sentence_count");

    if (!current || current->commit.sha != sha) {
      if (current && current->sentences.size() != expected_count) {
        throw SchemaError(fmt::format("line {}: commit {} ended after {} of {} sentences", line,
                                      current->commit.sha, current->sentences.size(), expected_count));
      }
      if (current) finished.insert(current->commit.sha);
      if (finished.count(sha)) throw SchemaError(fmt::format("line {}: rows of commit {} are not contiguous", line, sha));
      CommitLabelled c;
      c.commit.sha = sha;
      c.commit.committed_at = *ts;
      c.commit.author_id = row[col[2]];
      c.commit.author_name = row[col[2]];
      d.commits.push_back(std::move(c));
      current = &d.commits.back();
      expected_count = count;
      if (count == 0) {
        if (!row[col[3]].empty() || !row[col[5]].empty() || !row[col[6]].empty() || !row[col[7]].empty()) {
          throw SchemaError(fmt::format("line {}: zero-sentence row must leave index, text and labels empty", line));
        }
        continue;
      }
    } else if (expected_count == 0) {
      throw SchemaError(fmt::format("line {}: extra row for zero-sentence commit {}", line, sha));
    }
    if (count != expected_count) {
      throw SchemaError(fmt::format("line {}: sentence_count changes within commit {}", line, sha));
    }
    if (*ts != current->commit.committed_at || row[col[2]] != current->commit.author_id) {
      throw SchemaError(fmt::format("line {}: commit_date/author_id change within commit {}", line, sha));
    }
    const auto index = parse_count(row[col[3]], line, "sentence_index");
    if (index != current->sentences.size() || index >= count) {
      throw SchemaError(fmt::format("line {}: sentence_index {} out of sequence", line, index));
    }
    const auto& text = row[col[5]];
    if (!has_alpha(text)) throw SchemaError(fmt::format("line {}: sentence_text has no letters", line));
    LabelledSentence s;
    s.unit = {text, index, count};
    s.verdict.decision = parse_bool(row[col[6]], line, "decision");
    s.verdict.rationale = parse_bool(row[col[7]], line, "rationale");
    current->sentences.push_back(std::move(s));
  }
  if (current && current->sentences.size() != expected_count) {
    throw SchemaError(fmt::format("commit {} ended after {} of {} sentences", current->commit.sha,
                                  current->sentences.size(), expected_count));
  }
  return d;
}

AnalysisReport build_report(const LabelledDataset& d, const ReportOptions& options) {
  AnalysisReport r;
  r.metadata.api_url = d.api_url;
  r.metadata.fetched_at = d.fetched_at;
  r.metadata.classifier = d.classifier;
  r.metadata.n_commits = d.commits.size();
  r.metadata.n_sentences = d.sentence_count();
  r.metadata.dataset_digest = digest_of(export_dataset_csv(d));
  r.distribution = label_distribution(d);
  r.presence = presence_metrics(d);
  r.size_series = factor_size_series(d);
  r.author_series = author_series(d);
  r.evolution = evolution_series(d);
  r.structure = structure_histogram(d, options.n_bins);
  const auto words = word_frequencies(d, options.stopwords);
  r.decision_words = {"decision", top_entries(words.decision.entries, options.top_words)};
  r.rationale_words = {"rationale", top_entries(words.rationale.entries, options.top_words)};
  return r;
}

std::string serialize_report(const AnalysisReport& r) {
  ojson doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["metadata"] = {
      {"api_url", r.metadata.api_url},
      {"fetched_at", r.metadata.fetched_at ? ojson(format_iso8601(*r.metadata.fetched_at)) : ojson(nullptr)},
      {"classifier", r.metadata.classifier},
      {"n_commits", r.metadata.n_commits},
      {"n_sentences", r.metadata.n_sentences},
      {"dataset_file", r.metadata.dataset_file},
      {"dataset_digest", r.metadata.dataset_digest},
  };
  doc["distribution"] = {{"decision_only", r.distribution.decision_only},
                         {"rationale_only", r.distribution.rationale_only},
                         {"both", r.distribution.both},
                         {"neither", r.distribution.neither},
                         {"total", r.distribution.total}};
  doc["presence"] = {{"n_commits", r.presence.n_commits},
                     {"n_commits_with_rationale", r.presence.n_commits_with_rationale},
                     {"rationale_percentage", optional_number(r.presence.rationale_percentage)},
                     {"average_rationale_density", optional_number(r.presence.average_rationale_density)},
                     {"average_density_denominator", "commits_with_rationale"}};
  auto size_series = ojson::array();
  for (const auto& p : r.size_series) {
    size_series.push_back({{"commit_sha", p.commit_sha}, {"size", p.size}, {"rationale_density", p.rationale_density}});
  }
  auto authors = ojson::array();
  for (const auto& a : r.author_series) {
    authors.push_back({{"author_id", a.author_id},
                       {"n_commits", a.n_commits},
                       {"avg_rationale_density", optional_number(a.avg_rationale_density)}});
  }
  doc["factors"] = {{"size_series", std::move(size_series)}, {"author_series", std::move(authors)}};
  auto years = ojson::array();
  for (const auto& y : r.evolution) {
    years.push_back({{"year", y.year},
                     {"avg_rationale_density", y.avg_rationale_density},
                     {"avg_decision_density", y.avg_decision_density},
                     {"n_commits", y.n_commits}});
  }
  doc["evolution"] = {{"average_denominator", "commits_with_sentences"}, {"series", std::move(years)}};
  doc["structure"] = {{"n_bins", r.structure.n_bins},
                      {"position", "(index+0.5)/total"},
                      {"decision", r.structure.decision},
                      {"rationale", r.structure.rationale},
                      {"none", r.structure.none}};
  doc["word_frequencies"] = {{"top_n", kReportTopWords},
                             {"decision", words_json(r.decision_words)},
                             {"rationale", words_json(r.rationale_words)}};
  return doc.dump(2, ' ', false, ojson::error_handler_t::replace) + "\n";
}

AnalysisReport parse_report(std::string_view json_text) {
  ojson doc;
  try {
    doc = ojson::parse(json_text);
  } catch (const ojson::parse_error& e) {
    throw SchemaError(std::string("report is not valid JSON: ") + e.what());
  }
  AnalysisReport r;
  try {
    if (doc.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw SchemaError("unsupported report schema_version " + doc.at("schema_version").dump());
    }
    const auto& m = doc.at("metadata");
    r.metadata.api_url = m.at("api_url").get<std::string>();
    if (!m.at("fetched_at").is_null()) {
      r.metadata.fetched_at = parse_iso8601(m.at("fetched_at").get<std::string>());
      if (!r.metadata.fetched_at) throw SchemaError("bad metadata.fetched_at");
    }
    r.metadata.classifier = m.at("classifier").get<std::string>();
    r.metadata.n_commits = m.at("n_commits").get<std::size_t>();
    r.metadata.n_sentences = m.at("n_sentences").get<std::size_t>();
    r.metadata.dataset_file = m.at("dataset_file").get<std::string>();
    r.metadata.dataset_digest = m.at("dataset_digest").get<std::string>();

    const auto& dist = doc.at("distribution");
    r.distribution = {dist.at("decision_only").get<std::size_t>(), dist.at("rationale_only").get<std::size_t>(),
                      dist.at("both").get<std::size_t>(), dist.at("neither").get<std::size_t>(),
                      dist.at("total").get<std::size_t>()};

    const auto& p = doc.at("presence");
    r.presence.n_commits = p.at("n_commits").get<std::size_t>();
    r.presence.n_commits_with_rationale = p.at("n_commits_with_rationale").get<std::size_t>();
    r.presence.rationale_percentage = read_optional_number(p.at("rationale_percentage"));
    r.presence.average_rationale_density = read_optional_number(p.at("average_rationale_density"));

    for (const auto& pt : doc.at("factors").at("size_series")) {
      r.size_series.push_back({pt.at("commit_sha").get<std::string>(), pt.at("size").get<std::size_t>(),
                               pt.at("rationale_density").get<double>()});
    }
    for (const auto& a : doc.at("factors").at("author_series")) {
      r.author_series.push_back({a.at("author_id").get<std::string>(), a.at("n_commits").get<std::size_t>(),
                                 read_optional_number(a.at("avg_rationale_density"))});
    }
    for (const auto& y : doc.at("evolution").at("series")) {
      r.evolution.push_back({y.at("year").get<int>(), y.at("avg_rationale_density").get<double>(),
                             y.at("avg_decision_density").get<double>(), y.at("n_commits").get<std::size_t>()});
    }
    const auto& s = doc.at("structure");
    r.structure.n_bins = s.at("n_bins").get<std::size_t>();
    r.structure.decision = s.at("decision").get<std::vector<std::size_t>>();
    r.structure.rationale = s.at("rationale").get<std::vector<std::size_t>>();
    r.structure.none = s.at("none").get<std::vector<std::size_t>>();
    const auto& w = doc.at("word_frequencies");
    for (const auto& e : w.at("decision")) {
      r.decision_words.entries.emplace_back(e.at("word").get<std::string>(), e.at("count").get<std::size_t>());
    }
    for (const auto& e : w.at("rationale")) {
      r.rationale_words.entries.emplace_back(e.at("word").get<std::string>(), e.at("count").get<std::size_t>());
    }
  } catch (const ojson::exception& e) {
    throw SchemaError(std::string("report does not match schema: ") + e.what());
  }
  return r;
}

std::string format_presence_block(const PresenceMetrics& p) {
  std::string out;
  out += fmt::format("Total Number of commits: {}\n", p.n_commits);
  out += fmt::format("Number of commits that contain rationale: {}\n", p.n_commits_with_rationale);
  out += fmt::format("Rationale Percentage: {}\n",
                     p.rationale_percentage ? format_percentage(*p.rationale_percentage) : "n/a");
  out += fmt::format("Average Rationale Density: {}\n",
                     p.average_rationale_density ? format_ratio(*p.average_rationale_density) : "n/a");
  return out;
}

std::string format_summary(const AnalysisReport& r) {
  constexpr std::size_t kShownWords = 10;
  constexpr std::size_t kShownAuthors = 10;
  std::string out;
  out += "Resulting dataset:\n\n";
  out += fmt::format("Number of commits: {}\n", r.metadata.n_commits);
  out += fmt::format("Number of sentences: {}\n\n", r.metadata.n_sentences);

  out += "Distribution\n";
  out += fmt::format("Decision only sentences: {}\n", r.distribution.decision_only);
  out += fmt::format("Rationale only sentences: {}\n", r.distribution.rationale_only);
  out += fmt::format("Decision & Rationale sentences: {}\n", r.distribution.both);
  out += fmt::format("No Decision and No Rationale sentences: {}\n\n", r.distribution.neither);

  out += "Word Frequencies\n";
  for (const auto* table : {&r.decision_words, &r.rationale_words}) {
    out += table->category == "decision" ? "Decision:" : "Rationale:";
    if (table->entries.empty()) out += " (none)";
    for (std::size_t i = 0; i < table->entries.size() && i < kShownWords; ++i) {
      out += fmt::format("{} {} ({})", i ? "," : "", table->entries[i].first, table->entries[i].second);
    }
    out += '\n';
  }
  out += '\n';

  out += "Rationale Presence\n";
  out += format_presence_block(r.presence);
  out += '\n';

  out += "Rationale Factors\n";
  out += fmt::format("Commits with sentences: {}\n", r.size_series.size());
  out += fmt::format("Authors: {}\n", r.author_series.size());
  for (std::size_t i = 0; i < r.author_series.size() && i < kShownAuthors; ++i) {
    const auto& a = r.author_series[i];
    out += fmt::format("  {}: {} commits, average rationale density {}\n", a.author_id, a.n_commits,
                       a.avg_rationale_density ? format_ratio(*a.avg_rationale_density) : "n/a");
  }
  out += '\n';

  out += "Commit Message Structure\n";
  out += "Position bin:  Decision Rationale None\n";
  for (std::size_t b = 0; b < r.structure.n_bins; ++b) {
    out += fmt::format("  [{:.2f},{:.2f}): {} {} {}\n", static_cast<double>(b) / r.structure.n_bins,
                       static_cast<double>(b + 1) / r.structure.n_bins, r.structure.decision[b],
                       r.structure.rationale[b], r.structure.none[b]);
  }
  out += '\n';

  out += "Rationale Evolution\n";
  if (r.evolution.empty()) out += "  (no data)\n";
  for (const auto& y : r.evolution) {
    out += fmt::format("  {}: rationale density {}, decision density {} ({} commits)\n", y.year,
                       format_ratio(y.avg_rationale_density), format_ratio(y.avg_decision_density), y.n_commits);
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace comrat
