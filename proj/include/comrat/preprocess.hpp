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
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace comrat {

/// Line-removal rules applied before segmentation.
struct PreprocessConfig {
  /// Trailer keys, compared case-insensitively ("Signed-off-by", ...).
  std::set<std::string> trailer_keys;
  /// Lines starting with one of these (after no trimming) are treated as code.
  std::vector<std::string> code_prefixes;
  /// Lines indented by at least this many columns are treated as code.
  /// A tab counts as four columns.
  int code_indent = 4;

  static PreprocessConfig defaults();

  /// Reads a rule file. Each non-comment line is `trailer: <Key>`,
  /// `code-prefix: <text>` or `code-indent: <n>`. Rules in the file replace
  /// the corresponding default set when at least one rule of that kind is
  /// present. Throws std::runtime_error with the offending line number.
  static PreprocessConfig load(const std::filesystem::path& path);
  static PreprocessConfig parse(std::string_view text);
};

struct SentenceUnit {
  std::string text;
  std::size_t index = 0;
  std::size_t total = 0;

  friend bool operator==(const SentenceUnit&, const SentenceUnit&) = default;
};

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view in);

/// Strips trailers, code-like lines and URL-only lines, then collapses
/// whitespace. Output paragraphs are single lines separated by one blank
/// line; the first kept line always forms its own paragraph (the subject).
std::string normalize_message(std::string_view raw, const PreprocessConfig& config = PreprocessConfig::defaults());

/// Splits normalized text into sentences at . ! ? followed by whitespace or
/// end, and at paragraph breaks. Does not split after single letters, "e.g",
/// "i.e", "etc" or "vs". Fragments without a letter are dropped.
std::vector<SentenceUnit> segment_sentences(std::string_view normalized);

/// normalize_message followed by segment_sentences.
std::vector<SentenceUnit> preprocess(std::string_view raw, const PreprocessConfig& config = PreprocessConfig::defaults());

bool has_alpha(std::string_view s);

}  // namespace comrat
