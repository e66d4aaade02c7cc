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

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "comrat/preprocess.hpp"

namespace comrat {

/// Decision and Rationale are independent binary labels; all four
/// combinations are legal.
struct LabelVerdict {
  bool decision = false;
  bool rationale = false;

  friend bool operator==(const LabelVerdict&, const LabelVerdict&) = default;
};

struct LabelledSentence {
  SentenceUnit unit;
  LabelVerdict verdict;

  friend bool operator==(const LabelledSentence&, const LabelledSentence&) = default;
};

/// Word lists driving the built-in classifier. Multi-word entries match as
/// phrases on word boundaries; all matching is case-insensitive.
struct Lexicon {
  std::set<std::string> decision_verbs;  // base forms; inflections are derived
  std::set<std::string> rationale_cues;
  std::set<std::string> judgment_cues;
  std::set<std::string> negative_outcomes;  // "would <outcome>" counts as rationale
  std::set<std::string> lead_skip;          // leading adverbs/pronouns skipped before the verb

  static const Lexicon& builtin();
  static std::string_view builtin_text();

  /// Sectioned plain text: `[decision]`, `[rationale]`, `[judgment]`,
  /// `[negative-outcome]`, `[skip]` headers, one term per line, `#` comments.
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);
};

enum class ClassifierKind { kBuiltinLexicon, kExternalAdapter };

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::kBuiltinLexicon;
  std::optional<std::string> adapter_command;  // run through /bin/sh -c
  std::optional<std::filesystem::path> lexicon_path;
  std::chrono::milliseconds per_sentence_timeout{10000};

  static ClassifierSpec lexicon(std::optional<std::filesystem::path> path = std::nullopt);
  static ClassifierSpec adapter(std::string command);

  /// Parses the CLI form: "lexicon" or "adapter:<cmd>".
  static ClassifierSpec from_string(std::string_view text);
  std::string kind_name() const;

  /// Throws std::invalid_argument when the kind/command combination is invalid.
  void validate() const;
};

class ClassifierError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInput : public ClassifierError {
 public:
  EmptyInput() : ClassifierError("cannot classify an empty sentence") {}
};

/// The adapter exited (or closed its output) before answering every request.
class AdapterCrashed : public ClassifierError {
 public:
  AdapterCrashed(std::string what, std::vector<LabelVerdict> partial)
      : ClassifierError(std::move(what)), partial_(std::move(partial)) {}
  const std::vector<LabelVerdict>& partial() const { return partial_; }

 private:
  std::vector<LabelVerdict> partial_;
};

class AdapterProtocolError : public ClassifierError {
 public:
  using ClassifierError::ClassifierError;
};

class AdapterTimeout : public ClassifierError {
 public:
  using ClassifierError::ClassifierError;
};

/// Lexicon baseline on a single sentence.
LabelVerdict classify_with_lexicon(std::string_view text, const Lexicon& lexicon);

/// Single-sentence entry point. Throws EmptyInput on blank text.
LabelVerdict classify_sentence(std::string_view text, const ClassifierSpec& spec);

using ClassifyProgress = std::function<void(std::size_t done)>;

/// Labels every sentence, preserving order and length. With an external
/// adapter, one child process serves the whole batch.
std::vector<LabelledSentence> classify_batch(const std::vector<SentenceUnit>& sentences, const ClassifierSpec& spec,
                                             const ClassifyProgress& progress = {});

/// True when the adapter command's program can be found (absolute/relative
/// path or PATH lookup). Used as a startup preflight.
bool adapter_command_available(const std::string& command);

/// Lowercased word tokens: runs of ASCII alphanumerics, apostrophes inside
/// words, and non-ASCII bytes.
std::vector<std::string> word_tokens(std::string_view text);

}  // namespace comrat
