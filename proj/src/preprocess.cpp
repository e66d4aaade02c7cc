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

#include "comrat/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace comrat {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == lower(prefix);
}

int indent_width(std::string_view line) {
  int width = 0;
  for (char c : line) {
    if (c == ' ') {
      ++width;
    } else if (c == '\t') {
      width += 4;
    } else {
      break;
    }
  }
  return width;
}

bool is_trailer(std::string_view line, const PreprocessConfig& config) {
  const auto t = trim(line);
  const auto colon = t.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  const auto key = t.substr(0, colon);
  if (key.find_first_of(" \t") != std::string_view::npos) return false;
  const auto lk = lower(key);
  return std::any_of(config.trailer_keys.begin(), config.trailer_keys.end(),
                     [&](const std::string& k) { return lower(k) == lk; });
}

bool is_url_token(std::string_view tok) {
  while (!tok.empty() && (tok.front() == '<' || tok.front() == '(')) tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == '>' || tok.back() == ')' || tok.back() == '.' || tok.back() == ',')) {
    tok.remove_suffix(1);
  }
  return starts_with_ci(tok, "http://") || starts_with_ci(tok, "https://") || starts_with_ci(tok, "ftp://");
}

// Footnote markers such as "[1]" may precede a URL.
bool is_reference_marker(std::string_view tok) {
  return tok.size() >= 3 && tok.front() == '[' && (tok.back() == ']' || tok.ends_with("]:")) &&
         std::all_of(tok.begin() + 1, tok.begin() + static_cast<long>(tok.find(']')),
                     [](unsigned char c) { return std::isdigit(c); });
}

bool is_url_only(std::string_view line) {
  std::istringstream ss{std::string(line)};
  std::string tok;
  bool saw_url = false;
  while (ss >> tok) {
    if (is_url_token(tok)) {
      saw_url = true;
    } else if (!is_reference_marker(tok)) {
      return false;
    }
  }
  return saw_url;
}

bool is_code_like(std::string_view line, const PreprocessConfig& config) {
  if (indent_width(line) >= config.code_indent) return true;
  const auto t = trim(line);
  for (const auto& p : config.code_prefixes) {
    if (t.substr(0, p.size()) == p) return true;
  }
  return false;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

// Token immediately before position `dot` (exclusive), stripped of leading
// brackets and quotes.
std::string_view token_before(std::string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  auto tok = text.substr(begin, dot - begin);
  while (!tok.empty() && (tok.front() == '(' || tok.front() == '[' || tok.front() == '"' || tok.front() == '\'')) {
    tok.remove_prefix(1);
  }
  return tok;
}

bool is_abbreviation(std::string_view tok) {
  if (tok.size() == 1 && std::isalpha(static_cast<unsigned char>(tok[0]))) return true;
  const auto lt = lower(tok);
  return lt == "e.g" || lt == "i.e" || lt == "etc" || lt == "vs" || lt == "cf";
}

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

}  // namespace

PreprocessConfig PreprocessConfig::defaults() {
  PreprocessConfig c;
  c.trailer_keys = {"Signed-off-by", "Acked-by", "Reviewed-by", "Tested-by", "Reported-by", "Suggested-by",
                    "Co-developed-by", "Cc", "Link", "Fixes", "Closes", "See-also"};
  c.code_prefixes = {"diff --git", "@@", "+++", "---"};
  c.code_indent = 4;
  return c;
}

PreprocessConfig PreprocessConfig::parse(std::string_view text) {
  auto config = defaults();
  std::set<std::string> trailers;
  std::vector<std::string> prefixes;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto colon = t.find(':');
    if (colon == std::string_view::npos) {
      throw std::runtime_error(fmt::format("preprocess config line {}: expected '<rule>: <value>'", lineno));
    }
    const auto rule = lower(trim(t.substr(0, colon)));
    const auto value = std::string(trim(t.substr(colon + 1)));
    if (value.empty()) throw std::runtime_error(fmt::format("preprocess config line {}: empty value", lineno));
    if (rule == "trailer") {
      trailers.insert(value);
    } else if (rule == "code-prefix") {
      prefixes.push_back(value);
    } else if (rule == "code-indent") {
      try {
        config.code_indent = std::stoi(value);
      } catch (const std::exception&) {
        throw std::runtime_error(fmt::format("preprocess config line {}: bad indent '{}'", lineno, value));
      }
      if (config.code_indent < 1) {
        throw std::runtime_error(fmt::format("preprocess config line {}: indent must be positive", lineno));
      }
    } else {
      throw std::runtime_error(fmt::format("preprocess config line {}: unknown rule '{}'", lineno, rule));
    }
  }
  if (!trailers.empty()) config.trailer_keys = std::move(trailers);
  if (!prefixes.empty()) config.code_prefixes = std::move(prefixes);
  return config;
}

PreprocessConfig PreprocessConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read preprocess config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool has_alpha(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isalpha(c) || c >= 0x80; });
}

std::string sanitize_utf8(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    const auto c = static_cast<unsigned char>(in[i]);
    std::size_t len = 0;
    if (c < 0x80) {
      len = 1;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      len = 2;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      len = 4;
    }
    bool ok = len > 0 && i + len <= in.size();
    for (std::size_t k = 1; ok && k < len; ++k) ok = (static_cast<unsigned char>(in[i + k]) & 0xC0) == 0x80;
    if (ok && len == 3) {
      const auto c1 = static_cast<unsigned char>(in[i + 1]);
      ok = !(c == 0xE0 && c1 < 0xA0) && !(c == 0xED && c1 >= 0xA0);
    } else if (ok && len == 4) {
      const auto c1 = static_cast<unsigned char>(in[i + 1]);
      ok = !(c == 0xF0 && c1 < 0x90) && !(c == 0xF4 && c1 >= 0x90);
    }
    if (ok) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      out += "\xEF\xBF\xBD";
      ++i;
    }
  }
  return out;
}

std::string normalize_message(std::string_view raw, const PreprocessConfig& config) {
  const auto text = sanitize_utf8(raw);
  std::vector<std::string> paragraphs;
  std::string current;
  bool subject_done = false;
  auto flush = [&] {
    auto collapsed = collapse_whitespace(current);
    if (!collapsed.empty()) paragraphs.push_back(std::move(collapsed));
    current.clear();
  };

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool blank = trim(line).empty();
    const bool dropped = !blank && (is_trailer(line, config) || is_code_like(line, config) || !has_alpha(line) ||
                                    is_url_only(line));
    if (blank || dropped) {
      flush();
      continue;
    }
    if (!current.empty()) current += ' ';
    current += trim(line);
    if (!subject_done) {
      subject_done = true;
      flush();
    }
  }
  flush();

  std::string out;
  for (const auto& p : paragraphs) {
    if (!out.empty()) out += "\n\n";
    out += p;
  }
  return out;
}

std::vector<SentenceUnit> segment_sentences(std::string_view normalized) {
  std::vector<SentenceUnit> out;
  auto emit = [&](std::string_view piece) {
    const auto t = trim(piece);
    if (!t.empty() && has_alpha(t)) out.push_back({std::string(t), 0, 0});
  };

  std::size_t para_begin = 0;
  while (para_begin <= normalized.size()) {
    auto para_end = normalized.find('\n', para_begin);
    if (para_end == std::string_view::npos) para_end = normalized.size();
    const auto para = normalized.substr(para_begin, para_end - para_begin);

    std::size_t start = 0;
    for (std::size_t i = 0; i < para.size(); ++i) {
      const char c = para[i];
      if (c != '.' && c != '!' && c != '?') continue;
      std::size_t end = i;
      while (end < para.size() && (para[end] == '.' || para[end] == '!' || para[end] == '?')) ++end;
      while (end < para.size() && is_closer(para[end])) ++end;
      if (end < para.size() && !is_space(para[end])) {
        i = end - 1;
        continue;
      }
      // A lone '.' after an abbreviation does not end the sentence.
      if (c == '.' && end == i + 1 && is_abbreviation(token_before(para, i))) continue;
      emit(para.substr(start, end - start));
      start = end;
      i = end - 1;
    }
    emit(para.substr(start));
    para_begin = para_end + 1;
  }

  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].index = i;
    out[i].total = out.size();
  }
  return out;
}

std::vector<SentenceUnit> preprocess(std::string_view raw, const PreprocessConfig& config) {
  return segment_sentences(normalize_message(raw, config));
}

}  // namespace comrat
