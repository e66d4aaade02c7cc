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

#include "comrat/classify.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <csignal>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

namespace comrat {

namespace {

#include "builtin_lexicon.inc"

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// Regular inflections of an English verb. Over-generation is harmless since
// lookups are exact word matches.
std::vector<std::string> verb_forms(const std::string& v) {
  std::vector<std::string> forms{v, v + "s", v + "es", v + "ed", v + "ing"};
  if (v.empty()) return forms;
  const char last = v.back();
  if (last == 'e') {
    forms.push_back(v + "d");
    forms.push_back(v.substr(0, v.size() - 1) + "ing");
  }
  if (last == 'y' && v.size() > 1 && !is_vowel(v[v.size() - 2])) {
    const auto stem = v.substr(0, v.size() - 1);
    forms.push_back(stem + "ies");
    forms.push_back(stem + "ied");
  }
  // Consonant-vowel-consonant endings double: drop -> dropped, split -> splitting.
  if (v.size() >= 3 && !is_vowel(last) && last != 'w' && last != 'x' && last != 'y' && is_vowel(v[v.size() - 2]) &&
      !is_vowel(v[v.size() - 3])) {
    forms.push_back(v + last + "ed");
    forms.push_back(v + last + "ing");
  }
  return forms;
}

std::vector<std::string> split_words(const std::string& phrase) {
  std::vector<std::string> out;
  std::istringstream ss(phrase);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

// Compiled form of a Lexicon, cached per Lexicon instance contents.
struct CompiledLexicon {
  std::unordered_set<std::string> decision_forms;
  std::vector<std::vector<std::string>> rationale_phrases;
  std::unordered_set<std::string> negative_forms;
  std::unordered_set<std::string> skip;

  explicit CompiledLexicon(const Lexicon& lex) {
    for (const auto& v : lex.decision_verbs) {
      for (auto& f : verb_forms(v)) decision_forms.insert(std::move(f));
    }
    for (const auto* set : {&lex.rationale_cues, &lex.judgment_cues}) {
      for (const auto& p : *set) {
        auto words = split_words(p);
        if (!words.empty()) rationale_phrases.push_back(std::move(words));
      }
    }
    for (const auto& v : lex.negative_outcomes) {
      for (auto& f : verb_forms(v)) negative_forms.insert(std::move(f));
    }
    skip.insert(lex.lead_skip.begin(), lex.lead_skip.end());
  }
};

bool starts_with_digit(const std::string& t) { return !t.empty() && std::isdigit(static_cast<unsigned char>(t[0])); }

// "since" is causal unless it introduces a point in time or a version.
bool temporal_since(const std::vector<std::string>& tokens, std::size_t i) {
  if (i + 1 >= tokens.size()) return false;
  static const std::unordered_set<std::string> kTemporal{"commit",  "commits", "version", "versions", "then",
                                                         "release", "kernel",  "linux",   "day",      "long",
                                                         "forever", "ages",    "last",    "early",    "before"};
  const auto& next = tokens[i + 1];
  if (starts_with_digit(next) || kTemporal.count(next)) return true;
  return next.size() > 1 && next[0] == 'v' && std::isdigit(static_cast<unsigned char>(next[1]));
}

bool has_phrase_at(const std::vector<std::string>& tokens, std::size_t i, const std::vector<std::string>& phrase) {
  if (i + phrase.size() > tokens.size()) return false;
  for (std::size_t k = 0; k < phrase.size(); ++k) {
    if (tokens[i + k] != phrase[k]) return false;
  }
  return true;
}

bool has_rationale(const std::vector<std::string>& tokens, const CompiledLexicon& lex) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& phrase : lex.rationale_phrases) {
      if (!has_phrase_at(tokens, i, phrase)) continue;
      if (phrase.size() == 1 && phrase[0] == "since" && temporal_since(tokens, i)) continue;
      return true;
    }
    if (tokens[i] == "would" || tokens[i] == "could") {
      for (std::size_t k = i + 1; k < tokens.size() && k <= i + 3; ++k) {
        if (lex.negative_forms.count(tokens[k])) return true;
      }
    }
  }
  return false;
}

const CompiledLexicon& compiled_builtin() {
  static const CompiledLexicon compiled(Lexicon::builtin());
  return compiled;
}

LabelVerdict classify_compiled(std::string_view text, const CompiledLexicon& lex) {
  auto body = trim(text);
  // Subsystem prefixes such as "mm/slob:" mark a subject line.
  bool subject_style = false;
  while (true) {
    const auto space = body.find(' ');
    const auto first = body.substr(0, space);
    if (first.size() < 2 || first.back() != ':' || space == std::string_view::npos) break;
    subject_style = true;
    body = trim(body.substr(space));
  }
  if (!body.empty()) {
    auto last = body.back();
    while ((last == '"' || last == '\'' || last == ')') && body.size() > 1) {
      body.remove_suffix(1);
      last = body.back();
    }
    if (last != '.' && last != '!' && last != '?') subject_style = true;
  }

  const auto tokens = word_tokens(body);
  LabelVerdict v;
  std::size_t first = 0;
  while (first < tokens.size() && lex.skip.count(tokens[first])) ++first;
  if (first < tokens.size() && lex.decision_forms.count(tokens[first])) v.decision = true;
  if (!v.decision && subject_style) {
    v.decision = std::any_of(tokens.begin(), tokens.end(), [&](const auto& t) { return lex.decision_forms.count(t); });
  }
  for (std::size_t i = 0; !v.decision && i + 2 < tokens.size(); ++i) {
    if (tokens[i] == "this" && (tokens[i + 1] == "patch" || tokens[i + 1] == "commit" || tokens[i + 1] == "change") &&
        lex.decision_forms.count(tokens[i + 2])) {
      v.decision = true;
    }
  }
  v.rationale = has_rationale(tokens, lex);
  return v;
}

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

// One adapter child process with pipes to its standard input and output.
class AdapterProcess {
 public:
  explicit AdapterProcess(const std::string& command) {
    ignore_sigpipe();
    int to_child[2];
    int from_child[2];
    if (pipe2(to_child, O_CLOEXEC) != 0) throw ClassifierError("pipe() failed: " + std::string(std::strerror(errno)));
    if (pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ClassifierError("pipe() failed: " + std::string(std::strerror(errno)));
    }
    pid_ = fork();
    if (pid_ < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      throw ClassifierError("fork() failed: " + std::string(std::strerror(errno)));
    }
    if (pid_ == 0) {
      // Own process group, so a kill also reaches whatever the shell started.
      setpgid(0, 0);
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    stdin_fd_ = to_child[1];
    stdout_fd_ = from_child[0];
    setpgid(pid_, pid_);
    fcntl(stdin_fd_, F_SETFL, fcntl(stdin_fd_, F_GETFL) | O_NONBLOCK);
  }

  AdapterProcess(const AdapterProcess&) = delete;
  AdapterProcess& operator=(const AdapterProcess&) = delete;

  ~AdapterProcess() {
    close_stdin();
    if (stdout_fd_ >= 0) ::close(stdout_fd_);
    if (pid_ > 0) {
      ::kill(-pid_, SIGKILL);
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
    }
  }

  int stdin_fd() const { return stdin_fd_; }
  int stdout_fd() const { return stdout_fd_; }

  void close_stdin() {
    if (stdin_fd_ >= 0) ::close(stdin_fd_);
    stdin_fd_ = -1;
  }

  /// Waits for exit; returns the exit status or -1 on signal/timeout.
  int wait_exit(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      int status = 0;
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        pid_ = -1;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
      }
      if (r < 0) {
        pid_ = -1;
        return -1;
      }
      if (std::chrono::steady_clock::now() >= deadline) return -1;
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }

 private:
  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
};

LabelVerdict parse_reply(const std::string& line, std::size_t expected_id) {
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw AdapterProtocolError(fmt::format("adapter reply {} is not JSON: {}", expected_id, line.substr(0, 200)));
  }
  if (!reply.is_object() || !reply.contains("id") || !reply["id"].is_number_integer() || !reply.contains("decision") ||
      !reply["decision"].is_boolean() || !reply.contains("rationale") || !reply["rationale"].is_boolean()) {
    throw AdapterProtocolError(fmt::format("adapter reply {} lacks id/decision/rationale: {}", expected_id,
                                           line.substr(0, 200)));
  }
  if (reply["id"].get<long long>() != static_cast<long long>(expected_id)) {
    throw AdapterProtocolError(
        fmt::format("adapter reply out of order: expected id {}, got {}", expected_id, reply["id"].dump()));
  }
  return {reply["decision"].get<bool>(), reply["rationale"].get<bool>()};
}

std::vector<LabelVerdict> run_adapter(const std::vector<SentenceUnit>& sentences, const ClassifierSpec& spec,
                                      const ClassifyProgress& progress) {
  std::string outgoing;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    nlohmann::json req{{"id", i}, {"text", sentences[i].text}};
    outgoing += req.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    outgoing += '\n';
  }

  AdapterProcess proc(*spec.adapter_command);
  std::vector<LabelVerdict> verdicts;
  verdicts.reserve(sentences.size());
  std::size_t written = 0;
  std::string incoming;
  std::array<char, 4096> buf{};
  if (outgoing.empty()) proc.close_stdin();

  while (verdicts.size() < sentences.size()) {
    std::array<pollfd, 2> fds{};
    nfds_t n = 0;
    fds[n++] = {proc.stdout_fd(), POLLIN, 0};
    if (proc.stdin_fd() >= 0) fds[n++] = {proc.stdin_fd(), POLLOUT, 0};
    const int ready = ::poll(fds.data(), n, static_cast<int>(spec.per_sentence_timeout.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ClassifierError("poll() failed: " + std::string(std::strerror(errno)));
    }
    if (ready == 0) {
      throw AdapterTimeout(fmt::format("adapter produced no reply for sentence {} within {} ms", verdicts.size(),
                                       spec.per_sentence_timeout.count()));
    }
    if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const auto w = ::write(proc.stdin_fd(), outgoing.data() + written, outgoing.size() - written);
      if (w < 0 && errno != EAGAIN && errno != EINTR) {
        // The child closed its input; whatever it already answered is read below.
        proc.close_stdin();
      } else if (w > 0) {
        written += static_cast<std::size_t>(w);
        if (written == outgoing.size()) proc.close_stdin();
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      const auto r = ::read(proc.stdout_fd(), buf.data(), buf.size());
      if (r < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw ClassifierError("read from adapter failed: " + std::string(std::strerror(errno)));
      }
      if (r == 0) {
        throw AdapterCrashed(fmt::format("adapter exited after {} of {} replies", verdicts.size(), sentences.size()),
                             verdicts);
      }
      incoming.append(buf.data(), static_cast<std::size_t>(r));
      for (auto nl = incoming.find('\n'); nl != std::string::npos; nl = incoming.find('\n')) {
        std::string line = incoming.substr(0, nl);
        incoming.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (verdicts.size() == sentences.size()) {
          throw AdapterProtocolError("adapter sent more replies than requests");
        }
        verdicts.push_back(parse_reply(line, verdicts.size()));
        if (progress) progress(verdicts.size());
      }
    }
  }
  proc.close_stdin();
  const int status = proc.wait_exit(spec.per_sentence_timeout);
  if (status != 0) {
    throw AdapterCrashed(fmt::format("adapter exited with status {} after its final reply", status), verdicts);
  }
  return verdicts;
}

}  // namespace

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto word_char = [](unsigned char c) { return std::isalnum(c) || c >= 0x80; };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (word_char(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (c == '\'' && !cur.empty() && i + 1 < text.size() &&
               std::isalpha(static_cast<unsigned char>(text[i + 1]))) {
      cur += '\'';
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string_view Lexicon::builtin_text() { return kBuiltinLexicon; }

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = parse(kBuiltinLexicon);
  return lex;
}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::set<std::string>* section = nullptr;
  std::istringstream in{std::string(text)};
  std::string raw;
  for (int lineno = 1; std::getline(in, raw); ++lineno) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error(fmt::format("lexicon line {}: unterminated section", lineno));
      const auto name = lower(line.substr(1, line.size() - 2));
      if (name == "decision") {
        section = &lex.decision_verbs;
      } else if (name == "rationale") {
        section = &lex.rationale_cues;
      } else if (name == "judgment" || name == "judgement") {
        section = &lex.judgment_cues;
      } else if (name == "negative-outcome") {
        section = &lex.negative_outcomes;
      } else if (name == "skip") {
        section = &lex.lead_skip;
      } else {
        throw std::runtime_error(fmt::format("lexicon line {}: unknown section [{}]", lineno, name));
      }
      continue;
    }
    if (!section) throw std::runtime_error(fmt::format("lexicon line {}: term outside a section", lineno));
    // Normalise internal whitespace so phrases compare token by token.
    std::string term;
    for (const auto& w : split_words(lower(line))) {
      if (!term.empty()) term += ' ';
      term += w;
    }
    section->insert(std::move(term));
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read lexicon " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ClassifierSpec ClassifierSpec::lexicon(std::optional<std::filesystem::path> path) {
  ClassifierSpec s;
  s.lexicon_path = std::move(path);
  return s;
}

ClassifierSpec ClassifierSpec::adapter(std::string command) {
  ClassifierSpec s;
  s.kind = ClassifierKind::kExternalAdapter;
  s.adapter_command = std::move(command);
  return s;
}

ClassifierSpec ClassifierSpec::from_string(std::string_view text) {
  if (text == "lexicon") return lexicon();
  if (text.substr(0, 8) == "adapter:") {
    auto cmd = std::string(trim(text.substr(8)));
    if (cmd.empty()) throw std::invalid_argument("adapter classifier needs a command: adapter:<cmd>");
    return adapter(std::move(cmd));
  }
  throw std::invalid_argument("unknown classifier '" + std::string(text) + "' (expected lexicon or adapter:<cmd>)");
}

std::string ClassifierSpec::kind_name() const {
  return kind == ClassifierKind::kBuiltinLexicon ? "lexicon" : "adapter";
}

void ClassifierSpec::validate() const {
  if (kind == ClassifierKind::kExternalAdapter && (!adapter_command || trim(*adapter_command).empty())) {
    throw std::invalid_argument("external adapter classifier requires a command");
  }
  if (per_sentence_timeout.count() <= 0) throw std::invalid_argument("per-sentence timeout must be positive");
}

LabelVerdict classify_with_lexicon(std::string_view text, const Lexicon& lexicon) {
  if (trim(text).empty()) throw EmptyInput();
  return classify_compiled(text, CompiledLexicon(lexicon));
}

namespace {

// Resolves the ClassifierSpec lexicon once per call site.
struct LexiconHandle {
  std::optional<CompiledLexicon> owned;
  const CompiledLexicon* ptr = nullptr;

  explicit LexiconHandle(const ClassifierSpec& spec) {
    if (spec.lexicon_path) {
      owned.emplace(Lexicon::load(*spec.lexicon_path));
      ptr = &*owned;
    } else {
      ptr = &compiled_builtin();
    }
  }
};

}  // namespace

LabelVerdict classify_sentence(std::string_view text, const ClassifierSpec& spec) {
  if (trim(text).empty()) throw EmptyInput();
  spec.validate();
  if (spec.kind == ClassifierKind::kBuiltinLexicon) {
    LexiconHandle lex(spec);
    return classify_compiled(text, *lex.ptr);
  }
  return run_adapter({SentenceUnit{std::string(text), 0, 1}}, spec, {}).front();
}

std::vector<LabelledSentence> classify_batch(const std::vector<SentenceUnit>& sentences, const ClassifierSpec& spec,
                                             const ClassifyProgress& progress) {
  spec.validate();
  for (const auto& s : sentences) {
    if (trim(s.text).empty()) throw EmptyInput();
  }
  std::vector<LabelledSentence> out;
  out.reserve(sentences.size());
  if (spec.kind == ClassifierKind::kBuiltinLexicon) {
    LexiconHandle lex(spec);
    for (const auto& s : sentences) {
      out.push_back({s, classify_compiled(s.text, *lex.ptr)});
      if (progress) progress(out.size());
    }
    return out;
  }
  if (sentences.empty()) return out;
  const auto verdicts = run_adapter(sentences, spec, progress);
  for (std::size_t i = 0; i < sentences.size(); ++i) out.push_back({sentences[i], verdicts[i]});
  return out;
}

bool adapter_command_available(const std::string& command) {
  std::istringstream ss(command);
  std::string program;
  ss >> program;
  // Skip leading VAR=value assignments.
  while (!program.empty() && program.find('=') != std::string::npos && program.find('/') == std::string::npos) {
    if (!(ss >> program)) return false;
  }
  if (program.empty()) return false;
  if (program.find('/') != std::string::npos) return ::access(program.c_str(), X_OK) == 0;
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::istringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (dir.empty()) dir = ".";
    const auto candidate = dir + "/" + program;
    if (::access(candidate.c_str(), X_OK) == 0) return true;
  }
  return false;
}

}  // namespace comrat
