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

// Deterministic synthetic commit histories shaped like kernel module logs.

#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "comrat/metrics.hpp"

namespace comrat::testing {

inline std::string fake_sha(std::uint64_t seed, std::size_t i) {
  std::mt19937_64 rng(seed * 1'000'003 + i);
  return fmt::format("{:016x}{:016x}{:08x}", rng(), rng(), static_cast<std::uint32_t>(rng()));
}

inline std::string synthetic_message(std::mt19937& rng, std::size_t i) {
  static const std::vector<std::string> subsystems{"mm/slob", "mm", "slob", "mm/slab", "kernel"};
  static const std::vector<std::string> subjects{
      "fix alignment of large allocations", "remove unused variable", "use kmem_cache_zalloc for pages",
      "convert to generic free list helpers", "rename page flags for clarity", "drop the obsolete config option",
      "avoid double accounting of freed pages", "update comments to match the code"};
  static const std::vector<std::string> body{
      "The old code did not respect the architecture minimum alignment.",
      "Otherwise the allocator leaks memory under pressure.",
      "Use a spinlock because the path runs in atomic context.",
      "This patch moves the check into the slow path.",
      "The function is called from the reclaim path.",
      "Add a comment describing the locking rules.",
      "Without this the kernel would crash on boot with small pages.",
      "This makes the code simpler and easier to follow.",
      "Tested on x86_64 and arm64 with the usual stress tests.",
      "Since the list is walked without locks, the reader may observe stale entries.",
      "The helper was introduced in 2.6.24 for SLUB.",
      "Replace the open coded loop with list_for_each_entry.",
      "It is redundant after the previous cleanup.",
      "See the discussion on the mailing list, e.g. the thread from last week."};
  if (i % 37 == 11) return "";  // empty message
  if (i % 41 == 7) return "Signed-off-by: Some One <some@example.org>\n";  // preprocesses to nothing
  std::uniform_int_distribution<std::size_t> pick_sub(0, subsystems.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_subject(0, subjects.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_body(0, body.size() - 1);
  std::uniform_int_distribution<int> n_body(0, 6);
  std::string msg = subsystems[pick_sub(rng)] + ": " + subjects[pick_subject(rng)] + "\n\n";
  const int n = n_body(rng);
  for (int k = 0; k < n; ++k) {
    msg += body[pick_body(rng)];
    msg += (k % 3 == 2) ? "\n\n" : (k % 2 ? "\n" : " ");
  }
  if (i % 5 == 0) msg += "\n    BUG: unable to handle kernel paging request at 0000000000001000\n";
  if (i % 7 == 0) msg += "\n@@ -10,7 +10,7 @@ static void *slob_alloc(size_t size)\n";
  msg += "\nSigned-off-by: Dev " + std::to_string(i % 9) + " <dev" + std::to_string(i % 9) + "@example.org>\n";
  if (i % 3 == 0) msg += "Acked-by: Maintainer <maint@example.org>\n";
  return msg;
}

/// GitHub API-shaped commit objects, newest first.
inline std::vector<nlohmann::json> synthetic_history(std::size_t n, std::uint64_t seed = 1) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  std::vector<nlohmann::json> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int year = 2023 - static_cast<int>(i * 18 / std::max<std::size_t>(n, 1));
    const auto date = fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:00Z", year, 1 + (i % 12), 1 + (i % 28), i % 24,
                                  i % 60);
    const auto author = static_cast<int>(i % 9 == 0 ? 0 : i % 6);
    nlohmann::json person{{"name", fmt::format("Developer {}", author)},
                          {"email", author == 5 ? "" : fmt::format("dev{}@example.org", author)},
                          {"date", date}};
    out.push_back({{"sha", fake_sha(seed, i)},
                   {"commit", {{"author", person}, {"committer", person}, {"message", synthetic_message(rng, i)}}},
                   {"author", {{"login", fmt::format("dev{}", author)}}}});
  }
  return out;
}

/// Random labelled dataset for property tests.
inline LabelledDataset random_dataset(std::mt19937& rng, std::size_t max_commits = 200, std::size_t max_sentences = 12) {
  static const std::vector<std::string> words{"fix", "the",  "allocator", "leak", "because", "pages", "lock",
                                              "it",  "free", "slab",      "path", "reclaim", "2019",  "x86"};
  std::uniform_int_distribution<std::size_t> n_commits(0, max_commits);
  std::uniform_int_distribution<std::size_t> n_sent(0, max_sentences);
  std::uniform_int_distribution<std::size_t> n_words(1, 8);
  std::uniform_int_distribution<std::size_t> pick_word(0, words.size() - 1);
  std::uniform_int_distribution<int> pick_author(0, 7);
  std::uniform_int_distribution<int> pick_year(2005, 2024);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution empty_commit(0.05);

  LabelledDataset d;
  d.api_url = "https://api.github.com/repos/o/r/commits?path=x";
  const auto nc = n_commits(rng);
  for (std::size_t c = 0; c < nc; ++c) {
    CommitLabelled cl;
    cl.commit.sha = fake_sha(rng(), c);
    cl.commit.author_id = fmt::format("a{}@example.org", pick_author(rng));
    cl.commit.author_name = cl.commit.author_id;
    cl.commit.committed_at =
        std::chrono::sys_days{std::chrono::year{pick_year(rng)} / std::chrono::month{3} / std::chrono::day{4}} +
        std::chrono::hours{5};
    const auto ns = empty_commit(rng) ? 0 : n_sent(rng);
    for (std::size_t s = 0; s < ns; ++s) {
      std::string text;
      const auto nw = n_words(rng);
      for (std::size_t w = 0; w < nw; ++w) text += (w ? " " : "") + words[pick_word(rng)];
      text += coin(rng) ? "." : ", \"quoted\" part.";
      if (!has_alpha(text)) text = "word";
      cl.sentences.push_back({{text, s, ns}, {coin(rng), coin(rng)}});
    }
    d.commits.push_back(std::move(cl));
  }
  return d;
}

/// A single-commit dataset whose sentences carry the given verdicts.
inline CommitLabelled commit_with(const std::vector<LabelVerdict>& verdicts, const std::string& sha = "c0",
                                  const std::string& author = "a@example.org", int year = 2019) {
  CommitLabelled c;
  c.commit.sha = sha;
  c.commit.author_id = author;
  c.commit.author_name = author;
  c.commit.committed_at =
      std::chrono::sys_days{std::chrono::year{year} / std::chrono::month{6} / std::chrono::day{1}};
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    c.sentences.push_back({{fmt::format("sentence {}", i), i, verdicts.size()}, verdicts[i]});
  }
  return c;
}

inline constexpr LabelVerdict kD{true, false};
inline constexpr LabelVerdict kR{false, true};
inline constexpr LabelVerdict kDR{true, true};
inline constexpr LabelVerdict kNone{false, false};

}  // namespace comrat::testing
