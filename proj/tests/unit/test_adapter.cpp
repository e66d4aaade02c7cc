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


#include <gtest/gtest.h>

#include <chrono>

#include "comrat/classify.hpp"

namespace comrat {
namespace {

using namespace std::chrono_literals;

ClassifierSpec stub(const std::string& mode, std::chrono::milliseconds timeout = 5000ms) {
  auto spec = ClassifierSpec::adapter(std::string(STUB_ADAPTER) + " " + mode);
  spec.per_sentence_timeout = timeout;
  return spec;
}

std::vector<SentenceUnit> sentences(std::size_t n) {
  std::vector<SentenceUnit> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"Sentence number " + std::to_string(i) + ".", i, n});
  return out;
}

LabelVerdict echo_verdict(std::size_t id) { return {id % 2 == 0, id % 3 == 0}; }

TEST(Adapter, EchoReturnsFixedVerdictsInOrder) {
  const auto in = sentences(5);
  const auto out = classify_batch(in, stub("echo"));
  ASSERT_EQ(out.size(), 5u);
  const std::vector<LabelVerdict> expected{{true, true}, {false, false}, {true, false}, {false, true}, {true, false}};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(out[i].verdict, expected[i]);
    EXPECT_EQ(out[i].verdict, echo_verdict(i));
    EXPECT_EQ(out[i].unit, in[i]);
  }
}

TEST(Adapter, ZeroSentencesZeroVerdicts) { EXPECT_TRUE(classify_batch({}, stub("echo")).empty()); }

TEST(Adapter, CrashAfterThreeCarriesPartialVerdicts) {
  try {
    classify_batch(sentences(5), stub("crash-after 3"));
    FAIL() << "expected AdapterCrashed";
  } catch (const AdapterCrashed& e) {
    ASSERT_EQ(e.partial().size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(e.partial()[i], echo_verdict(i));
  }
}

TEST(Adapter, MalformedReplyIsProtocolError) {
  EXPECT_THROW(classify_batch(sentences(5), stub("malformed-after 2")), AdapterProtocolError);
}

TEST(Adapter, WrongIdIsProtocolError) {
  EXPECT_THROW(classify_batch(sentences(3), stub("bad-id")), AdapterProtocolError);
}

TEST(Adapter, DuplicateReplyIsProtocolError) {
  EXPECT_THROW(classify_batch(sentences(3), stub("extra")), AdapterProtocolError);
}

TEST(Adapter, NonZeroExitAfterFinalReplyIsCrash) {
  try {
    classify_batch(sentences(4), stub("nonzero-exit"));
    FAIL() << "expected AdapterCrashed";
  } catch (const AdapterCrashed& e) {
    EXPECT_EQ(e.partial().size(), 4u);
  }
}

TEST(Adapter, SilentAdapterTimesOut) {
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(classify_batch(sentences(2), stub("hang", 300ms)), AdapterTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 5s);
}

TEST(Adapter, MissingCommandFails) {
  EXPECT_FALSE(adapter_command_available("/nonexistent/classifier --flag"));
  EXPECT_TRUE(adapter_command_available(std::string(STUB_ADAPTER) + " echo"));
  EXPECT_THROW(classify_batch(sentences(2), ClassifierSpec::adapter("/nonexistent/classifier")), AdapterCrashed);
}

TEST(Adapter, LargeBatchThroughReadAllAdapterDoesNotDeadlock) {
  const auto in = sentences(20000);
  const auto out = classify_batch(in, stub("batch"));
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t i = 0; i < in.size(); i += 997) EXPECT_EQ(out[i].verdict, echo_verdict(i));
}

TEST(Adapter, LexiconAdapterAgreesWithBuiltin) {
  std::vector<SentenceUnit> in;
  const std::vector<std::string> corpus{"Fix the race in the allocator.", "Otherwise the old code leaks memory.",
                                        "See the thread \"here\".", "mm: drop unused code", "caf\xC3\xA9 because."};
  for (std::size_t i = 0; i < corpus.size(); ++i) in.push_back({corpus[i], i, corpus.size()});
  const auto via_adapter = classify_batch(in, stub("lexicon"));
  const auto direct = classify_batch(in, ClassifierSpec::lexicon());
  EXPECT_EQ(via_adapter, direct);
}

TEST(Adapter, ProgressReachesTotal) {
  std::size_t last = 0;
  bool monotone = true;
  classify_batch(sentences(9), stub("echo"), [&](std::size_t d) {
    monotone = monotone && d >= last;
    last = d;
  });
  EXPECT_TRUE(monotone);
  EXPECT_EQ(last, 9u);
}

TEST(Adapter, SingleSentence) {
  EXPECT_EQ(classify_sentence("Anything.", stub("echo")), echo_verdict(0));
}

}  // namespace
}  // namespace comrat
