// Copyright 2026 The nlidebias Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NLIDEBIAS_TESTS_TEST_SUPPORT_H_
#define NLIDEBIAS_TESTS_TEST_SUPPORT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nlidebias/corpus.h"
#include "nlidebias/llm_client.h"
#include "nlidebias/synthesis.h"
#include "nlidebias/util.h"

namespace nlidebias::testing {

inline const std::vector<std::string>& SmallVocab() {
  static const std::vector<std::string> v = {
      "a",   "the",  "man",   "woman", "dog",  "is",     "are", "nobody",
      "no",  "one",  "cat",   "sits",  "runs", "outside", "in", "bed",
      "at",  "home", "park",  "tv",    "two",  "people",  "on", "sleeping"};
  return v;
}

inline std::string RandomSentence(std::mt19937_64& rng, std::size_t min_len,
                                  std::size_t max_len,
                                  const std::vector<std::string>& vocab) {
  const std::size_t len = min_len + UniformIndex(rng, max_len - min_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    if (i > 0) s.push_back(' ');
    s += vocab[UniformIndex(rng, vocab.size())];
  }
  return s;
}

// Random labelled corpus; ids "r<i>".
inline Dataset RandomCorpus(std::uint64_t seed, std::size_t n,
                            std::size_t max_len = 12) {
  std::mt19937_64 rng(seed);
  Dataset d;
  d.name = "random";
  for (std::size_t i = 0; i < n; ++i) {
    NliExample ex;
    ex.id = "r" + std::to_string(i);
    ex.premise = RandomSentence(rng, 0, max_len, SmallVocab());
    ex.hypothesis = RandomSentence(rng, 0, max_len, SmallVocab());
    ex.label = kAllLabels[UniformIndex(rng, 3)];
    d.examples.push_back(std::move(ex));
  }
  return d;
}

// Anchors tagged with artifact n-grams drawn from a per-label pool. Labels
// cycle E, N, C so any multiple of 3 is label-balanced.
inline AnchorSet MakeAnchorSet(std::size_t n, std::uint64_t seed,
                               std::size_t ngrams_per_label = 5) {
  static const char* kHeads[] = {"nobody", "outdoors", "sleeping", "cat",
                                 "home",   "tv",       "asleep",  "bed"};
  std::mt19937_64 rng(seed);
  AnchorSet set;
  set.per_ngram_quota = n;
  for (std::size_t i = 0; i < n; ++i) {
    NliExample ex;
    ex.id = "a" + std::to_string(1000 + i);
    ex.label = kAllLabels[i % 3];
    const std::size_t g = UniformIndex(rng, ngrams_per_label);
    const std::string gram = std::string(LabelName(ex.label)) + "cue" +
                             std::to_string(g) + " " + kHeads[g % 8];
    ex.premise = "scene " + std::to_string(i) + " " +
                 RandomSentence(rng, 3, 8, SmallVocab());
    ex.hypothesis = RandomSentence(rng, 0, 4, SmallVocab()) + " " + gram +
                    " " + RandomSentence(rng, 0, 4, SmallVocab());
    ex.artifact_ngram = Ngram::Parse(gram);
    set.anchors.push_back(std::move(ex));
  }
  return set;
}

// Deterministic offline backend. The generator answers with a perturbed
// premise; each judge approves unless a keyed hash of (judge, prompt) falls
// under reject_per_mille. Transient and malformed replies can be injected the
// same way.
struct ScriptedRates {
  int judge_reject_per_mille = 0;
  int judge_malformed_per_mille = 0;
  int generator_down_per_mille = 0;
  int generator_echo_per_mille = 0;
};

class ScriptedBackend : public ChatBackend {
 public:
  using Rates = ScriptedRates;

  explicit ScriptedBackend(std::uint64_t seed, Rates rates = Rates())
      : seed_(seed), rates_(rates) {}

  TransportResult Send(const LlmEndpointConfig& endpoint,
                       std::string_view prompt) override {
    const std::uint64_t h =
        DeriveSeed(seed_, HashKey(endpoint.model_id), HashKey(prompt));
    const int roll = static_cast<int>(h % 1000);
    if (endpoint.role == EndpointRole::kGenerator) {
      if (roll < rates_.generator_down_per_mille) return {503, "", "down"};
      const std::string premise = QuotedAfter(prompt, "- Original Premise: \"");
      if (roll < rates_.generator_down_per_mille +
                     rates_.generator_echo_per_mille) {
        return {200, premise, ""};
      }
      return {200, "New Premise: " + premise + " edited " +
                       std::to_string(h % 97),
              ""};
    }
    if (roll < rates_.judge_malformed_per_mille) {
      return {200, "maybe", ""};
    }
    if (roll < rates_.judge_malformed_per_mille + rates_.judge_reject_per_mille) {
      return {200, "false|not minimal", ""};
    }
    return {200, "true|minimal and accurate", ""};
  }

 private:
  static std::string QuotedAfter(std::string_view text, std::string_view key) {
    const auto pos = text.find(key);
    if (pos == std::string_view::npos) return {};
    const auto start = pos + key.size();
    const auto end = text.find("\"\n", start);
    return std::string(text.substr(start, end - start));
  }

  std::uint64_t seed_;
  Rates rates_;
};

struct MockPanel {
  std::shared_ptr<ChatBackend> backend;
  std::unique_ptr<LlmClient> generator;
  std::vector<std::unique_ptr<LlmClient>> judges;
  std::vector<LlmClient*> judge_ptrs;
};

inline MockPanel MakePanel(std::shared_ptr<ChatBackend> backend,
                           std::size_t n_judges = 2, int concurrency = 4) {
  MockPanel p;
  p.backend = std::move(backend);
  auto no_sleep = [](std::chrono::milliseconds) {};
  LlmEndpointConfig gen;
  gen.role = EndpointRole::kGenerator;
  gen.model_id = "gen-model";
  gen.max_concurrency = concurrency;
  gen.max_retries = 1;
  p.generator = std::make_unique<LlmClient>(gen, p.backend, 1, no_sleep);
  for (std::size_t i = 0; i < n_judges; ++i) {
    LlmEndpointConfig j;
    j.role = EndpointRole::kJudge;
    j.model_id = "judge-" + std::to_string(i);
    j.max_concurrency = concurrency;
    j.max_retries = 1;
    p.judges.push_back(std::make_unique<LlmClient>(j, p.backend, 2 + i, no_sleep));
    p.judge_ptrs.push_back(p.judges.back().get());
  }
  return p;
}

inline std::filesystem::path FreshTempDir(std::string_view name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("nlidebias_" + std::string(name));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace nlidebias::testing

#endif  // NLIDEBIAS_TESTS_TEST_SUPPORT_H_
