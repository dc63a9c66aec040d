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

#ifndef NLIDEBIAS_SYNTHESIS_H_
#define NLIDEBIAS_SYNTHESIS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nlidebias/artifact_stats.h"
#include "nlidebias/corpus.h"
#include "nlidebias/llm_client.h"
#include "nlidebias/prompts.h"

namespace nlidebias {

// Allocation record for one ranked n-gram.
struct RankedArtifact {
  Ngram ngram;
  Label label = Label::kContradiction;
  std::size_t rank = 0;       // 0-based within its label's ranking
  std::size_t available = 0;  // candidates assigned to this n-gram
  std::size_t selected = 0;   // min(available, quota)
};

struct AnchorSet {
  // Originals tagged with artifact_ngram, grouped by ranking then rank, in
  // dataset order within a group.
  std::vector<NliExample> anchors;
  std::size_t per_ngram_quota = 0;
  std::vector<RankedArtifact> ngram_list;

  std::vector<RankedArtifact> Shortfalls() const;
};

// For the first k entries of every ranking, samples up to m matching
// original examples (same label, hypothesis contains the n-gram) without
// replacement. An example matching several ranked n-grams goes to the
// best-ranked one only. Deterministic in (dataset order, rankings, seed).
AnchorSet SelectAnchors(const Dataset& dataset,
                        std::span<const Ranking> rankings, std::size_t k,
                        std::size_t m, std::uint64_t seed);

// Entailment <-> Contradiction. Neutral goes to Entailment when
// neutral_counter is even and Contradiction when odd.
Label AssignTargetLabel(Label anchor_label, std::uint64_t neutral_counter);

// keep iff verdicts.size() == panel_size and every verdict is valid.
bool ConsensusFilter(std::span<const JudgeVerdict> verdicts,
                     std::size_t panel_size);

struct ContrastPair {
  std::string pair_id;
  NliExample anchor;
  NliExample counterfactual;
  std::vector<JudgeVerdict> verdicts;
};

enum class RejectionReason {
  kGenerationFailed,
  kNoPerturbation,
  kJudgeRejected,
  kJudgeUnreachable,
};

std::string_view RejectionReasonName(RejectionReason reason);

struct RejectionEntry {
  std::string anchor_id;
  std::string artifact_ngram;
  Label anchor_label = Label::kEntailment;
  Label target_label = Label::kEntailment;
  RejectionReason reason = RejectionReason::kGenerationFailed;
  std::string detail;
};

struct SynthesisOptions {
  std::uint64_t seed = 0;
  // Generation attempts per anchor on parse/no-perturbation errors.
  int generation_attempts = 2;
  // Asks per judge when its verdict is malformed.
  int judge_asks = 2;
  // Worker threads; 0 picks the largest endpoint max_concurrency.
  int workers = 0;
};

struct SynthesisResult {
  // Sorted by anchor id.
  std::vector<ContrastPair> pairs;
  // Sorted by anchor id.
  std::vector<RejectionEntry> rejections;
  std::size_t neutral_to_entailment = 0;
  std::size_t neutral_to_contradiction = 0;
};

// Runs generate -> parse -> judge -> consensus for every anchor. Target labels
// are fixed up front in anchor-id order, so the outcome does not depend on
// scheduling. Throws InputError for an empty panel.
SynthesisResult GenerateContrastSet(const AnchorSet& anchors,
                                    LlmClient& generator,
                                    std::span<LlmClient* const> judges,
                                    const SynthesisOptions& options);

// Anchor then counterfactual for every pair, in pair order.
Dataset ContrastSetToDataset(std::span<const ContrastPair> pairs,
                             std::string name);

void WriteRejectionLog(std::span<const RejectionEntry> rejections,
                       const std::filesystem::path& path);
void WriteVerdicts(std::span<const ContrastPair> pairs,
                   const std::filesystem::path& path);

// Structural audit of a contrast-set file: every pair_id has exactly one
// original anchor and one synthesized counterfactual, hypotheses are
// identical, labels differ, the artifact n-gram occurs in the hypothesis and
// every example carries a pair_id. Returns one message per problem, each
// naming the pair_id or example id.
std::vector<std::string> AuditContrastSet(const Dataset& contrast);

}  // namespace nlidebias

#endif  // NLIDEBIAS_SYNTHESIS_H_
