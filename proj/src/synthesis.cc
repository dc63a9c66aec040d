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

#include "nlidebias/synthesis.h"

#include <algorithm>
#include <atomic>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "nlidebias/error.h"
#include "nlidebias/util.h"

namespace nlidebias {

using ordered_json = nlohmann::ordered_json;

std::vector<RankedArtifact> AnchorSet::Shortfalls() const {
  std::vector<RankedArtifact> out;
  for (const auto& a : ngram_list) {
    if (a.selected < per_ngram_quota) out.push_back(a);
  }
  return out;
}

namespace {

constexpr std::size_t kNoRank = std::numeric_limits<std::size_t>::max();
constexpr std::uint64_t kAnchorStream = 0x616e63686f72;  // "anchor"

}  // namespace

AnchorSet SelectAnchors(const Dataset& dataset,
                        std::span<const Ranking> rankings, std::size_t k,
                        std::size_t m, std::uint64_t seed) {
  if (rankings.empty()) throw InputError("anchor selection needs rankings");
  if (k == 0 || m == 0) throw InputError("k and m must be >= 1");

  AnchorSet out;
  out.per_ngram_quota = m;
  std::unordered_set<std::string> taken;
  const auto size = static_cast<std::ptrdiff_t>(dataset.size());

  for (const Ranking& ranking : rankings) {
    const std::size_t top = std::min(k, ranking.entries.size());
    std::unordered_map<std::string, std::size_t> rank_of;
    std::vector<std::size_t> orders;
    for (std::size_t r = 0; r < top; ++r) {
      const Ngram& g = ranking.entries[r].ngram;
      rank_of.emplace(g.Text(), r);
      if (std::find(orders.begin(), orders.end(), g.order()) == orders.end()) {
        orders.push_back(g.order());
      }
    }

    // Best (lowest) rank matched by each example's hypothesis.
    std::vector<std::size_t> best(dataset.size(), kNoRank);
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      const NliExample& ex = dataset.examples[static_cast<std::size_t>(i)];
      if (ex.label != ranking.label || ex.provenance != Provenance::kOriginal) {
        continue;
      }
      auto tokens = Tokenize(ex.hypothesis);
      std::string buffer;
      std::size_t b = kNoRank;
      for (std::size_t n : orders) {
        ForEachNgramText(tokens, n, buffer, [&](std::string_view gram) {
          auto it = rank_of.find(std::string(gram));
          if (it != rank_of.end()) b = std::min(b, it->second);
        });
      }
      best[static_cast<std::size_t>(i)] = b;
    }

    std::vector<std::vector<std::size_t>> buckets(top);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (best[i] == kNoRank) continue;
      if (taken.contains(dataset.examples[i].id)) continue;
      buckets[best[i]].push_back(i);
    }

    for (std::size_t r = 0; r < top; ++r) {
      const Ngram& gram = ranking.entries[r].ngram;
      std::mt19937_64 rng(DeriveSeed(
          seed,
          HashKey(std::string(LabelName(ranking.label)) + "|" + gram.Text()),
          kAnchorStream));
      const auto& bucket = buckets[r];
      const std::size_t want = std::min(m, bucket.size());
      auto picks = SampleIndices(bucket.size(), want, rng);
      std::sort(picks.begin(), picks.end());
      for (std::size_t p : picks) {
        NliExample anchor = dataset.examples[bucket[p]];
        anchor.artifact_ngram = gram;
        taken.insert(anchor.id);
        out.anchors.push_back(std::move(anchor));
      }
      out.ngram_list.push_back({gram, ranking.label, r, bucket.size(), want});
    }
  }
  return out;
}

Label AssignTargetLabel(Label anchor_label, std::uint64_t neutral_counter) {
  switch (anchor_label) {
    case Label::kEntailment:
      return Label::kContradiction;
    case Label::kContradiction:
      return Label::kEntailment;
    case Label::kNeutral:
      return neutral_counter % 2 == 0 ? Label::kEntailment
                                      : Label::kContradiction;
  }
  return Label::kEntailment;
}

bool ConsensusFilter(std::span<const JudgeVerdict> verdicts,
                     std::size_t panel_size) {
  if (verdicts.empty() || verdicts.size() != panel_size) return false;
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const JudgeVerdict& v) { return v.valid; });
}

std::string_view RejectionReasonName(RejectionReason reason) {
  switch (reason) {
    case RejectionReason::kGenerationFailed:
      return "generation_failed";
    case RejectionReason::kNoPerturbation:
      return "no_perturbation";
    case RejectionReason::kJudgeRejected:
      return "judge_rejected";
    case RejectionReason::kJudgeUnreachable:
      return "judge_unreachable";
  }
  return "generation_failed";
}

namespace {

struct TaskOutcome {
  bool accepted = false;
  ContrastPair pair;
  RejectionEntry rejection;
};

TaskOutcome RunTask(const NliExample& anchor, Label target,
                    LlmClient& generator, std::span<LlmClient* const> judges,
                    const SynthesisOptions& options) {
  TaskOutcome out;
  const std::string artifact =
      anchor.artifact_ngram ? anchor.artifact_ngram->Text() : std::string();
  auto reject = [&](RejectionReason reason, std::string detail) {
    out.rejection = {anchor.id, artifact, anchor.label, target, reason,
                     std::move(detail)};
    return out;
  };

  std::string new_premise;
  std::optional<ResponseError> last_parse_error;
  for (int attempt = 0; attempt < std::max(1, options.generation_attempts);
       ++attempt) {
    LlmClient::Completion completion;
    try {
      completion =
          generator.Complete(RenderGenerationPrompt({anchor, target, attempt}));
    } catch (const LlmError& e) {
      return reject(RejectionReason::kGenerationFailed, e.what());
    }
    try {
      new_premise = ParseGenerationResponse(completion.text, anchor.premise);
      last_parse_error.reset();
      break;
    } catch (const ResponseError& e) {
      last_parse_error = e;
    }
  }
  if (last_parse_error) {
    const bool same = last_parse_error->kind() ==
                      ResponseError::Kind::kNoPerturbation;
    return reject(same ? RejectionReason::kNoPerturbation
                       : RejectionReason::kGenerationFailed,
                  last_parse_error->what());
  }

  const std::string judge_prompt =
      RenderJudgePrompt({anchor.premise, anchor.hypothesis, new_premise, target});
  std::vector<JudgeVerdict> verdicts;
  std::vector<std::string> unreachable;
  std::vector<std::string> malformed;
  for (LlmClient* judge : judges) {
    const std::string& judge_id = judge->config().model_id;
    bool got = false;
    for (int ask = 0; ask < std::max(1, options.judge_asks) && !got; ++ask) {
      LlmClient::Completion completion;
      try {
        completion = judge->Complete(judge_prompt);
      } catch (const LlmError& e) {
        unreachable.push_back(judge_id + ": " + e.what());
        break;
      }
      try {
        verdicts.push_back(ParseJudgeVerdict(completion.text, judge_id));
        got = true;
      } catch (const ResponseError& e) {
        if (ask + 1 >= std::max(1, options.judge_asks)) {
          malformed.push_back(judge_id + ": " + e.what());
        }
      }
    }
  }

  if (!ConsensusFilter(verdicts, judges.size())) {
    for (const auto& v : verdicts) {
      if (!v.valid) {
        return reject(RejectionReason::kJudgeRejected,
                      v.judge_id + ": " + v.reasoning);
      }
    }
    if (!malformed.empty()) {
      return reject(RejectionReason::kJudgeRejected, malformed.front());
    }
    return reject(RejectionReason::kJudgeUnreachable,
                  unreachable.empty() ? "missing verdict" : unreachable.front());
  }

  out.accepted = true;
  out.pair.pair_id = anchor.id + "#cf";
  out.pair.anchor = anchor;
  out.pair.anchor.pair_id = out.pair.pair_id;
  NliExample& cf = out.pair.counterfactual;
  cf.id = out.pair.pair_id;
  cf.premise = std::move(new_premise);
  cf.hypothesis = anchor.hypothesis;
  cf.label = target;
  cf.provenance = Provenance::kSynthesized;
  cf.pair_id = out.pair.pair_id;
  cf.artifact_ngram = anchor.artifact_ngram;
  out.pair.verdicts = std::move(verdicts);
  return out;
}

}  // namespace

SynthesisResult GenerateContrastSet(const AnchorSet& anchors,
                                    LlmClient& generator,
                                    std::span<LlmClient* const> judges,
                                    const SynthesisOptions& options) {
  if (judges.empty()) throw InputError("judge panel must have >= 1 member");

  std::vector<const NliExample*> order;
  order.reserve(anchors.anchors.size());
  std::unordered_set<std::string> seen;
  for (const auto& a : anchors.anchors) {
    if (!seen.insert(a.id).second) {
      throw InputError("duplicate anchor id '" + a.id + "'");
    }
    if (!a.artifact_ngram) {
      throw InputError("anchor '" + a.id + "' has no artifact n-gram");
    }
    order.push_back(&a);
  }
  std::sort(order.begin(), order.end(),
            [](const NliExample* a, const NliExample* b) { return a->id < b->id; });

  SynthesisResult result;
  std::vector<Label> targets(order.size());
  std::uint64_t neutral_counter = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i]->label == Label::kNeutral) {
      targets[i] = AssignTargetLabel(Label::kNeutral, neutral_counter++);
    } else {
      targets[i] = AssignTargetLabel(order[i]->label, 0);
    }
  }

  int workers = options.workers;
  if (workers <= 0) {
    workers = generator.config().max_concurrency;
    for (LlmClient* j : judges) workers = std::max(workers, j->config().max_concurrency);
  }
  workers = std::max(1, std::min<int>(workers, static_cast<int>(order.size())));

  std::vector<TaskOutcome> outcomes(order.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= order.size()) return;
      try {
        outcomes[i] = RunTask(*order[i], targets[i], generator, judges, options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].accepted) {
      if (order[i]->label == Label::kNeutral) {
        if (targets[i] == Label::kEntailment) {
          ++result.neutral_to_entailment;
        } else {
          ++result.neutral_to_contradiction;
        }
      }
      result.pairs.push_back(std::move(outcomes[i].pair));
    } else {
      result.rejections.push_back(std::move(outcomes[i].rejection));
    }
  }
  return result;
}

Dataset ContrastSetToDataset(std::span<const ContrastPair> pairs,
                             std::string name) {
  Dataset d;
  d.name = std::move(name);
  d.examples.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    d.examples.push_back(p.anchor);
    d.examples.push_back(p.counterfactual);
  }
  return d;
}

void WriteRejectionLog(std::span<const RejectionEntry> rejections,
                       const std::filesystem::path& path) {
  std::ostringstream ss;
  for (const auto& r : rejections) {
    ordered_json j;
    j["anchor_id"] = r.anchor_id;
    j["artifact_ngram"] = r.artifact_ngram;
    j["anchor_label"] = LabelName(r.anchor_label);
    j["target_label"] = LabelName(r.target_label);
    j["reason"] = RejectionReasonName(r.reason);
    j["detail"] = r.detail;
    ss << j.dump(-1, ' ', false, ordered_json::error_handler_t::replace) << '\n';
  }
  WriteFileAtomic(path, ss.str());
}

void WriteVerdicts(std::span<const ContrastPair> pairs,
                   const std::filesystem::path& path) {
  std::ostringstream ss;
  for (const auto& p : pairs) {
    for (const auto& v : p.verdicts) {
      ordered_json j;
      j["pair_id"] = p.pair_id;
      j["judge_id"] = v.judge_id;
      j["valid"] = v.valid;
      j["reasoning"] = v.reasoning;
      ss << j.dump(-1, ' ', false, ordered_json::error_handler_t::replace)
         << '\n';
    }
  }
  WriteFileAtomic(path, ss.str());
}

std::vector<std::string> AuditContrastSet(const Dataset& contrast) {
  std::vector<std::string> problems;
  std::map<std::string, std::vector<const NliExample*>> groups;
  std::unordered_set<std::string> ids;
  for (const auto& ex : contrast.examples) {
    if (!ids.insert(ex.id).second) {
      problems.push_back("duplicate example id '" + ex.id + "'");
    }
    if (!ex.pair_id) {
      problems.push_back("example '" + ex.id + "' has no pair_id (unpaired)");
      continue;
    }
    groups[*ex.pair_id].push_back(&ex);
  }
  for (const auto& [pair_id, members] : groups) {
    const std::string where = "pair '" + pair_id + "': ";
    if (members.size() != 2) {
      problems.push_back(where + "expected 2 members, found " +
                         std::to_string(members.size()) + " (unpaired)");
      continue;
    }
    const NliExample* anchor = nullptr;
    const NliExample* cf = nullptr;
    for (const NliExample* e : members) {
      (e->provenance == Provenance::kOriginal ? anchor : cf) = e;
    }
    if (anchor == nullptr || cf == nullptr) {
      problems.push_back(where +
                         "needs one original anchor and one synthesized "
                         "counterfactual");
      continue;
    }
    if (anchor->hypothesis != cf->hypothesis) {
      problems.push_back(where + "hypotheses differ");
    }
    if (anchor->label == cf->label) {
      problems.push_back(where + "labels are not flipped");
    }
    if (anchor->premise == cf->premise) {
      problems.push_back(where + "premise was not perturbed");
    }
    if (!cf->artifact_ngram || !anchor->artifact_ngram ||
        *cf->artifact_ngram != *anchor->artifact_ngram) {
      problems.push_back(where + "artifact n-gram missing or inconsistent");
    } else if (!ContainsNgram(anchor->hypothesis, *anchor->artifact_ngram)) {
      problems.push_back(where + "hypothesis does not contain artifact '" +
                         anchor->artifact_ngram->Text() + "'");
    }
  }
  return problems;
}

}  // namespace nlidebias
