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

#ifndef NLIDEBIAS_ARTIFACT_STATS_H_
#define NLIDEBIAS_ARTIFACT_STATS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nlidebias/corpus.h"

namespace nlidebias {

using LabelCounts = std::array<std::uint64_t, kNumLabels>;

// Which text of each example feeds the counts. kBoth counts premise and
// hypothesis n-grams separately (no n-gram spans the two).
enum class TextField { kHypothesis, kPremise, kBoth };

std::string_view TextFieldName(TextField field);
std::optional<TextField> ParseTextField(std::string_view text);

// Joint (n-gram, label) token counts plus the label marginals needed for the
// MLE estimates P(l|w) = count(w,l)/count(w) and P(l) = N_l/N. count(w) is
// not stored separately; it is the row sum of the joint counts, so the
// marginal invariants hold by construction.
class NgramLabelCounts {
 public:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  using Table =
      std::unordered_map<std::string, LabelCounts, StringHash, std::equal_to<>>;

  explicit NgramLabelCounts(std::size_t order = 2);

  std::size_t order() const { return order_; }

  std::uint64_t Joint(std::string_view ngram_text, Label label) const;
  std::uint64_t Joint(const Ngram& ngram, Label label) const {
    return Joint(ngram.Text(), label);
  }
  // count(w)
  std::uint64_t Freq(std::string_view ngram_text) const;
  std::uint64_t Freq(const Ngram& ngram) const { return Freq(ngram.Text()); }
  // N_l: number of n-gram tokens in examples of label l.
  std::uint64_t LabelTotal(Label label) const {
    return label_totals_[LabelIndex(label)];
  }
  // N
  std::uint64_t Total() const;
  // Number of counted examples per label (not n-gram tokens).
  std::uint64_t LabelExamples(Label label) const {
    return label_examples_[LabelIndex(label)];
  }
  std::uint64_t Examples() const;
  std::size_t DistinctNgrams() const { return table_.size(); }

  const Table& table() const { return table_; }

  void Add(std::string_view ngram_text, Label label, std::uint64_t n = 1);
  void AddExample(Label label) { ++label_examples_[LabelIndex(label)]; }
  // Commutative and associative: merging shards in any order gives the same
  // result as counting sequentially.
  void Merge(const NgramLabelCounts& other);

  // Throws IntegrityError if the column sums disagree with N_l.
  void CheckInvariants() const;

  friend bool operator==(const NgramLabelCounts& a, const NgramLabelCounts& b);

 private:
  std::size_t order_;
  Table table_;
  LabelCounts label_totals_{};
  LabelCounts label_examples_{};
};

// Counts every n-gram of the chosen field(s), duplicates included. Examples
// are sharded across OpenMP threads and the per-thread tables merged.
// Throws InputError on an empty dataset or n == 0.
NgramLabelCounts AccumulateCounts(const Dataset& dataset, std::size_t n,
                                  TextField field = TextField::kHypothesis);

// Single-threaded reference for AccumulateCounts.
NgramLabelCounts AccumulateCountsSerial(const Dataset& dataset, std::size_t n,
                                        TextField field = TextField::kHypothesis);

enum class Metric { kLmi, kLfLmi };

std::string_view MetricName(Metric metric);
std::optional<Metric> ParseMetric(std::string_view text);

struct AssociationScore {
  Ngram ngram;
  Label label = Label::kEntailment;
  std::uint64_t joint_count = 0;
  std::uint64_t freq = 0;
  double p_label_given_w = 0.0;
  double p_label = 0.0;
  // joint_count * ln(P(l|w) / P(l))
  double lmi = 0.0;
  // ln(joint_count) * ln(P(l|w) / P(l))
  double lf_lmi = 0.0;

  double Value(Metric metric) const {
    return metric == Metric::kLmi ? lmi : lf_lmi;
  }
};

// Both association measures from raw counts. Natural log throughout.
// Requires joint_count >= 1, freq >= joint_count, label_total >= 1, total >=
// label_total; throws InputError otherwise.
AssociationScore ScoreFromCounts(Ngram ngram, Label label,
                                 std::uint64_t joint_count,
                                 std::uint64_t freq, std::uint64_t label_total,
                                 std::uint64_t total);

// Throws InputError("unseen pair ...") when count(w,l) = 0.
AssociationScore Score(const NgramLabelCounts& counts, const Ngram& ngram,
                       Label label);

// Hot-loop lookup: nullopt when count(w,l) = 0.
std::optional<double> LfLmiOrNull(const NgramLabelCounts& counts,
                                  std::string_view ngram_text, Label label);

struct Ranking {
  Label label = Label::kContradiction;
  Metric metric = Metric::kLfLmi;
  std::vector<AssociationScore> entries;
};

inline constexpr std::uint64_t kDefaultMinJoint = 20;

// Top-k n-grams for `label`, descending by metric. Ties are broken by higher
// joint count, then lexicographic n-gram text. Entries with joint count below
// min_joint (and always those with joint count 0) are excluded.
Ranking RankTopK(const NgramLabelCounts& counts, Label label, std::size_t k,
                 Metric metric, std::uint64_t min_joint = kDefaultMinJoint);

// CSV with header ngram,label,metric,score,joint_count,freq,p_label_given_w,
// p_label; reals printed with 4 decimals.
void WriteArtifactReport(std::span<const Ranking> rankings, std::ostream& out);
void WriteArtifactReport(std::span<const Ranking> rankings,
                         const std::filesystem::path& path);

// Reads a report written by WriteArtifactReport back into rankings, one per
// (label, metric) in first-seen order, entries in file order. Scores are the
// 4-decimal values from the file.
std::vector<Ranking> ReadArtifactReport(const std::filesystem::path& path);

}  // namespace nlidebias

#endif  // NLIDEBIAS_ARTIFACT_STATS_H_
