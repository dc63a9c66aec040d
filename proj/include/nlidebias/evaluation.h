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

#ifndef NLIDEBIAS_EVALUATION_H_
#define NLIDEBIAS_EVALUATION_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlidebias/artifact_stats.h"
#include "nlidebias/corpus.h"

namespace nlidebias {

struct PredictionRecord {
  std::string id;
  Label predicted = Label::kEntailment;
};

// jsonl of {"id": ..., "predicted": "<label>"}.
std::vector<PredictionRecord> LoadPredictions(const std::filesystem::path& path);
std::vector<PredictionRecord> ParsePredictions(std::istream& in);
void WritePredictions(std::span<const PredictionRecord> preds,
                      const std::filesystem::path& path);

struct AccuracyResult {
  std::size_t n = 0;        // predictions scored
  std::size_t correct = 0;
  double accuracy = 0.0;
  // nullopt for labels with no scored gold example.
  std::array<std::optional<double>, kNumLabels> per_class{};
  double coverage = 0.0;    // fraction of gold ids with a prediction
};

// Scores predictions against gold over the predicted ids. Throws InputError
// for ids missing from gold and for duplicate prediction ids.
AccuracyResult Accuracy(const Dataset& gold,
                        std::span<const PredictionRecord> preds);

struct ConsistencyResult {
  std::size_t n_pairs = 0;        // pairs with both members predicted
  std::size_t consistent = 0;     // ... and both correct
  std::size_t incomplete_pairs = 0;
  double consistency = 0.0;
};

// (# pairs with both members correct) / (# pairs). Every pair_id in gold must
// have exactly two members (InputError naming the pair otherwise). Pairs with
// a missing prediction are counted in incomplete_pairs, not as failures.
ConsistencyResult Consistency(const Dataset& gold,
                              std::span<const PredictionRecord> preds);

struct EvalReport {
  std::size_t n = 0;
  double accuracy = 0.0;
  std::array<std::optional<double>, kNumLabels> per_class_accuracy{};
  std::size_t n_pairs = 0;
  std::optional<double> consistency;
  double coverage = 0.0;
  // False when coverage < 1; headline numbers need full coverage.
  bool complete = false;

  nlohmann::ordered_json ToJson() const;
};

EvalReport Evaluate(const Dataset& gold,
                    std::span<const PredictionRecord> preds);

// Human-readable summary table.
void PrintReport(const EvalReport& report, std::string_view title,
                 std::ostream& out);

struct NeutralizationRow {
  Ngram ngram;
  Label label = Label::kContradiction;
  std::optional<double> original_p;        // P(l|w) in the original counts
  std::optional<double> contrast_p;        // over pairs anchored on w
  std::optional<double> contrast_p_contained;  // over all examples containing w
  std::size_t contrast_pairs = 0;
  bool missing = false;                    // w absent from the contrast set

  std::optional<double> Delta() const;
};

struct ArtifactKey {
  Ngram ngram;
  Label label = Label::kContradiction;
};

// Artifacts as (n-gram, anchor label), in first-seen order of the contrast
// set's anchors.
std::vector<ArtifactKey> ArtifactsFromContrastSet(const Dataset& contrast);

// P(l|w) before and after, per artifact. Artifacts absent from the contrast
// set are reported with missing = true.
std::vector<NeutralizationRow> NeutralizationReport(
    const NgramLabelCounts* original, const Dataset& contrast,
    std::span<const ArtifactKey> artifacts);

void PrintNeutralization(std::span<const NeutralizationRow> rows,
                         std::ostream& out);

// Label fractions; they sum to 1. Throws InputError on an empty dataset.
std::array<double, kNumLabels> ClassDistribution(const Dataset& dataset);

// Statistical hypothesis-only stand-in: score(l) = sum over the hypothesis
// n-grams of max(0, lf_lmi(w, l)); predict the argmax. Ties (including the
// all-zero case) go to the tied label with the most training examples, then
// entailment < neutral < contradiction.
class HypothesisOnlyRuleClassifier {
 public:
  explicit HypothesisOnlyRuleClassifier(const NgramLabelCounts& counts);

  std::array<double, kNumLabels> Scores(std::string_view hypothesis) const;
  Label Predict(const NliExample& example) const;

  // OpenMP over examples.
  std::vector<PredictionRecord> PredictBatch(const Dataset& dataset) const;
  // Serial reference for PredictBatch.
  std::vector<PredictionRecord> PredictBatchSerial(const Dataset& dataset) const;

  Label majority_label() const { return label_order_.front(); }

 private:
  Label Resolve(const std::array<double, kNumLabels>& scores) const;

  const NgramLabelCounts& counts_;
  // Labels by training frequency (desc), then fixed order.
  std::array<Label, kNumLabels> label_order_;
};

struct ScalingPoint {
  std::size_t n = 0;
  EvalReport original;
  EvalReport contrast;
};

// CSV N,orig_accuracy,contrast_accuracy,consistency sorted by N. Throws
// InputError on duplicate N or no points.
void WriteScalingCsv(std::vector<ScalingPoint> points, std::ostream& out);
void WriteScalingCsv(std::vector<ScalingPoint> points,
                     const std::filesystem::path& path);

}  // namespace nlidebias

#endif  // NLIDEBIAS_EVALUATION_H_
