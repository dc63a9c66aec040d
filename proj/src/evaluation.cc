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

#include "nlidebias/evaluation.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "nlidebias/error.h"
#include "nlidebias/util.h"

namespace nlidebias {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<PredictionRecord> ParsePredictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (Trim(raw).empty()) continue;
    json row;
    try {
      row = json::parse(raw);
    } catch (const json::parse_error&) {
      throw InputError("predictions: invalid JSON at line " +
                       std::to_string(line));
    }
    if (!row.is_object() || !row.contains("id") || !row.contains("predicted") ||
        !row["id"].is_string() || !row["predicted"].is_string()) {
      throw InputError("predictions: need string fields id and predicted at line " +
                       std::to_string(line));
    }
    const auto text = row["predicted"].get<std::string>();
    auto label = ParseLabel(text);
    if (!label) {
      throw InputError("unknown label '" + text + "' at line " +
                       std::to_string(line));
    }
    out.push_back({row["id"].get<std::string>(), *label});
  }
  return out;
}

std::vector<PredictionRecord> LoadPredictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read predictions: " + path.string());
  return ParsePredictions(in);
}

void WritePredictions(std::span<const PredictionRecord> preds,
                      const std::filesystem::path& path) {
  std::ostringstream ss;
  for (const auto& p : preds) {
    ordered_json j;
    j["id"] = p.id;
    j["predicted"] = LabelName(p.predicted);
    ss << j.dump() << '\n';
  }
  WriteFileAtomic(path, ss.str());
}

namespace {

// id -> predicted label, validated against gold.
std::unordered_map<std::string_view, Label> IndexPredictions(
    const Dataset& gold, std::span<const PredictionRecord> preds) {
  std::unordered_set<std::string_view> gold_ids;
  gold_ids.reserve(gold.size());
  for (const auto& ex : gold.examples) gold_ids.insert(ex.id);
  std::unordered_map<std::string_view, Label> out;
  out.reserve(preds.size());
  for (const auto& p : preds) {
    if (!gold_ids.contains(p.id)) {
      throw InputError("prediction id '" + p.id + "' not in gold set");
    }
    if (!out.emplace(p.id, p.predicted).second) {
      throw InputError("duplicate prediction id '" + p.id + "'");
    }
  }
  return out;
}

}  // namespace

AccuracyResult Accuracy(const Dataset& gold,
                        std::span<const PredictionRecord> preds) {
  auto index = IndexPredictions(gold, preds);
  AccuracyResult r;
  std::array<std::size_t, kNumLabels> seen{}, hit{};
  for (const auto& ex : gold.examples) {
    auto it = index.find(ex.id);
    if (it == index.end()) continue;
    ++r.n;
    ++seen[LabelIndex(ex.label)];
    if (it->second == ex.label) {
      ++r.correct;
      ++hit[LabelIndex(ex.label)];
    }
  }
  r.accuracy = r.n == 0 ? 0.0 : static_cast<double>(r.correct) / r.n;
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    if (seen[l] > 0) r.per_class[l] = static_cast<double>(hit[l]) / seen[l];
  }
  r.coverage = gold.empty() ? 0.0 : static_cast<double>(r.n) / gold.size();
  return r;
}

ConsistencyResult Consistency(const Dataset& gold,
                              std::span<const PredictionRecord> preds) {
  auto index = IndexPredictions(gold, preds);
  std::map<std::string_view, std::vector<const NliExample*>> pairs;
  for (const auto& ex : gold.examples) {
    if (ex.pair_id) pairs[*ex.pair_id].push_back(&ex);
  }
  ConsistencyResult r;
  for (const auto& [pair_id, members] : pairs) {
    if (members.size() != 2) {
      throw InputError("unpaired member: pair '" + std::string(pair_id) +
                       "' has " + std::to_string(members.size()) +
                       " member(s), expected 2");
    }
    bool complete = true;
    bool both = true;
    for (const NliExample* m : members) {
      auto it = index.find(m->id);
      if (it == index.end()) {
        complete = false;
        break;
      }
      both = both && it->second == m->label;
    }
    if (!complete) {
      ++r.incomplete_pairs;
      continue;
    }
    ++r.n_pairs;
    if (both) ++r.consistent;
  }
  r.consistency =
      r.n_pairs == 0 ? 0.0 : static_cast<double>(r.consistent) / r.n_pairs;
  return r;
}

EvalReport Evaluate(const Dataset& gold,
                    std::span<const PredictionRecord> preds) {
  const AccuracyResult acc = Accuracy(gold, preds);
  EvalReport rep;
  rep.n = gold.size();
  rep.accuracy = acc.accuracy;
  rep.per_class_accuracy = acc.per_class;
  rep.coverage = acc.coverage;
  rep.complete = acc.n == gold.size() && !gold.empty();
  const bool paired = std::any_of(gold.examples.begin(), gold.examples.end(),
                                  [](const NliExample& e) { return e.pair_id.has_value(); });
  if (paired) {
    const ConsistencyResult c = Consistency(gold, preds);
    rep.n_pairs = c.n_pairs;
    rep.consistency = c.consistency;
  }
  return rep;
}

namespace {

ordered_json Fraction(std::optional<double> v) {
  return v ? ordered_json(std::stod(FormatFixed(*v, 4))) : ordered_json();
}

}  // namespace

ordered_json EvalReport::ToJson() const {
  ordered_json j;
  j["n"] = n;
  j["accuracy"] = Fraction(accuracy);
  ordered_json per_class;
  for (Label l : kAllLabels) {
    per_class[std::string(LabelName(l))] =
        Fraction(per_class_accuracy[LabelIndex(l)]);
  }
  j["per_class_accuracy"] = per_class;
  j["n_pairs"] = n_pairs;
  j["consistency"] = Fraction(consistency);
  j["coverage"] = Fraction(coverage);
  j["complete"] = complete;
  return j;
}

void PrintReport(const EvalReport& report, std::string_view title,
                 std::ostream& out) {
  auto pct = [](std::optional<double> v) {
    return v ? FormatFixed(*v * 100.0, 2) + "%" : std::string("n/a");
  };
  out << title << '\n';
  out << "  examples      " << report.n << '\n';
  out << "  coverage      " << pct(report.coverage)
      << (report.complete ? "" : "  [INCOMPLETE: headline numbers not valid]")
      << '\n';
  out << "  accuracy      " << pct(report.accuracy) << '\n';
  for (Label l : kAllLabels) {
    out << "    " << std::left << std::setw(14) << LabelName(l)
        << pct(report.per_class_accuracy[LabelIndex(l)]) << '\n';
  }
  if (report.consistency) {
    out << "  pairs         " << report.n_pairs << '\n';
    out << "  consistency   " << pct(report.consistency) << '\n';
  }
}

std::optional<double> NeutralizationRow::Delta() const {
  if (!original_p || !contrast_p) return std::nullopt;
  return *contrast_p - *original_p;
}

std::vector<ArtifactKey> ArtifactsFromContrastSet(const Dataset& contrast) {
  std::vector<ArtifactKey> out;
  for (const auto& ex : contrast.examples) {
    if (ex.provenance != Provenance::kOriginal || !ex.artifact_ngram) continue;
    const bool known = std::any_of(out.begin(), out.end(), [&](const ArtifactKey& k) {
      return k.ngram == *ex.artifact_ngram && k.label == ex.label;
    });
    if (!known) out.push_back({*ex.artifact_ngram, ex.label});
  }
  return out;
}

std::vector<NeutralizationRow> NeutralizationReport(
    const NgramLabelCounts* original, const Dataset& contrast,
    std::span<const ArtifactKey> artifacts) {
  // Tokenize each hypothesis once.
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(contrast.size());
  for (const auto& ex : contrast.examples) tokens.push_back(Tokenize(ex.hypothesis));

  std::vector<NeutralizationRow> rows;
  for (const auto& art : artifacts) {
    NeutralizationRow row;
    row.ngram = art.ngram;
    row.label = art.label;
    if (original != nullptr) {
      const std::uint64_t freq = original->Freq(art.ngram);
      if (freq > 0) {
        row.original_p =
            static_cast<double>(original->Joint(art.ngram, art.label)) / freq;
      }
    }
    // Pairs whose anchor carries this artifact under this label.
    std::unordered_set<std::string_view> pair_ids;
    for (const auto& ex : contrast.examples) {
      if (ex.provenance == Provenance::kOriginal && ex.pair_id &&
          ex.artifact_ngram && *ex.artifact_ngram == art.ngram &&
          ex.label == art.label) {
        pair_ids.insert(*ex.pair_id);
      }
    }
    std::size_t anchored = 0, anchored_hit = 0;
    std::size_t contained = 0, contained_hit = 0;
    const auto& needle = art.ngram.tokens();
    for (std::size_t i = 0; i < contrast.size(); ++i) {
      const NliExample& ex = contrast.examples[i];
      if (ex.pair_id && pair_ids.contains(*ex.pair_id)) {
        ++anchored;
        if (ex.label == art.label) ++anchored_hit;
      }
      const auto& t = tokens[i];
      bool has = false;
      for (std::size_t p = 0; !has && p + needle.size() <= t.size(); ++p) {
        has = std::equal(needle.begin(), needle.end(), t.begin() + p);
      }
      if (has) {
        ++contained;
        if (ex.label == art.label) ++contained_hit;
      }
    }
    row.contrast_pairs = pair_ids.size();
    row.missing = contained == 0 && anchored == 0;
    if (anchored > 0) {
      row.contrast_p = static_cast<double>(anchored_hit) / anchored;
    }
    if (contained > 0) {
      row.contrast_p_contained = static_cast<double>(contained_hit) / contained;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void PrintNeutralization(std::span<const NeutralizationRow> rows,
                         std::ostream& out) {
  auto f = [](std::optional<double> v) {
    return v ? FormatFixed(*v, 4) : std::string("n/a");
  };
  out << std::left << std::setw(24) << "ngram" << std::setw(15) << "label"
      << std::setw(8) << "pairs" << std::setw(12) << "original" << std::setw(12)
      << "contrast" << "delta\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(24) << r.ngram.Text() << std::setw(15)
        << LabelName(r.label) << std::setw(8) << r.contrast_pairs
        << std::setw(12) << f(r.original_p) << std::setw(12)
        << (r.missing ? std::string("missing") : f(r.contrast_p))
        << f(r.Delta()) << '\n';
  }
}

std::array<double, kNumLabels> ClassDistribution(const Dataset& dataset) {
  if (dataset.empty()) {
    throw InputError("class distribution of empty dataset '" + dataset.name + "'");
  }
  std::array<std::size_t, kNumLabels> counts{};
  for (const auto& ex : dataset.examples) ++counts[LabelIndex(ex.label)];
  std::array<double, kNumLabels> out{};
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    out[l] = static_cast<double>(counts[l]) / dataset.size();
  }
  return out;
}

HypothesisOnlyRuleClassifier::HypothesisOnlyRuleClassifier(
    const NgramLabelCounts& counts)
    : counts_(counts), label_order_(kAllLabels) {
  std::stable_sort(label_order_.begin(), label_order_.end(),
                   [&](Label a, Label b) {
                     return counts_.LabelExamples(a) > counts_.LabelExamples(b);
                   });
}

std::array<double, kNumLabels> HypothesisOnlyRuleClassifier::Scores(
    std::string_view hypothesis) const {
  std::array<double, kNumLabels> scores{};
  auto tokens = Tokenize(hypothesis);
  std::string buffer;
  ForEachNgramText(tokens, counts_.order(), buffer, [&](std::string_view gram) {
    for (Label l : kAllLabels) {
      if (auto v = LfLmiOrNull(counts_, gram, l); v && *v > 0.0) {
        scores[LabelIndex(l)] += *v;
      }
    }
  });
  return scores;
}

Label HypothesisOnlyRuleClassifier::Resolve(
    const std::array<double, kNumLabels>& scores) const {
  const double best = *std::max_element(scores.begin(), scores.end());
  for (Label l : label_order_) {
    if (scores[LabelIndex(l)] == best) return l;
  }
  return label_order_.front();
}

Label HypothesisOnlyRuleClassifier::Predict(const NliExample& example) const {
  return Resolve(Scores(example.hypothesis));
}

std::vector<PredictionRecord> HypothesisOnlyRuleClassifier::PredictBatch(
    const Dataset& dataset) const {
  std::vector<PredictionRecord> out(dataset.size());
  const auto size = static_cast<std::ptrdiff_t>(dataset.size());
#pragma omp parallel for schedule(dynamic, 512)
  for (std::ptrdiff_t i = 0; i < size; ++i) {
    const auto& ex = dataset.examples[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = {ex.id, Predict(ex)};
  }
  return out;
}

std::vector<PredictionRecord> HypothesisOnlyRuleClassifier::PredictBatchSerial(
    const Dataset& dataset) const {
  std::vector<PredictionRecord> out;
  out.reserve(dataset.size());
  for (const auto& ex : dataset.examples) out.push_back({ex.id, Predict(ex)});
  return out;
}

void WriteScalingCsv(std::vector<ScalingPoint> points, std::ostream& out) {
  if (points.empty()) throw InputError("scaling curve needs at least one point");
  std::sort(points.begin(), points.end(),
            [](const ScalingPoint& a, const ScalingPoint& b) { return a.n < b.n; });
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].n == points[i - 1].n) {
      throw InputError("duplicate scaling point N=" + std::to_string(points[i].n));
    }
  }
  out << "N,orig_accuracy,contrast_accuracy,consistency\n";
  for (const auto& p : points) {
    out << p.n << ',' << FormatFixed(p.original.accuracy, 4) << ','
        << FormatFixed(p.contrast.accuracy, 4) << ','
        << (p.contrast.consistency ? FormatFixed(*p.contrast.consistency, 4)
                                   : std::string())
        << '\n';
  }
}

void WriteScalingCsv(std::vector<ScalingPoint> points,
                     const std::filesystem::path& path) {
  std::ostringstream ss;
  WriteScalingCsv(std::move(points), ss);
  WriteFileAtomic(path, ss.str());
}

}  // namespace nlidebias
