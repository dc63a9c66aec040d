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

#include "nlidebias/artifact_stats.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "nlidebias/error.h"
#include "nlidebias/util.h"

namespace nlidebias {

std::string_view TextFieldName(TextField field) {
  switch (field) {
    case TextField::kHypothesis:
      return "hypothesis";
    case TextField::kPremise:
      return "premise";
    case TextField::kBoth:
      return "both";
  }
  return "hypothesis";
}

std::optional<TextField> ParseTextField(std::string_view text) {
  if (text == "hypothesis") return TextField::kHypothesis;
  if (text == "premise") return TextField::kPremise;
  if (text == "both") return TextField::kBoth;
  return std::nullopt;
}

NgramLabelCounts::NgramLabelCounts(std::size_t order) : order_(order) {}

std::uint64_t NgramLabelCounts::Joint(std::string_view ngram_text,
                                      Label label) const {
  auto it = table_.find(ngram_text);
  return it == table_.end() ? 0 : it->second[LabelIndex(label)];
}

std::uint64_t NgramLabelCounts::Freq(std::string_view ngram_text) const {
  auto it = table_.find(ngram_text);
  if (it == table_.end()) return 0;
  return it->second[0] + it->second[1] + it->second[2];
}

std::uint64_t NgramLabelCounts::Total() const {
  return label_totals_[0] + label_totals_[1] + label_totals_[2];
}

std::uint64_t NgramLabelCounts::Examples() const {
  return label_examples_[0] + label_examples_[1] + label_examples_[2];
}

void NgramLabelCounts::Add(std::string_view ngram_text, Label label,
                           std::uint64_t n) {
  auto it = table_.find(ngram_text);
  if (it == table_.end()) {
    it = table_.emplace(std::string(ngram_text), LabelCounts{}).first;
  }
  it->second[LabelIndex(label)] += n;
  label_totals_[LabelIndex(label)] += n;
}

void NgramLabelCounts::Merge(const NgramLabelCounts& other) {
  if (other.order_ != order_) {
    throw InputError("cannot merge counts of different n-gram orders");
  }
  table_.reserve(table_.size() + other.table_.size());
  for (const auto& [gram, c] : other.table_) {
    auto& mine = table_[gram];
    for (std::size_t l = 0; l < kNumLabels; ++l) mine[l] += c[l];
  }
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    label_totals_[l] += other.label_totals_[l];
    label_examples_[l] += other.label_examples_[l];
  }
}

void NgramLabelCounts::CheckInvariants() const {
  LabelCounts column{};
  for (const auto& [gram, c] : table_) {
    if (c[0] + c[1] + c[2] == 0) {
      throw IntegrityError("n-gram '" + gram + "' has zero frequency");
    }
    for (std::size_t l = 0; l < kNumLabels; ++l) column[l] += c[l];
  }
  if (column != label_totals_) {
    throw IntegrityError("joint counts do not sum to label totals");
  }
}

bool operator==(const NgramLabelCounts& a, const NgramLabelCounts& b) {
  return a.order_ == b.order_ && a.label_totals_ == b.label_totals_ &&
         a.label_examples_ == b.label_examples_ && a.table_ == b.table_;
}

std::string_view MetricName(Metric metric) {
  return metric == Metric::kLmi ? "lmi" : "lf_lmi";
}

std::optional<Metric> ParseMetric(std::string_view text) {
  if (text == "lmi") return Metric::kLmi;
  if (text == "lf_lmi" || text == "lf-lmi") return Metric::kLfLmi;
  return std::nullopt;
}

AssociationScore ScoreFromCounts(Ngram ngram, Label label,
                                 std::uint64_t joint_count, std::uint64_t freq,
                                 std::uint64_t label_total,
                                 std::uint64_t total) {
  if (joint_count == 0) {
    throw InputError("unseen pair: '" + ngram.Text() + "' never occurs with " +
                     std::string(LabelName(label)));
  }
  if (freq < joint_count || label_total == 0 || total < label_total) {
    throw InputError("inconsistent counts for '" + ngram.Text() + "'");
  }
  AssociationScore s;
  s.ngram = std::move(ngram);
  s.label = label;
  s.joint_count = joint_count;
  s.freq = freq;
  s.p_label_given_w =
      static_cast<double>(joint_count) / static_cast<double>(freq);
  s.p_label = static_cast<double>(label_total) / static_cast<double>(total);
  const double pmi = std::log(s.p_label_given_w / s.p_label);
  s.lmi = static_cast<double>(joint_count) * pmi;
  s.lf_lmi = std::log(static_cast<double>(joint_count)) * pmi;
  return s;
}

AssociationScore Score(const NgramLabelCounts& counts, const Ngram& ngram,
                       Label label) {
  const std::string text = ngram.Text();
  return ScoreFromCounts(ngram, label, counts.Joint(text, label),
                         counts.Freq(text), counts.LabelTotal(label),
                         counts.Total());
}

std::optional<double> LfLmiOrNull(const NgramLabelCounts& counts,
                                  std::string_view ngram_text, Label label) {
  auto it = counts.table().find(ngram_text);
  if (it == counts.table().end()) return std::nullopt;
  const LabelCounts& c = it->second;
  const std::uint64_t joint = c[LabelIndex(label)];
  if (joint == 0) return std::nullopt;
  const double p_w = static_cast<double>(joint) /
                     static_cast<double>(c[0] + c[1] + c[2]);
  const double p_l = static_cast<double>(counts.LabelTotal(label)) /
                     static_cast<double>(counts.Total());
  return std::log(static_cast<double>(joint)) * std::log(p_w / p_l);
}

namespace {

struct Candidate {
  const std::string* text;
  std::uint64_t joint;
  std::uint64_t freq;
  double value;
};

bool RanksBefore(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  if (a.joint != b.joint) return a.joint > b.joint;
  return *a.text < *b.text;
}

}  // namespace

Ranking RankTopK(const NgramLabelCounts& counts, Label label, std::size_t k,
                 Metric metric, std::uint64_t min_joint) {
  if (k == 0) throw InputError("top-k must be >= 1");
  Ranking ranking{label, metric, {}};
  const std::uint64_t label_total = counts.LabelTotal(label);
  const std::uint64_t total = counts.Total();
  if (label_total == 0) return ranking;

  const double p_label =
      static_cast<double>(label_total) / static_cast<double>(total);
  const std::uint64_t threshold = std::max<std::uint64_t>(min_joint, 1);
  std::vector<Candidate> candidates;
  for (const auto& [gram, c] : counts.table()) {
    const std::uint64_t joint = c[LabelIndex(label)];
    if (joint < threshold) continue;
    const std::uint64_t freq = c[0] + c[1] + c[2];
    const double pmi = std::log(
        (static_cast<double>(joint) / static_cast<double>(freq)) / p_label);
    const double weight = metric == Metric::kLmi
                              ? static_cast<double>(joint)
                              : std::log(static_cast<double>(joint));
    candidates.push_back({&gram, joint, freq, weight * pmi});
  }
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + keep,
                    candidates.end(), RanksBefore);
  ranking.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    const Candidate& c = candidates[i];
    ranking.entries.push_back(ScoreFromCounts(
        Ngram::Parse(*c.text), label, c.joint, c.freq, label_total, total));
  }
  return ranking;
}

namespace {

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Splits one CSV record written by CsvField. Quoted fields may hold commas
// and doubled quotes but not newlines (n-gram text never contains them).
std::vector<std::string> SplitCsvRecord(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

}  // namespace

void WriteArtifactReport(std::span<const Ranking> rankings, std::ostream& out) {
  out << "ngram,label,metric,score,joint_count,freq,p_label_given_w,p_label\n";
  for (const auto& r : rankings) {
    for (const auto& e : r.entries) {
      out << CsvField(e.ngram.Text()) << ',' << LabelName(e.label) << ','
          << MetricName(r.metric) << ',' << FormatFixed(e.Value(r.metric), 4)
          << ',' << e.joint_count << ',' << e.freq << ','
          << FormatFixed(e.p_label_given_w, 4) << ','
          << FormatFixed(e.p_label, 4) << '\n';
    }
  }
}

void WriteArtifactReport(std::span<const Ranking> rankings,
                         const std::filesystem::path& path) {
  std::ostringstream ss;
  WriteArtifactReport(rankings, ss);
  WriteFileAtomic(path, ss.str());
}

std::vector<Ranking> ReadArtifactReport(const std::filesystem::path& path) {
  std::istringstream in(ReadFile(path));
  std::string line;
  if (!std::getline(in, line) ||
      Trim(line) != "ngram,label,metric,score,joint_count,freq,"
                    "p_label_given_w,p_label") {
    throw InputError("not an artifact report (bad header): " + path.string());
  }
  std::vector<Ranking> rankings;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto f = SplitCsvRecord(line);
    const auto where = " at line " + std::to_string(line_no) + " of " +
                       path.string();
    if (f.size() != 8) throw InputError("artifact report: expected 8 fields" + where);
    const auto label = ParseLabel(f[1]);
    const auto metric = ParseMetric(f[2]);
    if (!label) throw InputError("artifact report: unknown label '" + f[1] + "'" + where);
    if (!metric) throw InputError("artifact report: unknown metric '" + f[2] + "'" + where);
    AssociationScore e;
    try {
      e.ngram = Ngram::Parse(f[0]);
      e.label = *label;
      const double score = std::stod(f[3]);
      (*metric == Metric::kLmi ? e.lmi : e.lf_lmi) = score;
      e.joint_count = std::stoull(f[4]);
      e.freq = std::stoull(f[5]);
      e.p_label_given_w = std::stod(f[6]);
      e.p_label = std::stod(f[7]);
    } catch (const std::logic_error&) {
      throw InputError("artifact report: malformed number" + where);
    }
    auto it = std::find_if(rankings.begin(), rankings.end(), [&](const Ranking& r) {
      return r.label == *label && r.metric == *metric;
    });
    if (it == rankings.end()) {
      rankings.push_back(Ranking{*label, *metric, {}});
      it = std::prev(rankings.end());
    }
    it->entries.push_back(std::move(e));
  }
  return rankings;
}

}  // namespace nlidebias
