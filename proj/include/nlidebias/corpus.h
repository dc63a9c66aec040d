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

#ifndef NLIDEBIAS_CORPUS_H_
#define NLIDEBIAS_CORPUS_H_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlidebias {

enum class Label : std::uint8_t {
  kEntailment = 0,
  kNeutral = 1,
  kContradiction = 2,
};

inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::kEntailment, Label::kNeutral, Label::kContradiction};

constexpr std::size_t LabelIndex(Label l) { return static_cast<std::size_t>(l); }

// "entailment" | "neutral" | "contradiction", the on-disk spelling.
std::string_view LabelName(Label label);
// "Entailment" | "Neutral" | "Contradiction", as substituted into prompts.
std::string_view LabelDisplayName(Label label);
// Accepts only the lowercase on-disk spelling.
std::optional<Label> ParseLabel(std::string_view text);

enum class Provenance : std::uint8_t { kOriginal, kSynthesized };

std::string_view ProvenanceName(Provenance p);
std::optional<Provenance> ParseProvenance(std::string_view text);

// A contiguous token sequence. The canonical text form joins tokens with a
// single space; since tokens never contain whitespace the two forms are
// interchangeable.
class Ngram {
 public:
  Ngram() = default;
  explicit Ngram(std::vector<std::string> tokens);

  // Splits on whitespace. Throws InputError on empty input.
  static Ngram Parse(std::string_view text);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t order() const { return tokens_.size(); }
  std::string Text() const;

  friend bool operator==(const Ngram&, const Ngram&) = default;
  friend auto operator<=>(const Ngram&, const Ngram&) = default;

 private:
  std::vector<std::string> tokens_;
};

struct NliExample {
  std::string id;
  std::string premise;
  std::string hypothesis;
  Label label = Label::kEntailment;
  Provenance provenance = Provenance::kOriginal;
  std::optional<std::string> pair_id;
  std::optional<Ngram> artifact_ngram;

  friend bool operator==(const NliExample&, const NliExample&) = default;
};

struct Dataset {
  std::string name;
  std::vector<NliExample> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
};

enum class DatasetFormat { kJsonl, kTsv };

std::optional<DatasetFormat> ParseDatasetFormat(std::string_view text);
// Picks tsv for .tsv/.txt extensions and jsonl otherwise.
DatasetFormat GuessDatasetFormat(const std::filesystem::path& path);

struct LoadStats {
  // Records whose gold label is the SNLI "-" marker (no annotator consensus).
  std::size_t unlabeled_skipped = 0;
  // Records whose premise or hypothesis is blank after trimming.
  std::size_t empty_skipped = 0;
};

struct LoadResult {
  Dataset dataset;
  LoadStats stats;
};

// Reads a dataset in file order. Missing ids become "<name>:<line_number>".
// Throws InputError naming the line for malformed records, unknown labels,
// and duplicate ids.
LoadResult LoadDataset(const std::filesystem::path& path, DatasetFormat format);
LoadResult ParseDataset(std::istream& in, std::string name,
                        DatasetFormat format);

// Canonical jsonl: one object per line with keys id, premise, hypothesis,
// label, provenance, pair_id, artifact_ngram (null when absent).
std::string ToJsonLine(const NliExample& example);
void WriteDataset(const Dataset& dataset, std::ostream& out);
void WriteDataset(const Dataset& dataset, const std::filesystem::path& path);

// Lowercases, splits on whitespace, trims leading/trailing non-alphanumeric
// characters from each token and drops tokens left empty. Bytes >= 0x80 count
// as alphanumeric so UTF-8 letters survive trimming.
std::vector<std::string> Tokenize(std::string_view text);

// All contiguous n-grams in order, duplicates preserved. Throws InputError for
// n == 0.
std::vector<Ngram> ExtractNgrams(std::span<const std::string> tokens,
                                 std::size_t n);

// Calls fn(std::string_view) with the canonical text of every contiguous
// n-gram, reusing one buffer. The hot path behind counting.
template <typename Fn>
void ForEachNgramText(std::span<const std::string> tokens, std::size_t n,
                      std::string& buffer, Fn&& fn) {
  if (n == 0 || tokens.size() < n) return;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    buffer.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j > 0) buffer.push_back(' ');
      buffer.append(tokens[i + j]);
    }
    fn(std::string_view(buffer));
  }
}

// True iff `ngram` occurs as a contiguous token run in Tokenize(text).
bool ContainsNgram(std::string_view text, const Ngram& ngram);

}  // namespace nlidebias

#endif  // NLIDEBIAS_CORPUS_H_
