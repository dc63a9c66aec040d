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

#include "nlidebias/corpus.h"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "nlidebias/error.h"
#include "nlidebias/util.h"

namespace nlidebias {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view LabelName(Label label) {
  switch (label) {
    case Label::kEntailment:
      return "entailment";
    case Label::kNeutral:
      return "neutral";
    case Label::kContradiction:
      return "contradiction";
  }
  return "unknown";
}

std::string_view LabelDisplayName(Label label) {
  switch (label) {
    case Label::kEntailment:
      return "Entailment";
    case Label::kNeutral:
      return "Neutral";
    case Label::kContradiction:
      return "Contradiction";
  }
  return "Unknown";
}

std::optional<Label> ParseLabel(std::string_view text) {
  for (Label l : kAllLabels) {
    if (text == LabelName(l)) return l;
  }
  return std::nullopt;
}

std::string_view ProvenanceName(Provenance p) {
  return p == Provenance::kOriginal ? "original" : "synthesized";
}

std::optional<Provenance> ParseProvenance(std::string_view text) {
  if (text == "original") return Provenance::kOriginal;
  if (text == "synthesized") return Provenance::kSynthesized;
  return std::nullopt;
}

Ngram::Ngram(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw InputError("n-gram must have at least one token");
  for (const auto& t : tokens_) {
    if (t.empty()) throw InputError("n-gram tokens must be non-empty");
    if (t.find_first_of(" \t\r\n") != std::string::npos) {
      throw InputError("n-gram token contains whitespace: '" + t + "'");
    }
  }
}

Ngram Ngram::Parse(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream ss{std::string(text)};
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  if (tokens.empty()) throw InputError("empty n-gram");
  return Ngram(std::move(tokens));
}

std::string Ngram::Text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens_[i];
  }
  return out;
}

std::optional<DatasetFormat> ParseDatasetFormat(std::string_view text) {
  if (text == "jsonl") return DatasetFormat::kJsonl;
  if (text == "tsv") return DatasetFormat::kTsv;
  return std::nullopt;
}

DatasetFormat GuessDatasetFormat(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  if (ext == ".tsv" || ext == ".txt") return DatasetFormat::kTsv;
  return DatasetFormat::kJsonl;
}

namespace {

std::string AtLine(std::size_t line) { return " at line " + std::to_string(line); }

class RecordSink {
 public:
  RecordSink(std::string name, LoadResult& result)
      : name_(std::move(name)), result_(result) {}

  // Skips (and tallies) "-" labels and blank texts; everything else becomes
  // an example or an InputError.
  void Add(std::size_t line, std::optional<std::string> id,
           std::string_view premise, std::string_view hypothesis,
           std::string_view label_text,
           Provenance provenance = Provenance::kOriginal,
           std::optional<std::string> pair_id = std::nullopt,
           std::optional<Ngram> artifact = std::nullopt) {
    if (label_text == "-") {
      ++result_.stats.unlabeled_skipped;
      return;
    }
    auto label = ParseLabel(label_text);
    if (!label) {
      throw InputError("unknown label '" + std::string(label_text) + "'" +
                       AtLine(line));
    }
    premise = Trim(premise);
    hypothesis = Trim(hypothesis);
    if (premise.empty() || hypothesis.empty()) {
      ++result_.stats.empty_skipped;
      return;
    }
    NliExample ex;
    ex.id = id ? *id : name_ + ":" + std::to_string(line);
    ex.premise = std::string(premise);
    ex.hypothesis = std::string(hypothesis);
    ex.label = *label;
    ex.provenance = provenance;
    ex.pair_id = std::move(pair_id);
    ex.artifact_ngram = std::move(artifact);
    Push(line, std::move(ex));
  }

  void Push(std::size_t line, NliExample ex) {
    if (!ids_.insert(ex.id).second) {
      throw InputError("duplicate id '" + ex.id + "'" + AtLine(line));
    }
    result_.dataset.examples.push_back(std::move(ex));
  }

 private:
  std::string name_;
  LoadResult& result_;
  std::unordered_set<std::string> ids_;
};

const json* FindField(const json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = obj.find(k);
    if (it != obj.end()) return &*it;
  }
  return nullptr;
}

std::string RequireString(const json& obj,
                          std::initializer_list<const char*> keys,
                          std::size_t line) {
  const json* v = FindField(obj, keys);
  if (v == nullptr || v->is_null()) {
    throw InputError("malformed record: missing field '" +
                     std::string(*keys.begin()) + "'" + AtLine(line));
  }
  if (!v->is_string()) {
    throw InputError("malformed record: field '" + std::string(*keys.begin()) +
                     "' is not a string" + AtLine(line));
  }
  return v->get<std::string>();
}

std::optional<std::string> OptionalString(const json& obj, const char* key,
                                          std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw InputError("malformed record: field '" + std::string(key) +
                     "' is not a string" + AtLine(line));
  }
  return it->get<std::string>();
}

void ParseJsonl(std::istream& in, RecordSink& sink) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (Trim(raw).empty()) continue;
    json obj;
    try {
      obj = json::parse(raw);
    } catch (const json::parse_error&) {
      throw InputError("malformed record: invalid JSON" + AtLine(line));
    }
    if (!obj.is_object()) {
      throw InputError("malformed record: not an object" + AtLine(line));
    }
    std::string label = RequireString(obj, {"label", "gold_label"}, line);
    std::string premise = RequireString(obj, {"premise", "sentence1"}, line);
    std::string hypothesis =
        RequireString(obj, {"hypothesis", "sentence2"}, line);
    auto id = OptionalString(obj, "id", line);
    auto provenance_text = OptionalString(obj, "provenance", line);
    auto pair_id = OptionalString(obj, "pair_id", line);
    auto artifact = OptionalString(obj, "artifact_ngram", line);

    Provenance provenance = Provenance::kOriginal;
    if (provenance_text) {
      auto p = ParseProvenance(*provenance_text);
      if (!p) {
        throw InputError("unknown provenance '" + *provenance_text + "'" +
                         AtLine(line));
      }
      provenance = *p;
    }
    if (provenance == Provenance::kSynthesized && (!pair_id || !artifact)) {
      throw InputError(
          "malformed record: synthesized example needs pair_id and "
          "artifact_ngram" +
          AtLine(line));
    }
    std::optional<Ngram> ngram;
    if (artifact) ngram = Ngram::Parse(*artifact);
    sink.Add(line, std::move(id), premise, hypothesis, label, provenance,
             std::move(pair_id), std::move(ngram));
  }
}

std::vector<std::string_view> SplitTabs(std::string_view row) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = row.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(row.substr(start));
      break;
    }
    cols.push_back(row.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

void ParseTsv(std::istream& in, RecordSink& sink) {
  std::string raw;
  std::size_t line = 0;
  std::size_t label_col = 0, premise_col = 0, hypothesis_col = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view row = raw;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (!have_header) {
      auto cols = SplitTabs(row);
      auto find = [&](std::string_view name) -> std::size_t {
        for (std::size_t i = 0; i < cols.size(); ++i) {
          if (cols[i] == name) return i;
        }
        throw InputError("tsv header missing column '" + std::string(name) +
                         "'" + AtLine(line));
      };
      label_col = find("gold_label");
      premise_col = find("sentence1");
      hypothesis_col = find("sentence2");
      have_header = true;
      continue;
    }
    if (Trim(row).empty()) continue;
    auto cols = SplitTabs(row);
    std::size_t need = std::max({label_col, premise_col, hypothesis_col});
    if (cols.size() <= need) {
      throw InputError("malformed record: expected at least " +
                       std::to_string(need + 1) + " columns" + AtLine(line));
    }
    sink.Add(line, std::nullopt, cols[premise_col], cols[hypothesis_col],
             cols[label_col]);
  }
  if (!have_header) throw InputError("tsv file has no header row");
}

}  // namespace

LoadResult ParseDataset(std::istream& in, std::string name,
                        DatasetFormat format) {
  LoadResult result;
  result.dataset.name = name;
  RecordSink sink(std::move(name), result);
  if (format == DatasetFormat::kJsonl) {
    ParseJsonl(in, sink);
  } else {
    ParseTsv(in, sink);
  }
  return result;
}

LoadResult LoadDataset(const std::filesystem::path& path,
                       DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read dataset: " + path.string());
  return ParseDataset(in, path.stem().string(), format);
}

std::string ToJsonLine(const NliExample& ex) {
  ordered_json obj;
  obj["id"] = ex.id;
  obj["premise"] = ex.premise;
  obj["hypothesis"] = ex.hypothesis;
  obj["label"] = LabelName(ex.label);
  obj["provenance"] = ProvenanceName(ex.provenance);
  obj["pair_id"] = ex.pair_id ? ordered_json(*ex.pair_id) : ordered_json();
  obj["artifact_ngram"] = ex.artifact_ngram
                              ? ordered_json(ex.artifact_ngram->Text())
                              : ordered_json();
  return obj.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

void WriteDataset(const Dataset& dataset, std::ostream& out) {
  for (const auto& ex : dataset.examples) out << ToJsonLine(ex) << '\n';
}

void WriteDataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ostringstream ss;
  WriteDataset(dataset, ss);
  WriteFileAtomic(path, ss.str());
}

namespace {

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool IsSpaceByte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpaceByte(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !IsSpaceByte(text[i])) ++i;
    std::size_t end = i;
    while (start < end && !IsWordByte(text[start])) ++start;
    while (end > start && !IsWordByte(text[end - 1])) --end;
    if (start == end) continue;
    std::string tok(text.substr(start, end - start));
    for (char& c : tok) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::vector<Ngram> ExtractNgrams(std::span<const std::string> tokens,
                                 std::size_t n) {
  if (n == 0) throw InputError("n-gram order must be >= 1");
  std::vector<Ngram> out;
  if (tokens.size() < n) return out;
  out.reserve(tokens.size() - n + 1);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.emplace_back(std::vector<std::string>(tokens.begin() + i,
                                              tokens.begin() + i + n));
  }
  return out;
}

bool ContainsNgram(std::string_view text, const Ngram& ngram) {
  auto tokens = Tokenize(text);
  const auto& needle = ngram.tokens();
  if (needle.empty() || tokens.size() < needle.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), tokens.begin() + i)) {
      return true;
    }
  }
  return false;
}

}  // namespace nlidebias
