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

#include <gtest/gtest.h>

#include <sstream>

#include "nlidebias/error.h"
#include "test_support.h"

namespace nlidebias {
namespace {

LoadResult ParseJsonl(const std::string& text, std::string name = "d") {
  std::istringstream in(text);
  return ParseDataset(in, std::move(name), DatasetFormat::kJsonl);
}

LoadResult ParseTsv(const std::string& text) {
  std::istringstream in(text);
  return ParseDataset(in, "snli", DatasetFormat::kTsv);
}

TEST(Labels, RoundTrip) {
  for (Label l : kAllLabels) EXPECT_EQ(ParseLabel(LabelName(l)), l);
  EXPECT_EQ(LabelDisplayName(Label::kContradiction), "Contradiction");
  EXPECT_FALSE(ParseLabel("Entailment"));
  EXPECT_FALSE(ParseLabel("-"));
}

TEST(Tokenize, LowercasesAndTrimsPunctuation) {
  EXPECT_EQ(Tokenize("Nobody is sleeping."),
            (std::vector<std::string>{"nobody", "is", "sleeping"}));
  EXPECT_EQ(Tokenize("  \"Hello,\"  world!! "),
            (std::vector<std::string>{"hello", "world"}));
}

TEST(Tokenize, KeepsInnerPunctuationAndDropsEmpty) {
  EXPECT_EQ(Tokenize("isn't ... well-known -- x"),
            (std::vector<std::string>{"isn't", "well-known", "x"}));
  EXPECT_TRUE(Tokenize("").empty());
  EXPECT_TRUE(Tokenize(" ?! ").empty());
}

TEST(Tokenize, Utf8BytesSurvive) {
  EXPECT_EQ(Tokenize("Café, naïve."),
            (std::vector<std::string>{"café", "naïve"}));
}

TEST(ExtractNgrams, BigramsInOrderWithDuplicates) {
  auto toks = Tokenize("a dog and a dog");
  auto grams = ExtractNgrams(toks, 2);
  ASSERT_EQ(grams.size(), 4u);
  EXPECT_EQ(grams[0].Text(), "a dog");
  EXPECT_EQ(grams[3].Text(), "a dog");
  EXPECT_EQ(grams[1].Text(), "dog and");
}

TEST(ExtractNgrams, EdgeCases) {
  auto one = Tokenize("hello");
  EXPECT_TRUE(ExtractNgrams(one, 2).empty());
  EXPECT_EQ(ExtractNgrams(one, 1).size(), 1u);
  EXPECT_THROW(ExtractNgrams(one, 0), InputError);
}

TEST(ForEachNgramText, MatchesExtractNgrams) {
  auto toks = Tokenize("the man is sleeping in the bed");
  for (std::size_t n = 1; n <= 4; ++n) {
    std::vector<std::string> via_fn;
    std::string buf;
    ForEachNgramText(toks, n, buf, [&](std::string_view g) {
      via_fn.emplace_back(g);
    });
    auto grams = ExtractNgrams(toks, n);
    ASSERT_EQ(via_fn.size(), grams.size());
    for (std::size_t i = 0; i < grams.size(); ++i) {
      EXPECT_EQ(via_fn[i], grams[i].Text());
    }
  }
}

TEST(Ngram, ParseAndCompare) {
  Ngram g = Ngram::Parse("  nobody   is ");
  EXPECT_EQ(g.Text(), "nobody is");
  EXPECT_EQ(g.order(), 2u);
  EXPECT_EQ(g, Ngram({"nobody", "is"}));
  EXPECT_LT(Ngram::Parse("a b"), Ngram::Parse("a c"));
  EXPECT_THROW(Ngram::Parse("  "), InputError);
}

TEST(ContainsNgram, TokenBoundaries) {
  EXPECT_TRUE(ContainsNgram("Nobody is home.", Ngram::Parse("nobody is")));
  EXPECT_FALSE(ContainsNgram("Somebody is home.", Ngram::Parse("nobody is")));
  EXPECT_FALSE(ContainsNgram("is nobody", Ngram::Parse("nobody is")));
}

TEST(LoadDataset, CanonicalJsonl) {
  auto r = ParseJsonl(
      R"({"id":"x1","premise":"A man.","hypothesis":"Nobody is.","label":"contradiction"})"
      "\n\n"
      R"({"premise":"P","hypothesis":"H","label":"neutral"})"
      "\n");
  ASSERT_EQ(r.dataset.size(), 2u);
  EXPECT_EQ(r.dataset.examples[0].id, "x1");
  EXPECT_EQ(r.dataset.examples[0].label, Label::kContradiction);
  EXPECT_EQ(r.dataset.examples[0].provenance, Provenance::kOriginal);
  EXPECT_EQ(r.dataset.examples[1].id, "d:3");
}

TEST(LoadDataset, SkipsUnlabeledAndBlank) {
  auto r = ParseJsonl(
      R"({"premise":"P","hypothesis":"H","label":"-"})"
      "\n"
      R"({"premise":"P","hypothesis":"  ","label":"neutral"})"
      "\n"
      R"({"premise":"P","hypothesis":"H","label":"entailment"})"
      "\n");
  EXPECT_EQ(r.dataset.size(), 1u);
  EXPECT_EQ(r.stats.unlabeled_skipped, 1u);
  EXPECT_EQ(r.stats.empty_skipped, 1u);
}

TEST(LoadDataset, AcceptsSnliJsonlFieldNames) {
  auto r = ParseJsonl(
      R"({"gold_label":"entailment","sentence1":"A b.","sentence2":"C d.","pairID":"9"})"
      "\n");
  ASSERT_EQ(r.dataset.size(), 1u);
  EXPECT_EQ(r.dataset.examples[0].premise, "A b.");
}

TEST(LoadDataset, ErrorsNameTheLine) {
  try {
    ParseJsonl(R"({"premise":"P","hypothesis":"H","label":"entailment"})"
               "\n"
               R"({"premise":"P","hypothesis":"H","label":"maybe"})"
               "\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown label 'maybe' at line 2"),
              std::string::npos);
  }
  try {
    ParseJsonl(R"({"hypothesis":"H","label":"entailment"})");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("missing field 'premise' at line 1"),
              std::string::npos);
  }
  EXPECT_THROW(ParseJsonl("{not json}\n"), InputError);
  EXPECT_THROW(
      ParseJsonl(R"({"id":"a","premise":"P","hypothesis":"H","label":"neutral"})"
                 "\n"
                 R"({"id":"a","premise":"P","hypothesis":"H","label":"neutral"})"),
      InputError);
}

TEST(LoadDataset, SynthesizedNeedsPairing) {
  EXPECT_THROW(
      ParseJsonl(R"({"id":"a","premise":"P","hypothesis":"H","label":"neutral","provenance":"synthesized"})"),
      InputError);
  EXPECT_THROW(
      ParseJsonl(R"({"id":"a","premise":"P","hypothesis":"H","label":"neutral","provenance":"invented"})"),
      InputError);
}

TEST(LoadDataset, SnliTsvByHeader) {
  auto r = ParseTsv(
      "gold_label\tsentence1_binary_parse\tsentence1\tsentence2\tpairID\n"
      "neutral\t(x)\tA person on a horse.\tA person is training.\t1\n"
      "-\t(x)\tA.\tB.\t2\n"
      "contradiction\t(x)\tA person on a horse.\tNobody is here.\t3\r\n");
  ASSERT_EQ(r.dataset.size(), 2u);
  EXPECT_EQ(r.stats.unlabeled_skipped, 1u);
  EXPECT_EQ(r.dataset.examples[1].hypothesis, "Nobody is here.");
  EXPECT_EQ(r.dataset.examples[1].id, "snli:4");
  EXPECT_THROW(ParseTsv("a\tb\n"), InputError);
}

TEST(WriteDataset, RoundTripsCanonicalRecords) {
  Dataset d;
  d.name = "rt";
  NliExample a{"a1", "P \"quoted\"", "H", Label::kNeutral,
               Provenance::kOriginal, "a1#cf", Ngram::Parse("x y")};
  NliExample b{"a1#cf", "P2", "H", Label::kEntailment,
               Provenance::kSynthesized, "a1#cf", Ngram::Parse("x y")};
  NliExample c{"c", "P", "H", Label::kContradiction, Provenance::kOriginal,
               std::nullopt, std::nullopt};
  d.examples = {a, b, c};
  std::ostringstream out;
  WriteDataset(d, out);
  EXPECT_EQ(ToJsonLine(c),
            R"({"id":"c","premise":"P","hypothesis":"H","label":"contradiction","provenance":"original","pair_id":null,"artifact_ngram":null})");
  auto back = ParseJsonl(out.str());
  ASSERT_EQ(back.dataset.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.dataset.examples[i], d.examples[i]);
  }
}

TEST(GuessDatasetFormat, ByExtension) {
  EXPECT_EQ(GuessDatasetFormat("snli_1.0_train.txt"), DatasetFormat::kTsv);
  EXPECT_EQ(GuessDatasetFormat("x.tsv"), DatasetFormat::kTsv);
  EXPECT_EQ(GuessDatasetFormat("x.jsonl"), DatasetFormat::kJsonl);
}

}  // namespace
}  // namespace nlidebias
