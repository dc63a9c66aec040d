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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "nlidebias/error.h"
#include "test_support.h"

namespace nlidebias {
namespace {

Dataset Make(std::vector<std::pair<std::string, Label>> rows) {
  Dataset d;
  d.name = "fixture";
  int i = 0;
  for (auto& [h, l] : rows) {
    d.examples.push_back({"e" + std::to_string(i++), "premise words here", h, l,
                          Provenance::kOriginal, std::nullopt, std::nullopt});
  }
  return d;
}

// Quadratic recount: for every (example, position) window, scan the whole
// corpus again for windows with the same tokens. Shares nothing with the
// hash-table counter except the tokenizer.
std::map<std::pair<std::string, int>, std::uint64_t> BruteForce(
    const Dataset& d, std::size_t n) {
  std::vector<std::vector<std::string>> toks;
  for (const auto& ex : d.examples) toks.push_back(Tokenize(ex.hypothesis));
  std::map<std::pair<std::string, int>, std::uint64_t> out;
  for (std::size_t a = 0; a < toks.size(); ++a) {
    for (std::size_t i = 0; i + n <= toks[a].size(); ++i) {
      std::string key;
      for (std::size_t j = 0; j < n; ++j) key += (j ? " " : "") + toks[a][i + j];
      for (int l = 0; l < 3; ++l) {
        if (out.contains({key, l})) continue;
        std::uint64_t c = 0;
        for (std::size_t b = 0; b < toks.size(); ++b) {
          if (static_cast<int>(d.examples[b].label) != l) continue;
          for (std::size_t q = 0; q + n <= toks[b].size(); ++q) {
            bool eq = true;
            for (std::size_t j = 0; j < n && eq; ++j) {
              eq = toks[b][q + j] == toks[a][i + j];
            }
            c += eq;
          }
        }
        out[{key, l}] = c;
      }
    }
  }
  return out;
}

TEST(AccumulateCounts, HandCountedBigram) {
  auto d = Make({{"a b", Label::kEntailment}, {"a b", Label::kContradiction}});
  auto c = AccumulateCounts(d, 2);
  EXPECT_EQ(c.Joint("a b", Label::kEntailment), 1u);
  EXPECT_EQ(c.Joint("a b", Label::kContradiction), 1u);
  EXPECT_EQ(c.Freq("a b"), 2u);
  EXPECT_EQ(c.Total(), 2u);
}

TEST(AccumulateCounts, DuplicatesCountPerToken) {
  auto d = Make({{"a a a", Label::kEntailment}});
  auto c = AccumulateCounts(d, 1);
  EXPECT_EQ(c.Joint("a", Label::kEntailment), 3u);
  EXPECT_EQ(c.LabelExamples(Label::kEntailment), 1u);
}

TEST(AccumulateCounts, FieldSelection) {
  Dataset d = Make({{"x y", Label::kNeutral}});
  d.examples[0].premise = "p q";
  auto h = AccumulateCounts(d, 2, TextField::kHypothesis);
  auto p = AccumulateCounts(d, 2, TextField::kPremise);
  auto b = AccumulateCounts(d, 2, TextField::kBoth);
  EXPECT_EQ(h.Freq("x y"), 1u);
  EXPECT_EQ(h.Freq("p q"), 0u);
  EXPECT_EQ(p.Freq("p q"), 1u);
  EXPECT_EQ(b.Total(), 2u);
  EXPECT_EQ(b.Freq("q x"), 0u);  // no n-gram spans the two texts
}

TEST(AccumulateCounts, Errors) {
  Dataset empty;
  EXPECT_THROW(AccumulateCounts(empty, 2), InputError);
  EXPECT_THROW(AccumulateCounts(Make({{"a", Label::kNeutral}}), 0), InputError);
}

TEST(AccumulateCounts, ParallelEqualsSerialAndOracle) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto d = testing::RandomCorpus(seed, 300);
    for (std::size_t n : {1u, 2u, 3u}) {
      auto par = AccumulateCounts(d, n);
      auto ser = AccumulateCountsSerial(d, n);
      ASSERT_TRUE(par == ser);
      par.CheckInvariants();
      std::uint64_t total = 0;
      for (const auto& [key, c] : BruteForce(d, n)) {
        ASSERT_EQ(par.Joint(key.first, static_cast<Label>(key.second)), c)
            << key.first;
        total += c;
      }
      EXPECT_EQ(par.Total(), total);
    }
  }
}

TEST(AccumulateCounts, IndependentOfExampleOrder) {
  auto d = testing::RandomCorpus(77, 200);
  auto before = AccumulateCounts(d, 2);
  std::mt19937_64 rng(1);
  Shuffle(d.examples, rng);
  EXPECT_TRUE(AccumulateCounts(d, 2) == before);
}

TEST(Counts, MergeIsCommutative) {
  auto a = AccumulateCountsSerial(testing::RandomCorpus(1, 50), 2);
  auto b = AccumulateCountsSerial(testing::RandomCorpus(2, 50), 2);
  auto ab = a, ba = b;
  ab.Merge(b);
  ba.Merge(a);
  EXPECT_TRUE(ab == ba);
  EXPECT_THROW(a.Merge(NgramLabelCounts(3)), InputError);
}

TEST(Counts, InvariantViolationIsDetected) {
  NgramLabelCounts c(2);
  c.Add("a b", Label::kNeutral, 0);
  EXPECT_THROW(c.CheckInvariants(), IntegrityError);
}

TEST(Score, NobodyIsArithmetic) {
  auto s = ScoreFromCounts(Ngram::Parse("nobody is"), Label::kContradiction,
                           1784, 1784, 1000000, 3000000);
  EXPECT_DOUBLE_EQ(s.p_label_given_w, 1.0);
  EXPECT_NEAR(s.lf_lmi, 8.224885386321827, 1e-9);
  EXPECT_NEAR(s.lmi, 1959.9243229839078, 1e-6);
}

TEST(Score, IndependenceGivesZero) {
  // P(l|w) = P(l) = 1/3.
  auto s = ScoreFromCounts(Ngram::Parse("x"), Label::kNeutral, 10, 30, 100, 300);
  EXPECT_DOUBLE_EQ(s.lmi, 0.0);
  EXPECT_DOUBLE_EQ(s.lf_lmi, 0.0);
}

TEST(Score, SingleOccurrenceIsDegenerate) {
  auto d = Make({{"x y", Label::kContradiction},
                 {"c d", Label::kContradiction},
                 {"e f", Label::kEntailment},
                 {"g h", Label::kNeutral}});
  auto c = AccumulateCounts(d, 2);
  auto s = Score(c, Ngram::Parse("x y"), Label::kContradiction);
  EXPECT_DOUBLE_EQ(s.p_label, 0.5);
  EXPECT_DOUBLE_EQ(s.lf_lmi, 0.0);
  EXPECT_NEAR(s.lmi, std::log(2.0), 1e-12);
}

TEST(Score, UnseenPairIsAnError) {
  auto c = AccumulateCounts(Make({{"a b", Label::kNeutral}}), 2);
  try {
    Score(c, Ngram::Parse("a b"), Label::kEntailment);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("unseen pair"), std::string::npos);
  }
  EXPECT_FALSE(LfLmiOrNull(c, "a b", Label::kEntailment));
  EXPECT_DOUBLE_EQ(*LfLmiOrNull(c, "a b", Label::kNeutral), 0.0);
}

TEST(Score, LfLmiMonotoneInJointCount) {
  // Fixed P(l|w) = 0.8 and P(l) = 0.25.
  double prev = -1;
  for (std::uint64_t j = 4; j <= 4000; j += 4) {
    auto s = ScoreFromCounts(Ngram::Parse("w"), Label::kEntailment, j,
                             j * 5 / 4, 1000, 4000);
    ASSERT_GT(s.lf_lmi, prev);
    prev = s.lf_lmi;
  }
}

// "in the": frequent, weakly associated. "nobody is": rarer, P(l|w) = 1.
NgramLabelCounts DampeningFixture() {
  NgramLabelCounts c(2);
  c.Add("in the", Label::kContradiction, 500);
  c.Add("in the", Label::kEntailment, 250);
  c.Add("in the", Label::kNeutral, 250);
  c.Add("nobody is", Label::kContradiction, 60);
  c.Add("is sleeping", Label::kContradiction, 100);
  c.Add("is sleeping", Label::kEntailment, 20);
  c.Add("filler pad", Label::kContradiction, 40);
  c.Add("filler pad", Label::kEntailment, 430);
  c.Add("filler pad", Label::kNeutral, 450);
  return c;  // N_C = 700, N = 2100
}

TEST(RankTopK, DampeningReordersFrequentNgram) {
  auto c = DampeningFixture();
  ASSERT_EQ(c.LabelTotal(Label::kContradiction) * 3, c.Total());
  const double in_the_lmi = 500 * std::log(0.5 * 3);
  const double nobody_lmi = 60 * std::log(3.0);
  const double sleeping_lmi = 100 * std::log(100.0 / 120.0 * 3);
  ASSERT_GT(in_the_lmi, sleeping_lmi);
  ASSERT_GT(sleeping_lmi, nobody_lmi);

  auto lmi = RankTopK(c, Label::kContradiction, 3, Metric::kLmi, 20);
  ASSERT_EQ(lmi.entries.size(), 3u);
  EXPECT_EQ(lmi.entries[0].ngram.Text(), "in the");
  EXPECT_NEAR(lmi.entries[0].lmi, in_the_lmi, 1e-9);
  EXPECT_EQ(lmi.entries[1].ngram.Text(), "is sleeping");
  EXPECT_EQ(lmi.entries[2].ngram.Text(), "nobody is");

  auto lf = RankTopK(c, Label::kContradiction, 3, Metric::kLfLmi, 20);
  EXPECT_EQ(lf.entries[0].ngram.Text(), "nobody is");
  EXPECT_NEAR(lf.entries[0].lf_lmi, std::log(60.0) * std::log(3.0), 1e-12);
  EXPECT_EQ(lf.entries[1].ngram.Text(), "is sleeping");
  EXPECT_EQ(lf.entries[2].ngram.Text(), "in the");
}

TEST(RankTopK, TiesBreakByJointThenText) {
  NgramLabelCounts c(2);
  // Same P(l|w) = 1 and same joint -> identical scores; text decides.
  c.Add("b b", Label::kNeutral, 30);
  c.Add("a a", Label::kNeutral, 30);
  c.Add("z z", Label::kEntailment, 60);
  auto r = RankTopK(c, Label::kNeutral, 5, Metric::kLfLmi, 1);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0].ngram.Text(), "a a");
  EXPECT_EQ(r.entries[1].ngram.Text(), "b b");

  // P(l|w) = 0 -> score 0 for both; higher joint first.
  NgramLabelCounts z(1);
  z.Add("x", Label::kNeutral, 25);
  z.Add("x", Label::kEntailment, 50);
  z.Add("y", Label::kNeutral, 50);
  z.Add("y", Label::kEntailment, 100);
  auto rz = RankTopK(z, Label::kNeutral, 2, Metric::kLmi, 1);
  ASSERT_DOUBLE_EQ(rz.entries[0].lmi, 0.0);
  EXPECT_EQ(rz.entries[0].ngram.Text(), "y");
}

TEST(RankTopK, MinJointAndK) {
  auto c = DampeningFixture();
  auto r = RankTopK(c, Label::kContradiction, 10, Metric::kLfLmi, 100);
  ASSERT_EQ(r.entries.size(), 2u);
  for (const auto& e : r.entries) EXPECT_GE(e.joint_count, 100u);
  EXPECT_EQ(RankTopK(c, Label::kContradiction, 1, Metric::kLmi, 1).entries.size(), 1u);
  EXPECT_THROW(RankTopK(c, Label::kContradiction, 0, Metric::kLmi), InputError);
  // min_joint 0 never admits joint count 0.
  auto n = RankTopK(c, Label::kNeutral, 10, Metric::kLmi, 0);
  for (const auto& e : n.entries) EXPECT_GE(e.joint_count, 1u);
}

TEST(ArtifactReport, HeaderRowsAndRoundTrip) {
  auto c = DampeningFixture();
  std::vector<Ranking> rs = {
      RankTopK(c, Label::kContradiction, 1, Metric::kLfLmi, 20)};
  std::ostringstream out;
  WriteArtifactReport(rs, out);
  EXPECT_EQ(out.str(),
            "ngram,label,metric,score,joint_count,freq,p_label_given_w,p_label\n"
            "nobody is,contradiction,lf_lmi,4.4981,60,60,1.0000,0.3333\n");

  std::ostringstream empty;
  WriteArtifactReport(std::vector<Ranking>{Ranking{}}, empty);
  EXPECT_EQ(empty.str(),
            "ngram,label,metric,score,joint_count,freq,p_label_given_w,p_label\n");

  auto dir = testing::FreshTempDir("report");
  rs.push_back(RankTopK(c, Label::kEntailment, 2, Metric::kLmi, 1));
  WriteArtifactReport(rs, dir / "a.csv");
  auto back = ReadArtifactReport(dir / "a.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].entries[0].ngram.Text(), "nobody is");
  EXPECT_EQ(back[1].label, Label::kEntailment);
  EXPECT_EQ(back[1].metric, Metric::kLmi);
  ASSERT_EQ(back[1].entries.size(), 2u);
  EXPECT_EQ(back[1].entries[0].ngram, rs[1].entries[0].ngram);
}

TEST(ArtifactReport, RejectsForeignFiles) {
  auto dir = testing::FreshTempDir("report_bad");
  WriteFileAtomic(dir / "x.csv", "a,b\n");
  EXPECT_THROW(ReadArtifactReport(dir / "x.csv"), InputError);
  WriteFileAtomic(dir / "y.csv",
                  "ngram,label,metric,score,joint_count,freq,p_label_given_w,"
                  "p_label\nx,maybe,lmi,1,1,1,1,1\n");
  EXPECT_THROW(ReadArtifactReport(dir / "y.csv"), InputError);
}

}  // namespace
}  // namespace nlidebias
