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

#include <omp.h>

#include <string>
#include <vector>

#include "nlidebias/artifact_stats.h"
#include "nlidebias/error.h"

namespace nlidebias {

namespace {

void CountText(std::string_view text, Label label, std::size_t n,
               NgramLabelCounts& counts, std::string& buffer) {
  auto tokens = Tokenize(text);
  ForEachNgramText(tokens, n, buffer,
                   [&](std::string_view gram) { counts.Add(gram, label); });
}

void CountExample(const NliExample& ex, std::size_t n, TextField field,
                  NgramLabelCounts& counts, std::string& buffer) {
  counts.AddExample(ex.label);
  if (field != TextField::kPremise) {
    CountText(ex.hypothesis, ex.label, n, counts, buffer);
  }
  if (field != TextField::kHypothesis) {
    CountText(ex.premise, ex.label, n, counts, buffer);
  }
}

void CheckArgs(const Dataset& dataset, std::size_t n) {
  if (dataset.empty()) {
    throw InputError("cannot count n-grams of empty dataset '" + dataset.name +
                     "'");
  }
  if (n == 0) throw InputError("n-gram order must be >= 1");
}

}  // namespace

NgramLabelCounts AccumulateCountsSerial(const Dataset& dataset, std::size_t n,
                                        TextField field) {
  CheckArgs(dataset, n);
  NgramLabelCounts counts(n);
  std::string buffer;
  for (const auto& ex : dataset.examples) {
    CountExample(ex, n, field, counts, buffer);
  }
  return counts;
}

NgramLabelCounts AccumulateCounts(const Dataset& dataset, std::size_t n,
                                  TextField field) {
  CheckArgs(dataset, n);
  const auto size = static_cast<std::ptrdiff_t>(dataset.size());
  const int max_threads = omp_get_max_threads();
  std::vector<NgramLabelCounts> shards(static_cast<std::size_t>(max_threads),
                                       NgramLabelCounts(n));

#pragma omp parallel num_threads(max_threads)
  {
    auto& local = shards[static_cast<std::size_t>(omp_get_thread_num())];
    std::string buffer;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      CountExample(dataset.examples[static_cast<std::size_t>(i)], n, field,
                   local, buffer);
    }
  }

  // Pairwise tree reduction; each level merges disjoint pairs in parallel.
  for (std::size_t stride = 1; stride < shards.size(); stride *= 2) {
    const auto pairs =
        static_cast<std::ptrdiff_t>((shards.size() + 2 * stride - 1) /
                                    (2 * stride));
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t p = 0; p < pairs; ++p) {
      std::size_t left = static_cast<std::size_t>(p) * 2 * stride;
      std::size_t right = left + stride;
      if (right < shards.size()) {
        shards[left].Merge(shards[right]);
        shards[right] = NgramLabelCounts(n);
      }
    }
  }
  return std::move(shards.front());
}

}  // namespace nlidebias
