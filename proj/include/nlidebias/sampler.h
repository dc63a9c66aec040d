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

#ifndef NLIDEBIAS_SAMPLER_H_
#define NLIDEBIAS_SAMPLER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nlidebias/corpus.h"

namespace nlidebias {

struct MixConfig {
  std::uint64_t base_seed = 0;
  int epochs = 3;
  // Keep the contrast set's anchors (and any other contrast ids) out of the
  // fresh original sample so no record appears twice in an epoch.
  bool exclude_anchor_ids = true;

  void Validate() const;
};

// Seed streams derived from (base_seed, epoch).
std::uint64_t SubsetSeed(std::uint64_t base_seed, int epoch);
std::uint64_t ShuffleSeed(std::uint64_t base_seed, int epoch);

struct EpochManifest {
  int epoch = 0;
  std::size_t contrast_size = 0;
  std::vector<std::string> original_subset_ids;
  std::uint64_t subset_seed = 0;
  std::uint64_t shuffle_seed = 0;
  // sha256 of the epoch file bytes.
  std::string output_digest;

  nlohmann::ordered_json ToJson() const;
};

// Uniform sample of `size` original-provenance ids from `pool`, without
// replacement, in draw order. Ids in `excluded` are ineligible. Throws
// InputError naming required vs available counts when the pool is too small.
std::vector<std::string> SampleOriginalSubset(
    const Dataset& pool, std::size_t size, int epoch, const MixConfig& config,
    std::span<const std::string> excluded = {});

struct EpochMix {
  Dataset mix;
  EpochManifest manifest;
};

// D_mix(e) = contrast examples + |contrast| fresh originals, shuffled with
// the epoch's shuffle seed. Throws InputError on an empty contrast set.
EpochMix BuildEpochMix(const Dataset& contrast, const Dataset& pool, int epoch,
                       const MixConfig& config);

// Builds every epoch 1..config.epochs (in parallel) with digests filled in.
std::vector<EpochMix> BuildAllEpochs(const Dataset& contrast,
                                     const Dataset& pool,
                                     const MixConfig& config);

// Writes epoch_<e>.jsonl for every mix and manifest.json holding the config,
// `extra` (merged at top level) and one EpochManifest per epoch. Output bytes
// depend only on the inputs.
void EmitEpochFiles(std::span<const EpochMix> mixes, const MixConfig& config,
                    const std::filesystem::path& out_dir,
                    const nlohmann::ordered_json& extra = {});

}  // namespace nlidebias

#endif  // NLIDEBIAS_SAMPLER_H_
