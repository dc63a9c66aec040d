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

#include "nlidebias/sampler.h"

#include <random>
#include <unordered_map>
#include <sstream>
#include <unordered_set>

#include "nlidebias/error.h"
#include "nlidebias/util.h"

namespace nlidebias {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kSubsetStream = 0x737562736574;   // "subset"
constexpr std::uint64_t kShuffleStream = 0x73687566666c;  // "shuffl"

std::string Serialize(const Dataset& d) {
  std::ostringstream ss;
  WriteDataset(d, ss);
  return std::move(ss).str();
}

}  // namespace

void MixConfig::Validate() const {
  if (epochs < 1) throw InputError("epochs must be >= 1");
}

std::uint64_t SubsetSeed(std::uint64_t base_seed, int epoch) {
  return DeriveSeed(base_seed, static_cast<std::uint64_t>(epoch), kSubsetStream);
}

std::uint64_t ShuffleSeed(std::uint64_t base_seed, int epoch) {
  return DeriveSeed(base_seed, static_cast<std::uint64_t>(epoch),
                    kShuffleStream);
}

ordered_json EpochManifest::ToJson() const {
  ordered_json j;
  j["epoch"] = epoch;
  j["contrast_size"] = contrast_size;
  j["original_subset_size"] = original_subset_ids.size();
  j["subset_seed"] = subset_seed;
  j["shuffle_seed"] = shuffle_seed;
  j["output_digest"] = output_digest;
  j["original_subset_ids"] = original_subset_ids;
  return j;
}

std::vector<std::string> SampleOriginalSubset(
    const Dataset& pool, std::size_t size, int epoch, const MixConfig& config,
    std::span<const std::string> excluded) {
  std::unordered_set<std::string_view> skip(excluded.begin(), excluded.end());
  std::vector<const NliExample*> eligible;
  eligible.reserve(pool.size());
  for (const auto& ex : pool.examples) {
    if (ex.provenance != Provenance::kOriginal) continue;
    if (skip.contains(ex.id)) continue;
    eligible.push_back(&ex);
  }
  if (eligible.size() < size) {
    throw InputError("original pool too small: need " + std::to_string(size) +
                     " examples, " + std::to_string(eligible.size()) +
                     " available");
  }
  std::mt19937_64 rng(SubsetSeed(config.base_seed, epoch));
  std::vector<std::string> ids;
  ids.reserve(size);
  for (std::size_t i : SampleIndices(eligible.size(), size, rng)) {
    ids.push_back(eligible[i]->id);
  }
  return ids;
}

EpochMix BuildEpochMix(const Dataset& contrast, const Dataset& pool, int epoch,
                       const MixConfig& config) {
  config.Validate();
  if (contrast.empty()) throw InputError("contrast set is empty");

  std::vector<std::string> excluded;
  if (config.exclude_anchor_ids) {
    excluded.reserve(contrast.size());
    for (const auto& ex : contrast.examples) excluded.push_back(ex.id);
  }

  EpochMix out;
  out.manifest.epoch = epoch;
  out.manifest.contrast_size = contrast.size();
  out.manifest.subset_seed = SubsetSeed(config.base_seed, epoch);
  out.manifest.shuffle_seed = ShuffleSeed(config.base_seed, epoch);
  out.manifest.original_subset_ids =
      SampleOriginalSubset(pool, contrast.size(), epoch, config, excluded);

  std::unordered_map<std::string_view, const NliExample*> by_id;
  by_id.reserve(pool.size());
  for (const auto& ex : pool.examples) by_id.emplace(ex.id, &ex);

  out.mix.name = "epoch_" + std::to_string(epoch);
  out.mix.examples = contrast.examples;
  out.mix.examples.reserve(contrast.size() * 2);
  for (const auto& id : out.manifest.original_subset_ids) {
    out.mix.examples.push_back(*by_id.at(id));
  }
  std::mt19937_64 rng(out.manifest.shuffle_seed);
  Shuffle(out.mix.examples, rng);
  out.manifest.output_digest = Sha256Hex(Serialize(out.mix));
  return out;
}

std::vector<EpochMix> BuildAllEpochs(const Dataset& contrast,
                                     const Dataset& pool,
                                     const MixConfig& config) {
  config.Validate();
  if (contrast.empty()) throw InputError("contrast set is empty");
  std::vector<EpochMix> mixes(static_cast<std::size_t>(config.epochs));
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (int e = 1; e <= config.epochs; ++e) {
    try {
      mixes[static_cast<std::size_t>(e - 1)] =
          BuildEpochMix(contrast, pool, e, config);
    } catch (...) {
#pragma omp critical(nlidebias_epoch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return mixes;
}

void EmitEpochFiles(std::span<const EpochMix> mixes, const MixConfig& config,
                    const std::filesystem::path& out_dir,
                    const ordered_json& extra) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw InputError("cannot create output directory: " + out_dir.string());
  }
  ordered_json manifest;
  manifest["base_seed"] = config.base_seed;
  manifest["epochs"] = config.epochs;
  manifest["exclude_anchor_ids"] = config.exclude_anchor_ids;
  manifest["seed_derivation"] =
      "splitmix64(splitmix64(splitmix64(base_seed) ^ epoch) ^ stream), "
      "stream 0x737562736574 subset / 0x73687566666c shuffle";
  if (extra.is_object()) {
    for (const auto& [key, value] : extra.items()) manifest[key] = value;
  }
  ordered_json epochs = ordered_json::array();
  for (const auto& m : mixes) {
    const auto path =
        out_dir / ("epoch_" + std::to_string(m.manifest.epoch) + ".jsonl");
    const std::string bytes = Serialize(m.mix);
    WriteFileAtomic(path, bytes);
    epochs.push_back(m.manifest.ToJson());
  }
  manifest["epoch_manifests"] = std::move(epochs);
  WriteFileAtomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace nlidebias
