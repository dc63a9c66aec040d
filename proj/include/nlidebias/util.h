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

#ifndef NLIDEBIAS_UTIL_H_
#define NLIDEBIAS_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlidebias {

// splitmix64 finalizer. Used to derive independent stream seeds from a base
// seed; a standard choice for keyed seeding of mt19937_64.
std::uint64_t SplitMix64(std::uint64_t x);

// seed(base, key, stream) = splitmix64(splitmix64(splitmix64(base) ^ key) ^
// stream). Every derived RNG in the project goes through this.
std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t key,
                         std::uint64_t stream);

// FNV-1a of a string, for turning names into derivation keys.
std::uint64_t HashKey(std::string_view text);

// Unbiased draw from [0, n) by rejection. std::uniform_int_distribution is
// implementation-defined, which would make outputs differ across standard
// libraries.
std::uint64_t UniformIndex(std::mt19937_64& rng, std::uint64_t n);

// Fisher-Yates shuffle driven by UniformIndex.
template <typename T>
void Shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = UniformIndex(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

// `count` distinct indices from [0, n), in draw order (partial Fisher-Yates).
std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t count,
                                       std::mt19937_64& rng);

std::string Sha256Hex(std::string_view data);
std::string FileSha256Hex(const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);
// Writes via a temporary file in the same directory, then renames.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view data);

std::string_view Trim(std::string_view s);

// Fixed-point with `digits` decimals ("0.5000").
std::string FormatFixed(double value, int digits);

}  // namespace nlidebias

#endif  // NLIDEBIAS_UTIL_H_
