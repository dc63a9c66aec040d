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

#include "nlidebias/llm_client.h"

#include <fstream>
#include <thread>

#include "nlidebias/util.h"

namespace nlidebias {

using json = nlohmann::json;

std::string_view EndpointRoleName(EndpointRole role) {
  return role == EndpointRole::kGenerator ? "generator" : "judge";
}

void LlmEndpointConfig::Validate() const {
  if (model_id.empty()) throw InputError("endpoint model id is empty");
  if (max_concurrency < 1) {
    throw InputError("max_concurrency must be >= 1 for " + model_id);
  }
  if (max_retries < 0) throw InputError("max_retries must be >= 0");
  if (backoff_base_ms < 0) throw InputError("backoff_base_ms must be >= 0");
  if (timeout_ms < 1) throw InputError("timeout_ms must be >= 1");
}

nlohmann::ordered_json LlmEndpointConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["role"] = EndpointRoleName(role);
  j["model_id"] = model_id;
  j["base_url"] = base_url;
  j["api_key_env"] = api_key_env;
  j["max_retries"] = max_retries;
  j["backoff_base_ms"] = backoff_base_ms;
  j["timeout_ms"] = timeout_ms;
  j["max_concurrency"] = max_concurrency;
  j["temperature"] =
      temperature ? nlohmann::ordered_json(*temperature) : nlohmann::ordered_json();
  return j;
}

bool IsTransient(const TransportResult& result) {
  return result.status == 0 || result.status == 429 || result.status >= 500;
}

std::shared_ptr<MockChatBackend> MockChatBackend::FromFile(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read mock table: " + path.string());
  auto backend = std::make_shared<MockChatBackend>();
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (Trim(raw).empty()) continue;
    json row;
    try {
      row = json::parse(raw);
    } catch (const json::parse_error&) {
      throw InputError("mock table: invalid JSON at line " +
                       std::to_string(line));
    }
    std::string hash;
    if (row.contains("prompt_sha256")) {
      hash = row.at("prompt_sha256").get<std::string>();
    } else if (row.contains("prompt")) {
      hash = Sha256Hex(row.at("prompt").get<std::string>());
    } else {
      throw InputError("mock table: row needs prompt_sha256 or prompt at line " +
                       std::to_string(line));
    }
    Entry entry;
    if (row.contains("status")) entry.status = row.at("status").get<int>();
    if (row.contains("response")) {
      entry.response = row.at("response").get<std::string>();
    } else if (entry.status == 200) {
      throw InputError("mock table: row needs response or status at line " +
                       std::to_string(line));
    }
    backend->Set(row.value("model", std::string()), std::move(hash),
                std::move(entry));
  }
  return backend;
}

void MockChatBackend::Set(std::string model, std::string prompt_sha256,
                          Entry entry) {
  table_[{std::move(model), std::move(prompt_sha256)}] = std::move(entry);
}

void MockChatBackend::SetResponse(std::string model, std::string_view prompt,
                                  std::string response) {
  Set(std::move(model), Sha256Hex(prompt), Entry{200, std::move(response)});
}

TransportResult MockChatBackend::Send(const LlmEndpointConfig& endpoint,
                                      std::string_view prompt) {
  ++calls_;
  const std::string hash = Sha256Hex(prompt);
  for (const auto& key : {std::pair<std::string, std::string>{endpoint.model_id, hash},
                          {"", hash},
                          {endpoint.model_id, "*"},
                          {"", "*"}}) {
    auto it = table_.find(key);
    if (it != table_.end()) {
      TransportResult r;
      r.status = it->second.status;
      if (r.status == 200) {
        r.text = it->second.response;
      } else {
        r.error = "mock status " + std::to_string(r.status);
      }
      return r;
    }
  }
  return {404, "", "no mock entry for prompt " + hash.substr(0, 12)};
}

std::chrono::milliseconds BackoffDelay(int base_ms, int attempt,
                                       std::mt19937_64& rng) {
  if (base_ms <= 0) return std::chrono::milliseconds(0);
  const int shift = std::min(attempt, 20);
  const std::uint64_t cap = static_cast<std::uint64_t>(base_ms) << shift;
  return std::chrono::milliseconds(
      static_cast<std::int64_t>(UniformIndex(rng, cap + 1)));
}

LlmClient::LlmClient(LlmEndpointConfig config,
                     std::shared_ptr<ChatBackend> backend,
                     std::uint64_t jitter_seed, Sleeper sleeper)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      sleeper_(std::move(sleeper)),
      rng_(DeriveSeed(jitter_seed, HashKey(config_.model_id), 0x6a69)) {
  config_.Validate();
  if (!backend_) throw InputError("LlmClient needs a backend");
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  slots_ = std::make_unique<std::counting_semaphore<>>(config_.max_concurrency);
}

std::chrono::milliseconds LlmClient::NextDelay(int attempt) {
  std::lock_guard<std::mutex> lock(rng_mu_);
  return BackoffDelay(config_.backoff_base_ms, attempt, rng_);
}

LlmClient::Completion LlmClient::Complete(std::string_view prompt) {
  TransportResult last;
  int attempts = 0;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) sleeper_(NextDelay(attempt - 1));
    slots_->acquire();
    const int now = ++in_flight_;
    int peak = peak_in_flight_.load();
    while (now > peak && !peak_in_flight_.compare_exchange_weak(peak, now)) {
    }
    try {
      last = backend_->Send(config_, prompt);
    } catch (...) {
      --in_flight_;
      slots_->release();
      throw;
    }
    --in_flight_;
    slots_->release();
    ++attempts;
    ++attempts_total_;
    if (last.status == 200) return {std::move(last.text), attempts};
    if (!IsTransient(last)) break;
  }
  throw LlmError(config_.model_id + ": request failed after " +
                     std::to_string(attempts) + " attempt(s): " +
                     (last.error.empty() ? "status " + std::to_string(last.status)
                                         : last.error),
                 attempts, last.status);
}

}  // namespace nlidebias
