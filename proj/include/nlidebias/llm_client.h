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

#ifndef NLIDEBIAS_LLM_CLIENT_H_
#define NLIDEBIAS_LLM_CLIENT_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nlidebias/error.h"

namespace nlidebias {

enum class EndpointRole { kGenerator, kJudge };

std::string_view EndpointRoleName(EndpointRole role);

struct LlmEndpointConfig {
  EndpointRole role = EndpointRole::kGenerator;
  std::string model_id;
  std::string base_url = "https://api.openai.com/v1";
  // Name of the environment variable holding the key; the key itself never
  // appears in configs or manifests.
  std::string api_key_env = "OPENAI_API_KEY";
  int max_retries = 3;
  int backoff_base_ms = 500;
  int timeout_ms = 60000;
  int max_concurrency = 4;
  std::optional<double> temperature;

  // Throws InputError on max_concurrency < 1, max_retries < 0, or an empty
  // model id.
  void Validate() const;
  nlohmann::ordered_json ToJson() const;
};

// One request/response exchange at the transport level.
struct TransportResult {
  // HTTP status; 0 means the request never completed (timeout, refused).
  int status = 0;
  std::string text;
  std::string error;
};

// Timeouts, 429 and 5xx.
bool IsTransient(const TransportResult& result);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual TransportResult Send(const LlmEndpointConfig& endpoint,
                               std::string_view prompt) = 0;
};

// OpenAI-compatible POST {base_url}/chat/completions over HTTPS. The key is
// read from the environment on every request.
class HttpChatBackend : public ChatBackend {
 public:
  TransportResult Send(const LlmEndpointConfig& endpoint,
                       std::string_view prompt) override;
};

// Offline backend driven by a jsonl table. Each row is
//   {"prompt_sha256": "<hex>" | "*", "model": "<model_id>" (optional),
//    "response": "<text>"}         or  {..., "status": <http status>}
// Lookup prefers (model, hash), then (any, hash), (model, *), (any, *).
// Unmatched prompts yield status 404, which is not retried.
class MockChatBackend : public ChatBackend {
 public:
  struct Entry {
    int status = 200;
    std::string response;
  };

  MockChatBackend() = default;
  static std::shared_ptr<MockChatBackend> FromFile(
      const std::filesystem::path& path);

  // model == "" matches any model; hash == "*" matches any prompt.
  void Set(std::string model, std::string prompt_sha256, Entry entry);
  void SetResponse(std::string model, std::string_view prompt,
                   std::string response);

  TransportResult Send(const LlmEndpointConfig& endpoint,
                       std::string_view prompt) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  std::map<std::pair<std::string, std::string>, Entry> table_;
  std::atomic<std::size_t> calls_{0};
};

class LlmError : public Error {
 public:
  LlmError(const std::string& what, int attempts, int last_status)
      : Error(what), attempts_(attempts), last_status_(last_status) {}
  int attempts() const { return attempts_; }
  int last_status() const { return last_status_; }

 private:
  int attempts_;
  int last_status_;
};

// Full-jitter exponential backoff: uniform in [0, base_ms * 2^attempt].
std::chrono::milliseconds BackoffDelay(int base_ms, int attempt,
                                       std::mt19937_64& rng);

// Retrying, concurrency-capped client for one endpoint. Thread-safe.
class LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  struct Completion {
    std::string text;
    int attempts = 0;
  };

  LlmClient(LlmEndpointConfig config, std::shared_ptr<ChatBackend> backend,
            std::uint64_t jitter_seed = 0, Sleeper sleeper = {});

  // Retries transient failures up to max_retries times; throws LlmError when
  // the budget is exhausted or the failure is permanent.
  Completion Complete(std::string_view prompt);

  const LlmEndpointConfig& config() const { return config_; }
  std::size_t attempts_total() const { return attempts_total_.load(); }
  int peak_in_flight() const { return peak_in_flight_.load(); }

 private:
  std::chrono::milliseconds NextDelay(int attempt);

  LlmEndpointConfig config_;
  std::shared_ptr<ChatBackend> backend_;
  Sleeper sleeper_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
  std::atomic<std::size_t> attempts_total_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_in_flight_{0};
};

}  // namespace nlidebias

#endif  // NLIDEBIAS_LLM_CLIENT_H_
