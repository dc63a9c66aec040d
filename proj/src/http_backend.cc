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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cstdlib>

#include "nlidebias/llm_client.h"

namespace nlidebias {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // no trailing slash
};

SplitUrl Split(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError("base_url needs a scheme: " + base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.origin = base_url;
  } else {
    out.origin = base_url.substr(0, path_start);
    out.path = base_url.substr(path_start);
  }
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

}  // namespace

TransportResult HttpChatBackend::Send(const LlmEndpointConfig& endpoint,
                                      std::string_view prompt) {
  const char* key = std::getenv(endpoint.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    return {401, "", "environment variable " + endpoint.api_key_env + " is not set"};
  }
  const SplitUrl url = Split(endpoint.base_url);

  nlohmann::json body;
  body["model"] = endpoint.model_id;
  body["messages"] = nlohmann::json::array(
      {{{"role", "user"}, {"content", std::string(prompt)}}});
  if (endpoint.temperature) body["temperature"] = *endpoint.temperature;

  httplib::Client client(url.origin);
  const auto timeout = std::chrono::milliseconds(endpoint.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

  auto res = client.Post(url.path + "/chat/completions", headers, body.dump(),
                         "application/json");
  if (!res) {
    return {0, "", "transport error: " + httplib::to_string(res.error())};
  }
  if (res->status != 200) {
    return {res->status, "", "HTTP " + std::to_string(res->status)};
  }
  try {
    auto j = nlohmann::json::parse(res->body);
    return {200, j.at("choices").at(0).at("message").at("content").get<std::string>(),
            ""};
  } catch (const nlohmann::json::exception& e) {
    // A 200 with an unexpected body will not improve on retry.
    return {422, "", std::string("unexpected response body: ") + e.what()};
  }
}

}  // namespace nlidebias
