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

#include "nlidebias/llm_client.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <thread>

#include "nlidebias/util.h"
#include "test_support.h"

namespace nlidebias {
namespace {

// Replays a fixed status sequence, then answers 200 "ok".
class SequenceBackend : public ChatBackend {
 public:
  explicit SequenceBackend(std::vector<int> statuses)
      : statuses_(std::move(statuses)) {}
  TransportResult Send(const LlmEndpointConfig&, std::string_view) override {
    const std::size_t i = calls_++;
    if (i < statuses_.size()) return {statuses_[i], "", "scripted"};
    return {200, "ok", ""};
  }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<int> statuses_;
  std::atomic<std::size_t> calls_{0};
};

LlmEndpointConfig Config(int max_retries = 3) {
  LlmEndpointConfig c;
  c.model_id = "m";
  c.max_retries = max_retries;
  c.backoff_base_ms = 100;
  return c;
}

TEST(LlmEndpointConfig, Validation) {
  auto c = Config();
  EXPECT_NO_THROW(c.Validate());
  c.max_concurrency = 0;
  EXPECT_THROW(c.Validate(), InputError);
  c = Config(-1);
  EXPECT_THROW(c.Validate(), InputError);
  c = Config();
  c.model_id.clear();
  EXPECT_THROW(c.Validate(), InputError);
}

TEST(LlmEndpointConfig, JsonNeverHoldsTheKey) {
  auto j = Config().ToJson();
  EXPECT_EQ(j["api_key_env"], "OPENAI_API_KEY");
  EXPECT_TRUE(j["temperature"].is_null());
}

TEST(IsTransient, Classification) {
  for (int s : {0, 429, 500, 502, 503, 504}) EXPECT_TRUE(IsTransient({s, "", ""}));
  for (int s : {200, 400, 401, 403, 404, 422}) EXPECT_FALSE(IsTransient({s, "", ""}));
}

TEST(LlmClient, TwoTransientsThenSuccess) {
  auto backend = std::make_shared<SequenceBackend>(std::vector<int>{503, 0});
  std::vector<std::chrono::milliseconds> sleeps;
  LlmClient client(Config(), backend, 1,
                   [&](std::chrono::milliseconds d) { sleeps.push_back(d); });
  auto r = client.Complete("hi");
  EXPECT_EQ(r.text, "ok");
  EXPECT_EQ(r.attempts, 3);
  EXPECT_EQ(backend->calls(), 3u);
  ASSERT_EQ(sleeps.size(), 2u);
  EXPECT_LE(sleeps[0].count(), 100);
  EXPECT_LE(sleeps[1].count(), 200);
}

TEST(LlmClient, RateLimitedForeverExhaustsBudget) {
  auto backend =
      std::make_shared<SequenceBackend>(std::vector<int>(100, 429));
  LlmClient client(Config(3), backend, 1, [](std::chrono::milliseconds) {});
  try {
    client.Complete("hi");
    FAIL();
  } catch (const LlmError& e) {
    EXPECT_EQ(e.attempts(), 4);
    EXPECT_EQ(e.last_status(), 429);
  }
  EXPECT_EQ(backend->calls(), 4u);
}

TEST(LlmClient, PermanentErrorIsNotRetried) {
  auto backend = std::make_shared<SequenceBackend>(std::vector<int>{401});
  LlmClient client(Config(5), backend, 1, [](std::chrono::milliseconds) {});
  EXPECT_THROW(client.Complete("hi"), LlmError);
  EXPECT_EQ(backend->calls(), 1u);
}

TEST(BackoffDelay, FullJitterBounds) {
  std::mt19937_64 rng(4);
  for (int attempt = 0; attempt < 6; ++attempt) {
    std::int64_t max_seen = 0;
    for (int i = 0; i < 2000; ++i) {
      auto d = BackoffDelay(50, attempt, rng).count();
      ASSERT_GE(d, 0);
      ASSERT_LE(d, 50LL << attempt);
      max_seen = std::max<std::int64_t>(max_seen, d);
    }
    EXPECT_GT(max_seen, (50LL << attempt) / 2);
  }
  EXPECT_EQ(BackoffDelay(0, 3, rng).count(), 0);
}

// Holds each request open briefly and records the peak overlap.
class SlowBackend : public ChatBackend {
 public:
  TransportResult Send(const LlmEndpointConfig&, std::string_view) override {
    const int now = ++active_;
    int peak = peak_.load();
    while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --active_;
    return {200, "ok", ""};
  }
  int peak() const { return peak_; }

 private:
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
};

TEST(LlmClient, ConcurrencyCapHolds) {
  auto backend = std::make_shared<SlowBackend>();
  auto c = Config();
  c.max_concurrency = 2;
  LlmClient client(c, backend);
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&] {
        for (int i = 0; i < 5; ++i) client.Complete("x");
      });
    }
  }
  EXPECT_LE(backend->peak(), 2);
  EXPECT_LE(client.peak_in_flight(), 2);
  EXPECT_EQ(client.attempts_total(), 40u);
}

TEST(MockChatBackend, LookupOrder) {
  MockChatBackend mock;
  mock.SetResponse("", "p1", "any-model p1");
  mock.SetResponse("m", "p1", "m p1");
  mock.Set("m", "*", {200, "m wildcard"});
  mock.Set("", "*", {200, "catch all"});
  auto c = Config();
  EXPECT_EQ(mock.Send(c, "p1").text, "m p1");
  c.model_id = "other";
  EXPECT_EQ(mock.Send(c, "p1").text, "any-model p1");
  EXPECT_EQ(mock.Send(c, "p2").text, "catch all");
  c.model_id = "m";
  EXPECT_EQ(mock.Send(c, "p2").text, "m wildcard");
  EXPECT_EQ(mock.calls(), 4u);
  MockChatBackend empty;
  EXPECT_EQ(empty.Send(c, "p").status, 404);
}

TEST(MockChatBackend, FromFile) {
  auto dir = testing::FreshTempDir("mock_table");
  WriteFileAtomic(dir / "t.jsonl",
                  "{\"prompt\":\"hello\",\"response\":\"world\"}\n"
                  "\n"
                  "{\"prompt_sha256\":\"*\",\"model\":\"m\",\"status\":503}\n");
  auto mock = MockChatBackend::FromFile(dir / "t.jsonl");
  auto c = Config();
  EXPECT_EQ(mock->Send(c, "hello").text, "world");
  EXPECT_EQ(mock->Send(c, "other").status, 503);
  WriteFileAtomic(dir / "bad.jsonl", "{\"response\":\"x\"}\n");
  EXPECT_THROW(MockChatBackend::FromFile(dir / "bad.jsonl"), InputError);
  WriteFileAtomic(dir / "bad2.jsonl", "nope\n");
  EXPECT_THROW(MockChatBackend::FromFile(dir / "bad2.jsonl"), InputError);
  EXPECT_THROW(MockChatBackend::FromFile(dir / "missing.jsonl"), InputError);
}

class HttpBackendTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   last_auth_ = req.get_header_value("Authorization");
                   last_body_ = req.body;
                   if (fail_next_) {
                     fail_next_ = false;
                     res.status = 503;
                     return;
                   }
                   res.set_content(reply_, "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::jthread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    setenv("NLIDEBIAS_TEST_KEY", "sk-test", 1);
  }
  void TearDown() override { server_.stop(); }

  LlmEndpointConfig Endpoint() {
    LlmEndpointConfig c;
    c.model_id = "tiny";
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/";
    c.api_key_env = "NLIDEBIAS_TEST_KEY";
    c.timeout_ms = 5000;
    c.temperature = 0.0;
    return c;
  }

  httplib::Server server_;
  std::jthread thread_;
  int port_ = 0;
  std::string reply_ =
      R"({"choices":[{"message":{"role":"assistant","content":"true|fine"}}]})";
  bool fail_next_ = false;
  std::string last_auth_;
  std::string last_body_;
};

TEST_F(HttpBackendTest, PostsChatCompletion) {
  HttpChatBackend http;
  auto r = http.Send(Endpoint(), "judge this");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.text, "true|fine");
  EXPECT_EQ(last_auth_, "Bearer sk-test");
  auto body = nlohmann::json::parse(last_body_);
  EXPECT_EQ(body["model"], "tiny");
  EXPECT_EQ(body["messages"][0]["content"], "judge this");
  EXPECT_EQ(body["temperature"], 0.0);
}

TEST_F(HttpBackendTest, RetriesServerErrorThroughClient) {
  fail_next_ = true;
  LlmClient client(Endpoint(), std::make_shared<HttpChatBackend>(), 0,
                   [](std::chrono::milliseconds) {});
  auto r = client.Complete("x");
  EXPECT_EQ(r.attempts, 2);
  EXPECT_EQ(r.text, "true|fine");
}

TEST_F(HttpBackendTest, BadBodyAndMissingKey) {
  reply_ = "{\"unexpected\":1}";
  HttpChatBackend http;
  EXPECT_EQ(http.Send(Endpoint(), "x").status, 422);
  auto c = Endpoint();
  c.api_key_env = "NLIDEBIAS_TEST_KEY_UNSET";
  unsetenv("NLIDEBIAS_TEST_KEY_UNSET");
  EXPECT_EQ(http.Send(c, "x").status, 401);
}

TEST(HttpBackend, RefusedConnectionIsTransient) {
  LlmEndpointConfig c;
  c.model_id = "tiny";
  c.base_url = "http://127.0.0.1:1/v1";
  c.api_key_env = "NLIDEBIAS_TEST_KEY";
  c.timeout_ms = 500;
  setenv("NLIDEBIAS_TEST_KEY", "sk-test", 1);
  HttpChatBackend http;
  auto r = http.Send(c, "x");
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(IsTransient(r));
}

}  // namespace
}  // namespace nlidebias
