// Copyright 2026 The provaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <nlohmann/json.hpp>

#include "provaudit/errors.hpp"
#include "provaudit/gateway.hpp"
#include "provaudit/http_transport.hpp"
#include "provaudit/mock_backend.hpp"
#include "test_support.hpp"

using namespace provaudit;
using nlohmann::json;

namespace {

/// Counts calls; fails the first `fail_first` sends of each attempt.
class CountingTransport : public Transport {
 public:
  int fail_first = 0;
  TransportReply::Status fail_status = TransportReply::Status::Failure;
  std::chrono::milliseconds delay{0};
  std::atomic<int> calls{0};

  TransportReply send(const ChatRequest& req, int attempt) override {
    ++calls;
    if (delay.count()) std::this_thread::sleep_for(delay);
    {
      std::lock_guard lock(mu_);
      if (seen_[attempt]++ < fail_first) {
        TransportReply r;
        r.status = fail_status;
        r.http_status = fail_status == TransportReply::Status::AuthRejected ? 401 : 503;
        return r;
      }
    }
    TransportReply r;
    r.text = "reply " + std::to_string(attempt) + " to " + req.user;
    return r;
  }

 private:
  std::mutex mu_;
  std::map<int, int> seen_;
};

BackendConfig config(const std::string& id = "b") {
  BackendConfig c;
  c.backend_id = id;
  c.kind = "mock";
  c.model = "m";
  c.backoff = std::chrono::milliseconds(0);
  return c;
}

PromptCase make_case(int repeats) {
  PromptCase c;
  c.case_id = "generation/s/r/-";
  c.scenario_id = "s";
  c.rendered_prompt = "hello";
  c.repeat_budget = repeats;
  return c;
}

GatewayOptions no_sleep() {
  GatewayOptions o;
  o.sleep = [](std::chrono::milliseconds) {};
  return o;
}

}  // namespace

TEST(Gateway, FingerprintCoversAllFields) {
  ChatRequest a{"m", "s", "u", json::object()};
  auto b = a;
  EXPECT_EQ(request_fingerprint(a), request_fingerprint(b));
  b.system = "s2";
  EXPECT_NE(request_fingerprint(a), request_fingerprint(b));
  b = a;
  b.params = {{"temperature", 0.2}};
  EXPECT_NE(request_fingerprint(a), request_fingerprint(b));
  EXPECT_EQ(request_fingerprint(a).size(), 64u);
}

TEST(Gateway, RepeatsBypassCacheAndSpendBudget) {
  auto t = std::make_shared<CountingTransport>();
  Gateway gw(config(), t, no_sleep());
  const auto r = gw.query_repeats(make_case(7));
  ASSERT_EQ(r.responses.size(), 7u);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(r.responses[static_cast<std::size_t>(i)].attempt, i);
  EXPECT_EQ(t->calls.load(), 7);
  EXPECT_EQ(gw.spent(), 7);
  EXPECT_FALSE(r.truncated);
}

TEST(Gateway, QueryUsesCache) {
  auto t = std::make_shared<CountingTransport>();
  Gateway gw(config(), t, no_sleep());
  const auto c = make_case(3);
  const auto first = gw.query(c, 0);
  const auto second = gw.query(c, 1);
  EXPECT_EQ(first.transport_status, "ok");
  EXPECT_EQ(second.transport_status, "cache");
  EXPECT_EQ(second.attempt, 1);
  EXPECT_EQ(t->calls.load(), 1);
  EXPECT_EQ(gw.cache_hits(), 1);
  EXPECT_THROW(gw.query(c, 3), std::out_of_range);
}

TEST(Gateway, DiskCacheSurvivesNewGateway) {
  testsupport::TempDir dir("cache");
  auto t = std::make_shared<CountingTransport>();
  GatewayOptions o = no_sleep();
  o.cache_dir = dir.path();
  {
    Gateway gw(config(), t, o);
    gw.complete("x", "", "question", 0, true);
  }
  Gateway gw2(config(), t, o);
  EXPECT_EQ(gw2.complete("x", "", "question", 0, true).transport_status, "cache");
  EXPECT_EQ(t->calls.load(), 1);
  EXPECT_EQ(gw2.spent(), 0);
}

TEST(Gateway, CompleteRetryIsNotServedFromCache) {
  auto t = std::make_shared<CountingTransport>();
  Gateway gw(config(), t, no_sleep());
  gw.complete("x", "", "question", 0, true);
  EXPECT_NE(gw.complete("x", "", "question", 1, true).transport_status, "cache");
  EXPECT_EQ(gw.complete("x", "", "question", 1, true).transport_status, "cache");
  EXPECT_EQ(t->calls.load(), 2);
}

TEST(Gateway, BudgetTruncatesAtLowestIndices) {
  for (int concurrency : {1, 4}) {
    auto t = std::make_shared<CountingTransport>();
    t->delay = std::chrono::milliseconds(2);
    auto cfg = config();
    cfg.budget = 5;
    cfg.max_concurrency = concurrency;
    Gateway gw(cfg, t, no_sleep());
    const auto r = gw.query_repeats(make_case(20));
    EXPECT_TRUE(r.truncated);
    ASSERT_EQ(r.responses.size(), 5u);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(r.responses[static_cast<std::size_t>(i)].attempt, i);
    EXPECT_EQ(gw.spent(), 5);
    EXPECT_EQ(gw.remaining(), 0);
    EXPECT_THROW(gw.complete("x", "", "y", 0, false), BudgetExhausted);
  }
}

TEST(Gateway, RetriesWithExponentialBackoff) {
  auto t = std::make_shared<CountingTransport>();
  t->fail_first = 2;
  auto cfg = config();
  cfg.backoff = std::chrono::milliseconds(100);
  std::vector<long long> waits;
  GatewayOptions o;
  o.sleep = [&](std::chrono::milliseconds d) { waits.push_back(d.count()); };
  Gateway gw(cfg, t, o);
  const auto r = gw.query(make_case(1), 0);
  EXPECT_EQ(r.transport_attempts, 3);
  EXPECT_EQ(waits, (std::vector<long long>{100, 200}));
  EXPECT_EQ(gw.spent(), 1);  // retries of one logical request cost one unit
}

TEST(Gateway, GivesUpAfterMaxRetries) {
  auto t = std::make_shared<CountingTransport>();
  t->fail_first = 10;
  auto cfg = config();
  cfg.max_retries = 2;
  Gateway gw(cfg, t, no_sleep());
  EXPECT_THROW(gw.query(make_case(1), 0), TransportError);
  EXPECT_EQ(t->calls.load(), 3);
}

TEST(Gateway, AuthRejectedIsNotRetried) {
  auto t = std::make_shared<CountingTransport>();
  t->fail_first = 1;
  t->fail_status = TransportReply::Status::AuthRejected;
  Gateway gw(config(), t, no_sleep());
  EXPECT_THROW(gw.query(make_case(1), 0), TransportError);
  EXPECT_EQ(t->calls.load(), 1);
}

TEST(Gateway, MissingKeyFailsBeforeSending) {
  auto t = std::make_shared<CountingTransport>();
  auto cfg = config();
  cfg.auth_env = "PROVAUDIT_TEST_UNSET_KEY";
  ::unsetenv("PROVAUDIT_TEST_UNSET_KEY");
  Gateway gw(cfg, t, no_sleep());
  EXPECT_THROW(gw.query_repeats(make_case(2)), AuthMissing);
  EXPECT_EQ(t->calls.load(), 0);
  ::setenv("PROVAUDIT_TEST_UNSET_KEY", "k", 1);
  EXPECT_NO_THROW(gw.query_repeats(make_case(2)));
  ::unsetenv("PROVAUDIT_TEST_UNSET_KEY");
}

TEST(Gateway, ConcurrencyIsBounded) {
  auto t = std::make_shared<CountingTransport>();
  t->delay = std::chrono::milliseconds(5);
  auto cfg = config();
  cfg.max_concurrency = 3;
  Gateway gw(cfg, t, no_sleep());
  gw.query_repeats(make_case(24));
  EXPECT_LE(gw.peak_in_flight(), 3);
  EXPECT_GE(gw.peak_in_flight(), 2);
  EXPECT_EQ(gw.in_flight(), 0);
}

TEST(Gateway, QueryAttemptsSelectsIndices) {
  auto t = std::make_shared<CountingTransport>();
  Gateway gw(config(), t, no_sleep());
  std::vector<int> seen;
  const auto r = gw.query_attempts(make_case(10), {2, 5, 9}, [&](const RawResponse& x) { seen.push_back(x.attempt); });
  ASSERT_EQ(r.responses.size(), 3u);
  EXPECT_EQ(r.responses[1].attempt, 5);
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, (std::vector<int>{2, 5, 9}));
}

TEST(Gateway, ConfigValidationAndRedaction) {
  auto c = config();
  c.kind = "openai";
  EXPECT_THROW(c.validate(), ValidationError);
  c.endpoint = "https://api.example.com/v1/chat/completions";
  c.auth_env = "EXAMPLE_KEY";
  EXPECT_NO_THROW(c.validate());
  const auto j = c.to_json();
  EXPECT_EQ(j.at("auth_env"), "EXAMPLE_KEY");
  EXPECT_EQ(BackendConfig::from_json(j).endpoint, c.endpoint);
  c.max_concurrency = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(MockBackend, ChoicesAreSeededAndWeighted) {
  const json script = {{"seed", 3},
                       {"rules", {{{"choices", {{{"weight", 0.8}, {"reply", "A"}}, {{"weight", 0.2}, {"reply", "B"}}}}}}}};
  MockTransport m(script);
  ChatRequest req{"m", "", "q", json::object()};
  int a = 0;
  for (int i = 0; i < 2000; ++i) a += *m.reply_for(req, i) == "A";
  EXPECT_NEAR(a / 2000.0, 0.8, 0.03);
  MockTransport again(script);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(m.reply_for(req, i), again.reply_for(req, i));
}

TEST(MockBackend, RulesSequenceEchoAndMiss) {
  const json script = json::parse(R"({"on_miss": "error", "rules": [
    {"when": {"contains": "seq"}, "sequence": ["x", "y"]},
    {"when": {"contains": "```"}, "echo_code": {"prefix": "P\n", "replace": [{"from": "foo", "to": "bar"}]}}
  ]})");
  MockTransport m(script);
  EXPECT_EQ(*m.reply_for({"m", "", "seq", {}}, 3), "y");
  EXPECT_EQ(*m.reply_for({"m", "", "fix\n```python\nfoo()\n```", {}}, 0), "P\n```python\nbar()\n```\n");
  EXPECT_FALSE(m.reply_for({"m", "", "other", {}}, 0));
  EXPECT_THROW(m.send({"m", "", "other", {}}, 0), MockMiss);
}

TEST(MockBackend, FailFirstThenSucceeds) {
  auto cfg = mock_backend(json::parse(R"({"rules": [{"reply": "ok", "fail_first": 2}]})"));
  Gateway gw(cfg, make_transport(cfg), no_sleep());
  const auto r = gw.query(make_case(1), 0);
  EXPECT_EQ(r.text, "ok");
  EXPECT_EQ(r.transport_attempts, 3);
}

TEST(MockBackend, RejectsMalformedRules) {
  EXPECT_THROW(MockTransport(json::parse(R"({"rules": [{"reply": "a", "sequence": ["b"]}]})")), ValidationError);
  EXPECT_THROW(MockTransport(json::parse(R"({"on_miss": "explode"})")), ValidationError);
}

TEST(HttpTransport, BodyAndReplyParsing) {
  ChatRequest req{"gpt", "sys", "user", {{"temperature", 0.5}}};
  const auto body = HttpTransport::request_body(req);
  EXPECT_EQ(body.at("model"), "gpt");
  EXPECT_EQ(body.at("messages").size(), 2u);
  EXPECT_EQ(body.at("temperature"), 0.5);
  ChatRequest bare{"gpt", "", "user", json::object()};
  EXPECT_EQ(HttpTransport::request_body(bare).at("messages").size(), 1u);

  const auto ok = HttpTransport::parse_body(
      200, R"({"choices":[{"message":{"content":"hi"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}})");
  EXPECT_EQ(ok.status, TransportReply::Status::Ok);
  EXPECT_EQ(ok.text, "hi");
  EXPECT_EQ(ok.prompt_tokens, 3);
  EXPECT_EQ(HttpTransport::parse_body(401, "{}").status, TransportReply::Status::AuthRejected);
  EXPECT_EQ(HttpTransport::parse_body(429, "{}").status, TransportReply::Status::Failure);
  EXPECT_EQ(HttpTransport::parse_body(200, "not json").status, TransportReply::Status::BadBody);
}
