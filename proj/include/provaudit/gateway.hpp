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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "provaudit/prompts.hpp"

namespace provaudit {

/// One chat-completion backend. Secrets never live here: `auth_env` names the
/// environment variable that holds the key.
struct BackendConfig {
  std::string backend_id;
  std::string kind = "openai";  // "openai" (chat-completions over HTTP) or "mock"
  std::string endpoint;
  std::string model;
  std::string auth_env;
  nlohmann::json params = nlohmann::json::object();
  int max_concurrency = 4;
  int max_retries = 3;
  /// Maximum number of non-cached requests; unlimited when unset.
  std::optional<std::int64_t> budget;
  std::chrono::milliseconds backoff{500};
  /// Mock script (kind == "mock"): inline JSON or a path in `mock_script_path`.
  nlohmann::json mock_script;
  std::string mock_script_path;

  /// Throws ValidationError on a broken invariant.
  void validate() const;
  nlohmann::json to_json() const;
  static BackendConfig from_json(const nlohmann::json& j);
};

struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  nlohmann::json params = nlohmann::json::object();
};

/// Hash of everything that determines a reply.
std::string request_fingerprint(const ChatRequest& req);

struct TransportReply {
  enum class Status { Ok, Failure, BadBody, AuthRejected };
  Status status = Status::Ok;
  int http_status = 0;
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string error;
};

/// Wire-level sender. `attempt` is the repeat index of the logical request,
/// which deterministic backends may use to vary their reply.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportReply send(const ChatRequest& request, int attempt) = 0;
};

struct RawResponse {
  std::string case_id;
  int attempt = 0;
  std::string backend_id;
  std::string task;
  std::string scenario_id;
  std::string request_fingerprint;
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::string timestamp;
  std::string transport_status;  // "ok" or "cache"
  int transport_attempts = 0;

  nlohmann::json to_json() const;
  static RawResponse from_json(const nlohmann::json& j);
};

struct RepeatResult {
  std::vector<RawResponse> responses;  // ordered by attempt
  bool truncated = false;
};

struct GatewayOptions {
  bool cache_enabled = true;
  /// On-disk cache root; memory-only when unset.
  std::optional<std::filesystem::path> cache_dir;
  /// Replaces std::this_thread::sleep_for during backoff (tests pass a no-op).
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Resolves the cache root from `AUDIT_CACHE_DIR`, if set.
std::optional<std::filesystem::path> cache_dir_from_env();

/// Budgeted, cached, retrying, concurrency-bounded access to one backend.
/// Safe to call from several threads.
class Gateway {
 public:
  Gateway(BackendConfig config, std::shared_ptr<Transport> transport, GatewayOptions options = {});

  const BackendConfig& config() const { return config_; }

  /// One request for `c` at repeat index `attempt`. Served from cache when an
  /// identical request was answered before (no budget spent).
  RawResponse query(const PromptCase& c, int attempt = 0);

  /// All `c.repeat_budget` repeats, bypassing the cache. Stops early with
  /// `truncated` set when the budget runs out.
  RepeatResult query_repeats(const PromptCase& c);

  /// Selected repeat indices only (used by resume). `on_response` runs under a
  /// lock as each reply lands, before this call returns.
  RepeatResult query_attempts(const PromptCase& c, const std::vector<int>& attempts,
                              const std::function<void(const RawResponse&)>& on_response = {});

  /// Free-form request outside any PromptCase (seed generation, verification,
  /// fallback labeling, ranking). Uses the cache when `use_cache` is true;
  /// entries are keyed by request and attempt so a retry asks afresh.
  RawResponse complete(const std::string& tag, const std::string& system, const std::string& user, int attempt,
                       bool use_cache);

  std::int64_t spent() const { return spent_.load(); }
  std::optional<std::int64_t> remaining() const;
  std::int64_t cache_hits() const { return cache_hits_.load(); }
  int in_flight() const { return in_flight_.load(); }
  int peak_in_flight() const { return peak_in_flight_.load(); }

 private:
  ChatRequest make_request(const std::string& system, const std::string& user) const;
  std::optional<RawResponse> cache_lookup(const std::string& fingerprint);
  void cache_store(const std::string& key, const RawResponse& r);
  void reserve_budget();
  RawResponse send(const std::string& case_id, const ChatRequest& req, const std::string& fingerprint, int attempt);
  /// send() for a request whose budget unit is already reserved.
  RawResponse send_reserved(const std::string& case_id, const ChatRequest& req, const std::string& fingerprint,
                            int attempt);
  void ensure_auth() const;

  BackendConfig config_;
  std::shared_ptr<Transport> transport_;
  GatewayOptions options_;
  std::counting_semaphore<1024> slots_;
  std::atomic<std::int64_t> spent_{0};
  std::atomic<std::int64_t> cache_hits_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_in_flight_{0};
  std::mutex cache_mu_;
  std::map<std::string, RawResponse> memory_cache_;
  std::mutex budget_mu_;
};

/// Builds the transport a config asks for (HTTP or mock).
std::shared_ptr<Transport> make_transport(const BackendConfig& config);

}  // namespace provaudit
