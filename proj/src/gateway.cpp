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

#include "provaudit/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <thread>

#include "provaudit/errors.hpp"
#include "provaudit/http_transport.hpp"
#include "provaudit/mock_backend.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;

void BackendConfig::validate() const {
  if (backend_id.empty()) throw ValidationError("backend_id must be non-empty");
  if (max_concurrency < 1) throw ValidationError("backend '" + backend_id + "': max_concurrency must be >= 1");
  if (max_concurrency > 1024) throw ValidationError("backend '" + backend_id + "': max_concurrency above 1024");
  if (max_retries < 0) throw ValidationError("backend '" + backend_id + "': max_retries must be >= 0");
  if (budget && *budget < 0) throw ValidationError("backend '" + backend_id + "': budget must be >= 0");
  if (kind != "openai" && kind != "mock")
    throw ValidationError("backend '" + backend_id + "': unknown kind '" + kind + "'");
  if (kind == "openai" && endpoint.empty())
    throw ValidationError("backend '" + backend_id + "': endpoint required");
}

json BackendConfig::to_json() const {
  json j = {{"backend_id", backend_id},
            {"kind", kind},
            {"endpoint", endpoint},
            {"model", model},
            {"auth_env", auth_env},
            {"params", params},
            {"max_concurrency", max_concurrency},
            {"max_retries", max_retries},
            {"backoff_ms", backoff.count()}};
  j["budget"] = budget ? json(*budget) : json(nullptr);
  if (!mock_script_path.empty()) j["mock_script_path"] = mock_script_path;
  return j;
}

BackendConfig BackendConfig::from_json(const json& j) {
  BackendConfig c;
  c.backend_id = j.value("backend_id", j.value("id", ""));
  c.kind = j.value("kind", "openai");
  c.endpoint = j.value("endpoint", "");
  c.model = j.value("model", "");
  c.auth_env = j.value("auth_env", "");
  if (j.contains("params")) c.params = j["params"];
  c.max_concurrency = j.value("max_concurrency", 4);
  c.max_retries = j.value("max_retries", 3);
  if (j.contains("budget") && !j["budget"].is_null()) c.budget = j["budget"].get<std::int64_t>();
  c.backoff = std::chrono::milliseconds(j.value("backoff_ms", 500));
  if (j.contains("mock_script")) c.mock_script = j["mock_script"];
  c.mock_script_path = j.value("mock_script_path", "");
  c.validate();
  return c;
}

std::string request_fingerprint(const ChatRequest& req) {
  const json canonical = {{"model", req.model}, {"system", req.system}, {"user", req.user}, {"params", req.params}};
  return sha256_hex(canonical.dump());
}

json RawResponse::to_json() const {
  return {{"case_id", case_id},
          {"attempt", attempt},
          {"backend_id", backend_id},
          {"task", task},
          {"scenario_id", scenario_id},
          {"request_fingerprint", request_fingerprint},
          {"text", text},
          {"prompt_tokens", prompt_tokens},
          {"completion_tokens", completion_tokens},
          {"timestamp", timestamp},
          {"transport_status", transport_status},
          {"transport_attempts", transport_attempts}};
}

RawResponse RawResponse::from_json(const json& j) {
  RawResponse r;
  r.case_id = j.at("case_id").get<std::string>();
  r.attempt = j.at("attempt").get<int>();
  r.backend_id = j.value("backend_id", "");
  r.task = j.value("task", "");
  r.scenario_id = j.value("scenario_id", "");
  r.request_fingerprint = j.value("request_fingerprint", "");
  r.text = j.at("text").get<std::string>();
  r.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  r.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  r.timestamp = j.value("timestamp", "");
  r.transport_status = j.value("transport_status", "ok");
  r.transport_attempts = j.value("transport_attempts", 1);
  return r;
}

std::optional<std::filesystem::path> cache_dir_from_env() {
  if (const char* dir = std::getenv("AUDIT_CACHE_DIR"); dir && *dir) return std::filesystem::path(dir);
  return std::nullopt;
}

namespace {

/// Keeps the in-flight gauge honest even when a transport throws.
class InFlight {
 public:
  InFlight(std::counting_semaphore<1024>& slots, std::atomic<int>& gauge, std::atomic<int>& peak)
      : slots_(slots), gauge_(gauge) {
    slots_.acquire();
    const int now = ++gauge_;
    int prev = peak.load();
    while (now > prev && !peak.compare_exchange_weak(prev, now)) {
    }
  }
  ~InFlight() {
    --gauge_;
    slots_.release();
  }
  InFlight(const InFlight&) = delete;
  InFlight& operator=(const InFlight&) = delete;

 private:
  std::counting_semaphore<1024>& slots_;
  std::atomic<int>& gauge_;
};

}  // namespace

Gateway::Gateway(BackendConfig config, std::shared_ptr<Transport> transport, GatewayOptions options)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      options_(std::move(options)),
      slots_(std::clamp(config_.max_concurrency, 1, 1024)) {
  config_.validate();
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::optional<std::int64_t> Gateway::remaining() const {
  if (!config_.budget) return std::nullopt;
  return std::max<std::int64_t>(0, *config_.budget - spent_.load());
}

void Gateway::ensure_auth() const {
  if (config_.auth_env.empty()) return;
  const char* key = std::getenv(config_.auth_env.c_str());
  if (!key || !*key)
    throw AuthMissing("backend '" + config_.backend_id + "': environment variable " + config_.auth_env +
                      " is not set");
}

void Gateway::reserve_budget() {
  std::lock_guard lock(budget_mu_);
  if (config_.budget && spent_.load() >= *config_.budget)
    throw BudgetExhausted("backend '" + config_.backend_id + "': request budget of " +
                          std::to_string(*config_.budget) + " exhausted");
  ++spent_;
}

ChatRequest Gateway::make_request(const std::string& system, const std::string& user) const {
  return ChatRequest{config_.model, system, user, config_.params};
}

std::optional<RawResponse> Gateway::cache_lookup(const std::string& fingerprint) {
  if (!options_.cache_enabled) return std::nullopt;
  std::lock_guard lock(cache_mu_);
  if (auto it = memory_cache_.find(fingerprint); it != memory_cache_.end()) return it->second;
  if (options_.cache_dir) {
    const auto path = *options_.cache_dir / config_.backend_id / fingerprint.substr(0, 2) / (fingerprint + ".json");
    if (std::filesystem::exists(path)) {
      try {
        auto r = RawResponse::from_json(json::parse(read_file(path)));
        memory_cache_.emplace(fingerprint, r);
        return r;
      } catch (const std::exception&) {
        // A corrupt cache entry is treated as a miss.
      }
    }
  }
  return std::nullopt;
}

void Gateway::cache_store(const std::string& key, const RawResponse& r) {
  if (!options_.cache_enabled) return;
  std::lock_guard lock(cache_mu_);
  memory_cache_[key] = r;
  if (options_.cache_dir) {
    const auto path = *options_.cache_dir / config_.backend_id / key.substr(0, 2) / (key + ".json");
    write_file_atomic(path, r.to_json().dump());
  }
}

RawResponse Gateway::send(const std::string& case_id, const ChatRequest& req, const std::string& fingerprint,
                          int attempt) {
  ensure_auth();
  reserve_budget();
  return send_reserved(case_id, req, fingerprint, attempt);
}

RawResponse Gateway::send_reserved(const std::string& case_id, const ChatRequest& req, const std::string& fingerprint,
                                   int attempt) {
  TransportReply reply;
  int tries = 0;
  for (int retry = 0; retry <= config_.max_retries; ++retry) {
    ++tries;
    {
      InFlight guard(slots_, in_flight_, peak_in_flight_);
      reply = transport_->send(req, attempt);
    }
    if (reply.status == TransportReply::Status::Ok) break;
    if (reply.status == TransportReply::Status::AuthRejected)
      throw TransportError("backend '" + config_.backend_id + "' rejected credentials (HTTP " +
                           std::to_string(reply.http_status) + ")");
    if (retry < config_.max_retries) options_.sleep(config_.backoff * (1LL << std::min(retry, 16)));
  }
  if (reply.status != TransportReply::Status::Ok)
    throw TransportError("backend '" + config_.backend_id + "' failed after " + std::to_string(tries) +
                         " attempts: " + reply.error);

  RawResponse r;
  r.case_id = case_id;
  r.attempt = attempt;
  r.backend_id = config_.backend_id;
  r.request_fingerprint = fingerprint;
  r.text = std::move(reply.text);
  r.prompt_tokens = reply.prompt_tokens;
  r.completion_tokens = reply.completion_tokens;
  r.timestamp = utc_timestamp();
  r.transport_status = "ok";
  r.transport_attempts = tries;
  return r;
}

RawResponse Gateway::query(const PromptCase& c, int attempt) {
  if (attempt < 0 || attempt >= std::max(1, c.repeat_budget))
    throw std::out_of_range("attempt index outside the case's repeat budget");
  const auto req = make_request(c.system_prompt, c.rendered_prompt);
  const auto fp = request_fingerprint(req);
  if (auto hit = cache_lookup(fp)) {
    ++cache_hits_;
    hit->case_id = c.case_id;
    hit->attempt = attempt;
    hit->task = std::string(to_string(c.task));
    hit->scenario_id = c.scenario_id;
    hit->transport_status = "cache";
    return *hit;
  }
  auto r = send(c.case_id, req, fp, attempt);
  r.task = std::string(to_string(c.task));
  r.scenario_id = c.scenario_id;
  cache_store(fp, r);
  return r;
}

RepeatResult Gateway::query_repeats(const PromptCase& c) {
  if (c.repeat_budget < 1) throw std::invalid_argument("repeat_budget must be >= 1");
  std::vector<int> attempts(static_cast<std::size_t>(c.repeat_budget));
  for (int i = 0; i < c.repeat_budget; ++i) attempts[static_cast<std::size_t>(i)] = i;
  return query_attempts(c, attempts);
}

RepeatResult Gateway::query_attempts(const PromptCase& c, const std::vector<int>& attempts,
                                     const std::function<void(const RawResponse&)>& on_response) {
  const auto req = make_request(c.system_prompt, c.rendered_prompt);
  const auto fp = request_fingerprint(req);
  ensure_auth();

  RepeatResult result;
  std::mutex mu;
  std::size_t next = 0;
  bool stop = false;
  std::exception_ptr failure;
  std::vector<std::optional<RawResponse>> slots(attempts.size());

  // Index hand-out and budget reservation happen together, so a truncated
  // run always holds the lowest attempt indices.
  auto worker = [&] {
    while (true) {
      std::size_t idx;
      {
        std::lock_guard lock(mu);
        if (stop || next >= attempts.size()) return;
        try {
          reserve_budget();
        } catch (const BudgetExhausted&) {
          result.truncated = true;
          stop = true;
          return;
        }
        idx = next++;
      }
      try {
        auto r = send_reserved(c.case_id, req, fp, attempts[idx]);
        r.task = std::string(to_string(c.task));
        r.scenario_id = c.scenario_id;
        std::lock_guard lock(mu);
        if (on_response) on_response(r);
        slots[idx] = std::move(r);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
        return;
      }
    }
  };

  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config_.max_concurrency), attempts.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  for (auto& s : slots)
    if (s) result.responses.push_back(std::move(*s));
  return result;
}

RawResponse Gateway::complete(const std::string& tag, const std::string& system, const std::string& user,
                              int attempt, bool use_cache) {
  const auto req = make_request(system, user);
  const auto fp = request_fingerprint(req);
  const auto key = attempt == 0 ? fp : fp + "-" + std::to_string(attempt);
  if (use_cache) {
    if (auto hit = cache_lookup(key)) {
      ++cache_hits_;
      hit->case_id = tag;
      hit->attempt = attempt;
      hit->transport_status = "cache";
      return *hit;
    }
  }
  auto r = send(tag, req, fp, attempt);
  if (use_cache) cache_store(key, r);
  return r;
}

std::shared_ptr<Transport> make_transport(const BackendConfig& config) {
  if (config.kind == "mock") {
    if (!config.mock_script.is_null()) return std::make_shared<MockTransport>(config.mock_script);
    if (config.mock_script_path.empty())
      throw ValidationError("mock backend '" + config.backend_id + "' has no script");
    return std::make_shared<MockTransport>(json::parse(read_file(config.mock_script_path)));
  }
  return std::make_shared<HttpTransport>(config);
}

}  // namespace provaudit
