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

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "provaudit/gateway.hpp"

namespace provaudit {

/// Scripted offline backend. Every reply is a pure function of the request
/// fingerprint and the repeat index, so runs are reproducible end to end.
///
/// Script format:
///
///     {
///       "seed": 7,
///       "on_miss": "default" | "error",
///       "default_reply": "...",
///       "rules": [
///         {"when": {"contains": "...", "system_contains": "...",
///                   "fingerprint": "...", "attempts": [0, 3]},
///          "reply": "..."                         // fixed text, or
///          "choices": [{"weight": 0.8, "reply": "..."}, ...],   // seeded draw, or
///          "sequence": ["...", "..."],            // indexed by attempt, or
///          "echo_code": {"prefix": "...", "replace": [{"from": "a", "to": "b"}]},
///          "fail_first": 2}                       // transport failures before replying
///       ]
///     }
///
/// The first rule whose `when` clause matches decides the reply.
class MockTransport : public Transport {
 public:
  explicit MockTransport(nlohmann::json script);

  TransportReply send(const ChatRequest& request, int attempt) override;

  /// The reply text alone (no failure injection), for inspection in tests.
  std::optional<std::string> reply_for(const ChatRequest& request, int attempt) const;

 private:
  const nlohmann::json* find_rule(const ChatRequest& request, const std::string& fingerprint, int attempt) const;

  nlohmann::json script_;
  std::uint64_t seed_ = 0;
  std::mutex mu_;
  std::map<std::pair<std::string, int>, int> failures_served_;
};

/// A backend config whose transport is `script`.
BackendConfig mock_backend(nlohmann::json script, std::string backend_id = "mock");

/// Deterministic uniform [0,1) draw keyed by (seed, fingerprint, attempt).
double mock_uniform(std::uint64_t seed, const std::string& fingerprint, int attempt);

}  // namespace provaudit
