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

#include "provaudit/mock_backend.hpp"

#include <regex>

#include "provaudit/errors.hpp"
#include "provaudit/rng.hpp"

namespace provaudit {

using nlohmann::json;

double mock_uniform(std::uint64_t seed, const std::string& fingerprint, int attempt) {
  const std::uint64_t key = mix64(seed ^ mix64(fnv1a64(fingerprint) + static_cast<std::uint64_t>(attempt)));
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

namespace {

void check_rule(const json& rule, std::size_t i) {
  const std::string where = "mock script rules[" + std::to_string(i) + "]";
  if (!rule.is_object()) throw ValidationError(where + ": must be an object");
  int outputs = 0;
  for (const char* k : {"reply", "choices", "sequence", "echo_code"}) outputs += rule.contains(k) ? 1 : 0;
  if (outputs != 1) throw ValidationError(where + ": needs exactly one of reply, choices, sequence, echo_code");
  if (rule.contains("choices")) {
    const auto& ch = rule["choices"];
    if (!ch.is_array() || ch.empty()) throw ValidationError(where + ".choices: must be a non-empty array");
    double total = 0;
    for (const auto& c : ch) total += c.value("weight", 1.0);
    if (total <= 0) throw ValidationError(where + ".choices: weights must sum to a positive value");
  }
  if (rule.contains("sequence") && (!rule["sequence"].is_array() || rule["sequence"].empty()))
    throw ValidationError(where + ".sequence: must be a non-empty array");
}

// The first fenced block of the prompt, or the text after the last "code:".
std::string code_in_prompt(const std::string& user) {
  static const std::regex fence("```[A-Za-z0-9_+-]*\\n([\\s\\S]*?)```");
  std::smatch m;
  if (std::regex_search(user, m, fence)) return m[1].str();
  return {};
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  if (from.empty()) return s;
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
  return s;
}

}  // namespace

MockTransport::MockTransport(json script) : script_(std::move(script)) {
  if (!script_.is_object()) throw ValidationError("mock script must be a JSON object");
  seed_ = script_.value("seed", std::uint64_t{0});
  if (script_.contains("rules")) {
    if (!script_["rules"].is_array()) throw ValidationError("mock script rules must be an array");
    for (std::size_t i = 0; i < script_["rules"].size(); ++i) check_rule(script_["rules"][i], i);
  }
  const auto on_miss = script_.value("on_miss", "default");
  if (on_miss != "default" && on_miss != "error")
    throw ValidationError("mock script on_miss must be 'default' or 'error'");
}

const json* MockTransport::find_rule(const ChatRequest& request, const std::string& fingerprint,
                                     int attempt) const {
  if (!script_.contains("rules")) return nullptr;
  for (const auto& rule : script_["rules"]) {
    const json when = rule.value("when", json::object());
    if (when.contains("contains") && request.user.find(when["contains"].get<std::string>()) == std::string::npos)
      continue;
    if (when.contains("system_contains") &&
        request.system.find(when["system_contains"].get<std::string>()) == std::string::npos)
      continue;
    if (when.contains("fingerprint") && when["fingerprint"].get<std::string>() != fingerprint) continue;
    if (when.contains("attempts")) {
      bool hit = false;
      for (const auto& a : when["attempts"]) hit = hit || a.get<int>() == attempt;
      if (!hit) continue;
    }
    return &rule;
  }
  return nullptr;
}

std::optional<std::string> MockTransport::reply_for(const ChatRequest& request, int attempt) const {
  const auto fp = request_fingerprint(request);
  const json* rule = find_rule(request, fp, attempt);
  if (!rule) {
    if (script_.value("on_miss", "default") == "error") return std::nullopt;
    return script_.value("default_reply", "");
  }
  if (rule->contains("reply")) return (*rule)["reply"].get<std::string>();
  if (rule->contains("sequence")) {
    const auto& seq = (*rule)["sequence"];
    return seq[static_cast<std::size_t>(attempt) % seq.size()].get<std::string>();
  }
  if (rule->contains("choices")) {
    const auto& ch = (*rule)["choices"];
    double total = 0;
    for (const auto& c : ch) total += c.value("weight", 1.0);
    const double u = mock_uniform(seed_, fp, attempt) * total;
    double acc = 0;
    for (const auto& c : ch) {
      acc += c.value("weight", 1.0);
      if (u < acc) return c.at("reply").get<std::string>();
    }
    return ch.back().at("reply").get<std::string>();
  }
  // echo_code
  const auto& echo = (*rule)["echo_code"];
  std::string code = code_in_prompt(request.user);
  for (const auto& r : echo.value("replace", json::array()))
    code = replace_all(code, r.at("from").get<std::string>(), r.at("to").get<std::string>());
  return echo.value("prefix", "") + "```python\n" + code + "```\n" + echo.value("suffix", "");
}

TransportReply MockTransport::send(const ChatRequest& request, int attempt) {
  const auto fp = request_fingerprint(request);
  if (const json* rule = find_rule(request, fp, attempt); rule && rule->contains("fail_first")) {
    const int fail = (*rule)["fail_first"].get<int>();
    std::lock_guard lock(mu_);
    int& served = failures_served_[{fp, attempt}];
    if (served < fail) {
      ++served;
      TransportReply r;
      r.status = TransportReply::Status::Failure;
      r.http_status = 503;
      r.error = "injected failure " + std::to_string(served) + " of " + std::to_string(fail);
      return r;
    }
  }
  auto text = reply_for(request, attempt);
  if (!text) throw MockMiss("mock script has no rule for request " + fp.substr(0, 12));
  TransportReply r;
  r.http_status = 200;
  r.text = std::move(*text);
  r.prompt_tokens = static_cast<std::int64_t>((request.system.size() + request.user.size()) / 4);
  r.completion_tokens = static_cast<std::int64_t>(r.text.size() / 4);
  return r;
}

BackendConfig mock_backend(json script, std::string backend_id) {
  BackendConfig c;
  c.backend_id = std::move(backend_id);
  c.kind = "mock";
  c.model = "mock";
  c.backoff = std::chrono::milliseconds(0);
  c.mock_script = std::move(script);
  return c;
}

}  // namespace provaudit
