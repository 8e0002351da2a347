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

#include <string>

#include "provaudit/gateway.hpp"

namespace provaudit {

/// OpenAI-compatible chat-completions client. The API key is read from the
/// environment variable named by `auth_env` at send time.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(BackendConfig config);

  TransportReply send(const ChatRequest& request, int attempt) override;

  /// Request body for `request` (exposed for tests).
  static nlohmann::json request_body(const ChatRequest& request);
  /// Extracts the reply from a response body; BadBody when it does not parse.
  static TransportReply parse_body(int http_status, const std::string& body);

 private:
  BackendConfig config_;
  std::string scheme_host_;
  std::string path_;
};

}  // namespace provaudit
