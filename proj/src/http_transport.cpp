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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "provaudit/http_transport.hpp"

#include <cstdlib>

#include <httplib.h>

#include "provaudit/errors.hpp"

namespace provaudit {

using nlohmann::json;

HttpTransport::HttpTransport(BackendConfig config) : config_(std::move(config)) {
  const auto& ep = config_.endpoint;
  const auto scheme_end = ep.find("://");
  if (scheme_end == std::string::npos)
    throw ValidationError("backend '" + config_.backend_id + "': endpoint needs a scheme: " + ep);
  const auto path_start = ep.find('/', scheme_end + 3);
  scheme_host_ = ep.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/v1/chat/completions" : ep.substr(path_start);
}

json HttpTransport::request_body(const ChatRequest& request) {
  json messages = json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  json body = request.params.is_object() ? request.params : json::object();
  body["model"] = request.model;
  body["messages"] = messages;
  return body;
}

TransportReply HttpTransport::parse_body(int http_status, const std::string& body) {
  TransportReply r;
  r.http_status = http_status;
  if (http_status == 401 || http_status == 403) {
    r.status = TransportReply::Status::AuthRejected;
    r.error = "HTTP " + std::to_string(http_status);
    return r;
  }
  if (http_status < 200 || http_status >= 300) {
    r.status = TransportReply::Status::Failure;
    r.error = "HTTP " + std::to_string(http_status);
    return r;
  }
  try {
    const auto j = json::parse(body);
    r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      r.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
      r.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
    }
  } catch (const std::exception& e) {
    // An unparseable body is retried like a transport failure.
    r.status = TransportReply::Status::BadBody;
    r.error = std::string("malformed response body: ") + e.what();
  }
  return r;
}

TransportReply HttpTransport::send(const ChatRequest& request, int /*attempt*/) {
  httplib::Client client(scheme_host_);
  client.set_connection_timeout(30);
  client.set_read_timeout(300);
  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    const char* key = std::getenv(config_.auth_env.c_str());
    if (!key || !*key) throw AuthMissing("environment variable " + config_.auth_env + " is not set");
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(path_, headers, request_body(request).dump(), "application/json");
  if (!res) {
    TransportReply r;
    r.status = TransportReply::Status::Failure;
    r.error = httplib::to_string(res.error());
    return r;
  }
  return parse_body(res->status, res->body);
}

}  // namespace provaudit
