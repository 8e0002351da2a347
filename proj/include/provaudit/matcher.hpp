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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "provaudit/registry.hpp"

namespace provaudit {

/// Imports and URLs found in a snippet.
struct CodeFeatures {
  /// Every module name the snippet imports, including `pkg.name` for
  /// `from pkg import name`.
  std::vector<std::string> imports;
  std::vector<std::string> urls;

  /// Imports that are neither standard library nor relative.
  std::vector<std::string> third_party_imports;
  /// URLs that do not point at the local machine.
  std::vector<std::string> external_urls;
};

CodeFeatures scan_code(std::string_view code, std::string_view language_tag = "python");

/// True when `module` equals `pattern` or lives below it (`pattern.`).
bool import_matches(std::string_view module, std::string_view pattern);
/// Substring match with a single optional `*` standing for any run of
/// non-space characters.
bool url_matches(std::string_view url, std::string_view pattern);

struct MatchedService {
  std::size_t service_index = 0;
  std::string service_name;
  std::string provider;
  FingerprintKind tier = FingerprintKind::Keyword;
  std::vector<Fingerprint> matched;
};

/// Fingerprint matcher restricted to one scenario's services.
class ScopedMatcher {
 public:
  ScopedMatcher() = default;
  ScopedMatcher(std::string scenario_id, std::vector<ServiceEntry> services,
                std::string language_tag = "python");

  const std::string& scenario_id() const { return scenario_id_; }
  const std::vector<ServiceEntry>& services() const { return services_; }
  const std::string& language_tag() const { return language_tag_; }

  /// Highest-priority match (imports, then URLs, then keywords; registry
  /// order within a tier). Throws AmbiguousLabel if two different providers
  /// match in the winning tier.
  std::optional<MatchedService> match(std::string_view code) const;
  std::optional<MatchedService> match(std::string_view code, const CodeFeatures& features) const;

 private:
  bool fingerprint_hits(const Fingerprint& fp, std::string_view code,
                        const CodeFeatures& features) const;

  std::string scenario_id_;
  std::vector<ServiceEntry> services_;
  std::string language_tag_ = "python";
};

}  // namespace provaudit
