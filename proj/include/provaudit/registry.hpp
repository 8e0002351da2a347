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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace provaudit {

inline constexpr std::string_view kProviderNone = "None";
inline constexpr std::string_view kProviderPythonLibrary = "Python Library";

/// True for the reserved labels that never name a registry provider.
bool is_sentinel_provider(std::string_view provider);

enum class FingerprintKind { LibraryImport, UrlTemplate, Keyword };

std::string_view to_string(FingerprintKind kind);
FingerprintKind fingerprint_kind_from_string(std::string_view s);

/// A textual feature identifying one provider's service.
///
/// LibraryImport patterns are exact module names (a dotted prefix of an
/// imported module also matches). UrlTemplate patterns are substrings of a URL
/// with at most one `*` wildcard. Keywords match case-insensitively on word
/// boundaries.
struct Fingerprint {
  FingerprintKind kind = FingerprintKind::Keyword;
  std::string pattern;

  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

struct ServiceEntry {
  std::string service_name;
  std::string provider;
  std::vector<Fingerprint> fingerprints;
  std::vector<std::string> subject_language_support;

  bool supports_language(std::string_view tag) const;

  friend bool operator==(const ServiceEntry&, const ServiceEntry&) = default;
};

struct Requirement {
  std::string id;
  std::string title;
  std::string description;
  /// Text for the AddFunctionality `<DESCRIPTION>` slot; falls back to
  /// `description` when empty.
  std::string new_functionality;

  friend bool operator==(const Requirement&, const Requirement&) = default;
};

struct Scenario {
  std::string id;
  std::string name;
  std::vector<Requirement> requirements;
  std::vector<ServiceEntry> services;

  const Requirement& requirement(std::string_view requirement_id) const;
  /// Distinct providers in registry order.
  std::vector<std::string> providers() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ScopedMatcher;

/// Immutable, validated audit registry.
class Registry {
 public:
  Registry() = default;

  /// Validates every invariant; throws ValidationError naming the offending
  /// JSON path. Services without a language list inherit `default_language`.
  static Registry from_json(const nlohmann::json& doc, const std::string& default_language = "python");
  static Registry parse(std::string_view text, const std::string& default_language = "python");

  nlohmann::json to_json() const;

  const std::vector<Scenario>& scenarios() const { return scenarios_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  const Scenario& scenario(std::string_view id) const;
  /// Accepts either the id slug or the display name.
  const Scenario& lookup(std::string_view id_or_name) const;
  bool contains(std::string_view id) const;

  /// Services of a scenario in file order.
  const std::vector<ServiceEntry>& services_for(std::string_view scenario_id) const;

  /// A matcher over the fingerprints of this scenario's services only.
  ScopedMatcher fingerprint_index(std::string_view scenario_id) const;

  /// Every provider named anywhere in the registry, sorted.
  std::vector<std::string> all_providers() const;

  friend bool operator==(const Registry& a, const Registry& b) { return a.scenarios_ == b.scenarios_; }

 private:
  std::vector<Scenario> scenarios_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::vector<std::string> warnings_;
};

Registry load_registry(const std::filesystem::path& path, const std::string& default_language = "python");

}  // namespace provaudit
