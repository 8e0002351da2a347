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

#include "provaudit/registry.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include <nlohmann/json.hpp>

#include "provaudit/errors.hpp"
#include "provaudit/matcher.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;

bool is_sentinel_provider(std::string_view provider) {
  return provider == kProviderNone || provider == kProviderPythonLibrary;
}

std::string_view to_string(FingerprintKind kind) {
  switch (kind) {
    case FingerprintKind::LibraryImport: return "library_import";
    case FingerprintKind::UrlTemplate: return "url_template";
    case FingerprintKind::Keyword: return "keyword";
  }
  return "keyword";
}

FingerprintKind fingerprint_kind_from_string(std::string_view s) {
  const auto k = to_lower(s);
  if (k == "library_import" || k == "libraryimport" || k == "import") return FingerprintKind::LibraryImport;
  if (k == "url_template" || k == "urltemplate" || k == "url") return FingerprintKind::UrlTemplate;
  if (k == "keyword") return FingerprintKind::Keyword;
  throw ValidationError("unknown fingerprint kind '" + std::string(s) + "'");
}

bool ServiceEntry::supports_language(std::string_view tag) const {
  const auto t = to_lower(tag);
  return std::any_of(subject_language_support.begin(), subject_language_support.end(),
                     [&](const std::string& s) { return to_lower(s) == t; });
}

const Requirement& Scenario::requirement(std::string_view requirement_id) const {
  for (const auto& r : requirements)
    if (r.id == requirement_id) return r;
  throw UnknownScenario("scenario '" + id + "' has no requirement '" + std::string(requirement_id) + "'");
}

std::vector<std::string> Scenario::providers() const {
  std::vector<std::string> out;
  for (const auto& s : services)
    if (std::find(out.begin(), out.end(), s.provider) == out.end()) out.push_back(s.provider);
  return out;
}

namespace {

const json& require_field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path + "." + key + ": missing");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& path,
                           bool allow_empty = false) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_string()) throw ValidationError(path + "." + key + ": expected a string");
  auto s = v.get<std::string>();
  if (!allow_empty && trim(s).empty()) throw ValidationError(path + "." + key + ": must be non-empty");
  return s;
}

const json& require_array(const json& obj, const char* key, const std::string& path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_array()) throw ValidationError(path + "." + key + ": expected an array");
  return v;
}

Fingerprint parse_fingerprint(const json& j, const std::string& path) {
  Fingerprint fp;
  try {
    fp.kind = fingerprint_kind_from_string(require_string(j, "kind", path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ".kind: " + e.what());
  }
  fp.pattern = require_string(j, "pattern", path);
  if (fp.kind == FingerprintKind::LibraryImport &&
      std::any_of(fp.pattern.begin(), fp.pattern.end(),
                  [](unsigned char c) { return std::isspace(c); })) {
    throw ValidationError(path + ".pattern: library_import pattern contains whitespace");
  }
  if (fp.kind == FingerprintKind::UrlTemplate &&
      std::count(fp.pattern.begin(), fp.pattern.end(), '*') > 1) {
    throw ValidationError(path + ".pattern: url_template allows at most one '*'");
  }
  if (fp.kind == FingerprintKind::UrlTemplate && fp.pattern == "*") {
    throw ValidationError(path + ".pattern: url_template must contain literal text");
  }
  return fp;
}

ServiceEntry parse_service(const json& j, const std::string& path, const std::string& default_language) {
  ServiceEntry s;
  s.service_name = require_string(j, "service_name", path);
  s.provider = require_string(j, "provider", path);
  if (is_sentinel_provider(s.provider))
    throw ValidationError(path + ".provider: '" + s.provider + "' is a reserved sentinel");
  const auto& fps = require_array(j, "fingerprints", path);
  if (fps.empty()) throw ValidationError(path + ".fingerprints: must be non-empty");
  for (std::size_t i = 0; i < fps.size(); ++i)
    s.fingerprints.push_back(parse_fingerprint(fps[i], path + ".fingerprints[" + std::to_string(i) + "]"));
  if (auto it = j.find("subject_language_support"); it != j.end()) {
    if (!it->is_array()) throw ValidationError(path + ".subject_language_support: expected an array");
    for (const auto& tag : *it) {
      if (!tag.is_string()) throw ValidationError(path + ".subject_language_support: expected strings");
      s.subject_language_support.push_back(to_lower(tag.get<std::string>()));
    }
  }
  if (s.subject_language_support.empty()) s.subject_language_support.push_back(to_lower(default_language));
  return s;
}

Requirement parse_requirement(const json& j, const std::string& path) {
  Requirement r;
  r.id = require_string(j, "id", path);
  r.title = require_string(j, "title", path);
  r.description = require_string(j, "description", path);
  if (auto it = j.find("new_functionality"); it != j.end() && it->is_string())
    r.new_functionality = it->get<std::string>();
  return r;
}

}  // namespace

Registry Registry::from_json(const json& doc, const std::string& default_language) {
  Registry reg;
  const auto& scenarios = require_array(doc, "scenarios", "$");
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    const std::string spath = "$.scenarios[" + std::to_string(si) + "]";
    const auto& sj = scenarios[si];
    Scenario sc;
    sc.id = require_string(sj, "id", spath);
    sc.name = require_string(sj, "name", spath);
    if (reg.by_id_.count(sc.id)) throw ValidationError(spath + ".id: duplicate scenario id '" + sc.id + "'");

    const auto& reqs = require_array(sj, "requirements", spath);
    if (reqs.empty()) throw ValidationError(spath + ".requirements: at least one requirement required");
    std::set<std::string> req_ids;
    for (std::size_t ri = 0; ri < reqs.size(); ++ri) {
      const std::string rpath = spath + ".requirements[" + std::to_string(ri) + "]";
      auto r = parse_requirement(reqs[ri], rpath);
      if (!req_ids.insert(r.id).second)
        throw ValidationError(rpath + ".id: duplicate requirement id '" + r.id + "'");
      sc.requirements.push_back(std::move(r));
    }

    const auto& svcs = require_array(sj, "services", spath);
    if (svcs.empty()) throw ValidationError(spath + ".services: at least one service required");
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t vi = 0; vi < svcs.size(); ++vi) {
      const std::string vpath = spath + ".services[" + std::to_string(vi) + "]";
      auto s = parse_service(svcs[vi], vpath, default_language);
      if (!seen.emplace(s.provider, s.service_name).second)
        throw ValidationError(vpath + ": duplicate (provider, service_name) pair (" + s.provider + ", " +
                              s.service_name + ")");
      sc.services.push_back(std::move(s));
    }
    if (sc.services.size() < 5)
      reg.warnings_.push_back("scenario '" + sc.id + "' has " + std::to_string(sc.services.size()) +
                              " services; at least 5 are recommended");

    reg.by_id_.emplace(sc.id, reg.scenarios_.size());
    reg.scenarios_.push_back(std::move(sc));
  }
  return reg;
}

Registry Registry::parse(std::string_view text, const std::string& default_language) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("registry is not valid JSON: ") + e.what());
  }
  return from_json(doc, default_language);
}

json Registry::to_json() const {
  json scenarios = json::array();
  for (const auto& sc : scenarios_) {
    json reqs = json::array();
    for (const auto& r : sc.requirements) {
      json rj = {{"id", r.id}, {"title", r.title}, {"description", r.description}};
      if (!r.new_functionality.empty()) rj["new_functionality"] = r.new_functionality;
      reqs.push_back(std::move(rj));
    }
    json svcs = json::array();
    for (const auto& s : sc.services) {
      json fps = json::array();
      for (const auto& fp : s.fingerprints)
        fps.push_back({{"kind", std::string(to_string(fp.kind))}, {"pattern", fp.pattern}});
      svcs.push_back({{"service_name", s.service_name},
                      {"provider", s.provider},
                      {"fingerprints", std::move(fps)},
                      {"subject_language_support", s.subject_language_support}});
    }
    scenarios.push_back(
        {{"id", sc.id}, {"name", sc.name}, {"requirements", std::move(reqs)}, {"services", std::move(svcs)}});
  }
  return json{{"scenarios", std::move(scenarios)}};
}

const Scenario& Registry::scenario(std::string_view id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw UnknownScenario("unknown scenario '" + std::string(id) + "'");
  return scenarios_[it->second];
}

const Scenario& Registry::lookup(std::string_view id_or_name) const {
  if (auto it = by_id_.find(id_or_name); it != by_id_.end()) return scenarios_[it->second];
  for (const auto& sc : scenarios_)
    if (sc.name == id_or_name) return sc;
  throw UnknownScenario("unknown scenario '" + std::string(id_or_name) + "'");
}

bool Registry::contains(std::string_view id) const { return by_id_.find(id) != by_id_.end(); }

const std::vector<ServiceEntry>& Registry::services_for(std::string_view scenario_id) const {
  return scenario(scenario_id).services;
}

ScopedMatcher Registry::fingerprint_index(std::string_view scenario_id) const {
  const auto& sc = scenario(scenario_id);
  return ScopedMatcher(sc.id, sc.services);
}

std::vector<std::string> Registry::all_providers() const {
  std::set<std::string> providers;
  for (const auto& sc : scenarios_)
    for (const auto& s : sc.services) providers.insert(s.provider);
  return {providers.begin(), providers.end()};
}

Registry load_registry(const std::filesystem::path& path, const std::string& default_language) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  try {
    return Registry::parse(text, default_language);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace provaudit
