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

#include "provaudit/config.hpp"

#include <nlohmann/json.hpp>

#include "provaudit/errors.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;

const BackendConfig& AuditConfig::backend(const std::string& id) const {
  for (const auto& b : backends)
    if (b.backend_id == id) return b;
  throw ValidationError("no backend named '" + id + "' in config");
}

void AuditConfig::validate() const {
  if (tasks.empty()) throw ValidationError("config: tasks must be non-empty");
  if (repeats.generation < 1 || repeats.other < 1) throw ValidationError("config: repeats must be >= 1");
  if (bootstrap_b < 1) throw ValidationError("config: bootstrap.b must be >= 1");
  if (effective_markers().empty()) throw ValidationError("config: marker set is empty");
  if (seeds.mode != "files" && seeds.mode != "generate")
    throw ValidationError("config: seeds.mode must be 'files' or 'generate'");
  if (seeds.max_attempts < 1) throw ValidationError("config: seeds.max_attempts must be >= 1");
  for (std::size_t i = 0; i < backends.size(); ++i) {
    backends[i].validate();
    for (std::size_t j = 0; j < i; ++j)
      if (backends[j].backend_id == backends[i].backend_id)
        throw ValidationError("config: duplicate backend '" + backends[i].backend_id + "'");
  }
  if (seeds.mode == "generate" && !seeds.generator_backend.empty()) backend(seeds.generator_backend);
  if (fallback.enabled) backend(fallback.backend);
}

namespace {

json debias_texts_json(const DebiasTexts& t) {
  return {{"cot", t.cot},
          {"debias", t.debias},
          {"quick_answer", t.quick_answer},
          {"simple", t.simple},
          {"multiple_count", t.multiple_count},
          {"ask_general", t.ask_general},
          {"ask_specific", t.ask_specific}};
}

json base_json(const AuditConfig& c) {
  json tasks = json::array();
  for (auto t : c.tasks) tasks.push_back(to_string(t));
  json debias = json::array();
  for (auto d : c.debias) debias.push_back(to_string(d));
  json j = {{"run_id", c.run_id},
            {"rng_seed", c.rng_seed},
            {"subject_language", c.language.tag},
            {"tasks", tasks},
            {"scenarios", c.scenarios},
            {"debias", debias},
            {"debias_subset", c.debias_subset},
            {"repeats", {{"generation", c.repeats.generation}, {"other", c.repeats.other}}},
            {"markers", c.effective_markers()},
            {"include_none", c.include_none},
            {"bootstrap", {{"b", c.bootstrap_b}}},
            {"seeds",
             {{"mode", c.seeds.mode},
              {"dir", c.seeds.dir.string()},
              {"generator_backend", c.seeds.generator_backend},
              {"max_attempts", c.seeds.max_attempts}}},
            {"fallback", {{"enabled", c.fallback.enabled}, {"backend", c.fallback.backend}}},
            {"learned_store", c.learned_store.string()},
            {"debias_texts", debias_texts_json(c.debias_texts)},
            {"cache", {{"enabled", c.cache_enabled}}}};
  j["bootstrap"]["resample_size"] = c.bootstrap_resample_size ? json(*c.bootstrap_resample_size) : json(nullptr);
  j["debias_prior_run"] = c.debias_prior_run ? json(c.debias_prior_run->string()) : json(nullptr);
  return j;
}

}  // namespace

json AuditConfig::to_json() const {
  json j = base_json(*this);
  j["backends"] = json::array();
  for (const auto& b : backends) {
    json bj = b.to_json();
    if (!b.mock_script.is_null()) bj["mock_script"] = b.mock_script;
    j["backends"].push_back(bj);
  }
  return j;
}

json AuditConfig::to_manifest_json() const {
  json j = base_json(*this);
  j["backends"] = json::array();
  for (const auto& b : backends) {
    json bj = b.to_json();
    if (!b.mock_script.is_null()) bj["mock_script_sha256"] = sha256_hex(b.mock_script.dump());
    else if (!b.mock_script_path.empty() && std::filesystem::exists(b.mock_script_path))
      bj["mock_script_sha256"] = sha256_hex(read_file(b.mock_script_path));
    j["backends"].push_back(bj);
  }
  return j;
}

AuditConfig AuditConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  AuditConfig c;
  try {
    c.run_id = j.value("run_id", "");
    c.rng_seed = j.value("rng_seed", std::uint64_t{0});
    c.language = SubjectLanguage::from_tag(j.value("subject_language", "python"));
    if (j.contains("tasks")) {
      c.tasks.clear();
      for (const auto& t : j["tasks"]) c.tasks.push_back(task_kind_from_string(t.get<std::string>()));
    }
    c.scenarios = j.value("scenarios", std::vector<std::string>{});
    for (const auto& d : j.value("debias", json::array()))
      c.debias.push_back(debias_method_from_string(d.get<std::string>()));
    c.debias_subset = j.value("debias_subset", false);
    if (j.contains("debias_prior_run") && !j["debias_prior_run"].is_null())
      c.debias_prior_run = resolve(j["debias_prior_run"].get<std::string>());
    if (j.contains("repeats")) {
      c.repeats.generation = j["repeats"].value("generation", 20);
      c.repeats.other = j["repeats"].value("other", 5);
    }
    c.markers = j.value("markers", std::vector<std::string>{});
    c.include_none = j.value("include_none", true);
    if (j.contains("bootstrap")) {
      c.bootstrap_b = j["bootstrap"].value("b", 1000);
      if (j["bootstrap"].contains("resample_size") && !j["bootstrap"]["resample_size"].is_null())
        c.bootstrap_resample_size = j["bootstrap"]["resample_size"].get<std::size_t>();
    }
    for (const auto& b : j.value("backends", json::array())) {
      auto bc = BackendConfig::from_json(b);
      if (!bc.mock_script_path.empty()) bc.mock_script_path = resolve(bc.mock_script_path).string();
      c.backends.push_back(std::move(bc));
    }
    if (j.contains("seeds")) {
      const auto& s = j["seeds"];
      c.seeds.mode = s.value("mode", "files");
      c.seeds.dir = resolve(s.value("dir", "seeds"));
      c.seeds.generator_backend = s.value("generator_backend", "");
      c.seeds.max_attempts = s.value("max_attempts", 5);
    } else {
      c.seeds.dir = resolve("seeds");
    }
    if (j.contains("fallback")) {
      c.fallback.enabled = j["fallback"].value("enabled", false);
      c.fallback.backend = j["fallback"].value("backend", "");
    }
    c.learned_store = resolve(j.value("learned_store", "learned_fingerprints.jsonl"));
    if (j.contains("debias_texts")) {
      const auto& t = j["debias_texts"];
      c.debias_texts.cot = t.value("cot", c.debias_texts.cot);
      c.debias_texts.debias = t.value("debias", c.debias_texts.debias);
      c.debias_texts.quick_answer = t.value("quick_answer", c.debias_texts.quick_answer);
      c.debias_texts.simple = t.value("simple", c.debias_texts.simple);
      c.debias_texts.multiple_count = t.value("multiple_count", c.debias_texts.multiple_count);
      c.debias_texts.ask_general = t.value("ask_general", c.debias_texts.ask_general);
      c.debias_texts.ask_specific = t.value("ask_specific", c.debias_texts.ask_specific);
    }
    if (j.contains("cache")) c.cache_enabled = j["cache"].value("enabled", true);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  } catch (const ParseError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

AuditConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return AuditConfig::from_json(j, path.parent_path());
}

}  // namespace provaudit
