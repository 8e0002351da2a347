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

#include "provaudit/seeds.hpp"

#include <nlohmann/json.hpp>

#include "provaudit/analyzer.hpp"
#include "provaudit/errors.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;

namespace {

std::string extension(const SubjectLanguage& lang) { return lang.tag == "python" ? ".py" : "." + lang.tag; }

}  // namespace

SeedStore::SeedStore(std::filesystem::path dir, SubjectLanguage lang) : dir_(std::move(dir)), lang_(std::move(lang)) {}

std::filesystem::path SeedStore::code_path(const std::string& scenario_id, const std::string& requirement_id,
                                           const std::string& service_name) const {
  return dir_ / scenario_id / requirement_id / (slugify(service_name) + extension(lang_));
}

std::filesystem::path SeedStore::meta_path(const std::string& scenario_id, const std::string& requirement_id,
                                           const std::string& service_name) const {
  return dir_ / scenario_id / requirement_id / (slugify(service_name) + ".meta.json");
}

std::optional<SeedCode> SeedStore::load(const std::string& scenario_id, const std::string& requirement_id,
                                        const ServiceEntry& service) const {
  const auto code = code_path(scenario_id, requirement_id, service.service_name);
  if (!std::filesystem::exists(code)) return std::nullopt;
  SeedCode s;
  s.text = read_file(code);
  s.source_service = service.service_name;
  s.source_provider = service.provider;
  const auto meta = meta_path(scenario_id, requirement_id, service.service_name);
  if (std::filesystem::exists(meta)) {
    try {
      const auto j = json::parse(read_file(meta));
      s.source_service = j.value("service", s.source_service);
      s.source_provider = j.value("provider", s.source_provider);
      s.verified = j.value("verified", false);
      s.generator_model = j.value("generator_model", "");
    } catch (const json::exception& e) {
      throw ParseError(meta.string() + ": " + e.what());
    }
  }
  return s;
}

void SeedStore::save(const std::string& scenario_id, const std::string& requirement_id, const SeedCode& seed) const {
  write_file_atomic(code_path(scenario_id, requirement_id, seed.source_service), seed.text);
  const json meta = {{"service", seed.source_service},
                     {"provider", seed.source_provider},
                     {"verified", seed.verified},
                     {"generator_model", seed.generator_model}};
  write_file_atomic(meta_path(scenario_id, requirement_id, seed.source_service), meta.dump(2) + "\n");
}

SeedGeneration generate_seed(Gateway& gateway, const Scenario& scenario, const Requirement& requirement,
                             const ServiceEntry& service, const SubjectLanguage& lang, int max_attempts) {
  SeedGeneration out;
  const auto request = build_init_code_request(service.provider, service.service_name, scenario, requirement);
  const std::string tag = "seed/" + scenario.id + "/" + requirement.id + "/" + slugify(service.service_name);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const auto reply = gateway.complete(tag, "", request, attempt, true);
    const auto extracted = extract_code(reply.text, lang.default_markers);
    if (!validity(extracted, lang.default_markers, reply.text).valid) {
      out.attempts.push_back({attempt, "no_code"});
      continue;
    }
    std::string code;
    for (const auto& b : extracted.blocks) code += b;
    const auto check = gateway.complete(tag + "#verify", "",
                                        build_verification_request(service.service_name, service.provider, code, lang),
                                        attempt, true);
    try {
      if (!parse_verification_reply(check.text)) {
        out.attempts.push_back({attempt, "rejected"});
        continue;
      }
    } catch (const VerificationIndeterminate&) {
      out.attempts.push_back({attempt, "indeterminate"});
      continue;
    }
    out.attempts.push_back({attempt, "verified"});
    out.seed = SeedCode{code, service.service_name, service.provider, true, gateway.config().model};
    break;
  }
  return out;
}

}  // namespace provaudit
