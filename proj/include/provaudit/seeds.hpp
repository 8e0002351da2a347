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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "provaudit/gateway.hpp"
#include "provaudit/prompts.hpp"
#include "provaudit/registry.hpp"

namespace provaudit {

/// Seed code on disk: `<dir>/<scenario>/<requirement>/<service>.<ext>` plus a
/// `.meta.json` sidecar {service, provider, verified, generator_model}.
class SeedStore {
 public:
  SeedStore(std::filesystem::path dir, SubjectLanguage lang = SubjectLanguage::python());

  std::filesystem::path code_path(const std::string& scenario_id, const std::string& requirement_id,
                                  const std::string& service_name) const;
  std::filesystem::path meta_path(const std::string& scenario_id, const std::string& requirement_id,
                                  const std::string& service_name) const;

  std::optional<SeedCode> load(const std::string& scenario_id, const std::string& requirement_id,
                               const ServiceEntry& service) const;
  void save(const std::string& scenario_id, const std::string& requirement_id, const SeedCode& seed) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  SubjectLanguage lang_;
};

struct SeedAttempt {
  int attempt = 0;
  std::string outcome;  // "verified", "rejected", "indeterminate", "no_code"
};

struct SeedGeneration {
  std::optional<SeedCode> seed;
  std::vector<SeedAttempt> attempts;
};

/// Asks `gateway` for initial code and has it verify the result, up to
/// `max_attempts` rounds. An indeterminate verdict uses up a round.
SeedGeneration generate_seed(Gateway& gateway, const Scenario& scenario, const Requirement& requirement,
                             const ServiceEntry& service, const SubjectLanguage& lang, int max_attempts);

}  // namespace provaudit
