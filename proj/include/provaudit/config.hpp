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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "provaudit/gateway.hpp"
#include "provaudit/prompts.hpp"
#include "provaudit/subject_language.hpp"

namespace provaudit {

struct SeedSettings {
  /// "files": read pre-supplied seeds; "generate": ask a backend and verify.
  std::string mode = "files";
  std::filesystem::path dir = "seeds";
  std::string generator_backend;
  /// Queries allowed per seed, indeterminate verdicts included.
  int max_attempts = 5;
};

struct FallbackSettings {
  bool enabled = false;
  std::string backend;
};

/// Everything an audit needs besides the registry. Relative paths are
/// resolved against the config file's directory.
struct AuditConfig {
  std::string run_id;
  std::uint64_t rng_seed = 0;
  SubjectLanguage language = SubjectLanguage::python();
  std::vector<TaskKind> tasks = {TaskKind::Generation};
  /// Empty means every registry scenario.
  std::vector<std::string> scenarios;
  std::vector<DebiasMethod> debias;
  /// Sample the debias evaluation subset instead of the full expansion.
  bool debias_subset = false;
  /// Earlier run whose verdicts pick modification-triggering prompts.
  std::optional<std::filesystem::path> debias_prior_run;
  RepeatPolicy repeats;
  /// Validity markers; empty means the subject language defaults.
  std::vector<std::string> markers;
  bool include_none = true;
  int bootstrap_b = 1000;
  std::optional<std::size_t> bootstrap_resample_size;
  std::vector<BackendConfig> backends;
  SeedSettings seeds;
  FallbackSettings fallback;
  std::filesystem::path learned_store = "learned_fingerprints.jsonl";
  DebiasTexts debias_texts;
  bool cache_enabled = true;

  const std::vector<std::string>& effective_markers() const {
    return markers.empty() ? language.default_markers : markers;
  }
  const BackendConfig& backend(const std::string& id) const;

  /// Throws ValidationError.
  void validate() const;
  nlohmann::json to_json() const;
  /// Like to_json, but with backend credentials references kept and mock
  /// scripts elided; what goes into a run manifest.
  nlohmann::json to_manifest_json() const;
  static AuditConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
};

AuditConfig load_config(const std::filesystem::path& path);

}  // namespace provaudit
