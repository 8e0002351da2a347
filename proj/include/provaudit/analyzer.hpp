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
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "provaudit/matcher.hpp"
#include "provaudit/registry.hpp"
#include "provaudit/subject_language.hpp"

namespace provaudit {

enum class ExtractionMethod { FencedBlock, HeuristicIndent, WholeBody };
std::string_view to_string(ExtractionMethod m);

struct ExtractedCode {
  std::vector<std::string> blocks;
  ExtractionMethod method = ExtractionMethod::WholeBody;
};

/// Fenced blocks first; otherwise an indentation heuristic over prose-free
/// runs; otherwise the whole body when it carries any code marker, else
/// nothing.
ExtractedCode extract_code(std::string_view response_text, const std::vector<std::string>& markers);
ExtractedCode extract_code(std::string_view response_text);

enum class ValidityReason { Valid, NoCode, RefusalText, Other };
std::string_view to_string(ValidityReason r);
ValidityReason validity_reason_from_string(std::string_view s);

struct ValidityVerdict {
  bool valid = false;
  ValidityReason reason = ValidityReason::NoCode;
};

/// Valid iff some block contains a marker token (whole word, comments
/// included). `response_text` only refines the reason of an invalid verdict.
ValidityVerdict validity(const ExtractedCode& extracted, const std::vector<std::string>& markers,
                         std::string_view response_text = {});

enum class LabelSource { Fingerprint, LLMFallback, Sentinel };
std::string_view to_string(LabelSource s);
LabelSource label_source_from_string(std::string_view s);

/// Provider/service assignment for one snippet.
struct Label {
  std::string provider;
  std::optional<std::string> service_name;
  LabelSource source = LabelSource::Sentinel;
  std::vector<Fingerprint> matched;
  /// Set for fallback labels naming a provider unknown to the registry.
  bool quarantined = false;
};

struct LabeledResponse {
  std::string case_id;
  int attempt = 0;
  /// Index of the block for per-block labeling (Multiple), else 0.
  int block = 0;
  ValidityVerdict verdict;
  ExtractionMethod extraction = ExtractionMethod::WholeBody;
  std::optional<Label> label;
  /// Error that prevented labeling (e.g. "AmbiguousLabel: ...").
  std::optional<std::string> error;

  nlohmann::json to_json() const;
  static LabeledResponse from_json(const nlohmann::json& j);
};

/// Fingerprints learned from fallback answers. Kept apart from the curated
/// registry; merged only by an explicit promote step.
struct LearnedEntry {
  std::string scenario_id;
  std::string provider;
  std::string service_name;
  std::vector<Fingerprint> fingerprints;
  bool quarantined = false;

  nlohmann::json to_json() const;
  static LearnedEntry from_json(const nlohmann::json& j);
};

class LearnedStore {
 public:
  LearnedStore() = default;
  /// Loads an append-only JSONL file (missing file means an empty store).
  explicit LearnedStore(std::filesystem::path path);

  /// Exact import or URL equality against entries of the scenario.
  std::optional<Label> match(std::string_view scenario_id, const CodeFeatures& features) const;
  void add(LearnedEntry entry);

  const std::vector<LearnedEntry>& entries() const { return entries_; }
  std::vector<LearnedEntry> quarantine() const;

 private:
  std::optional<std::filesystem::path> path_;
  std::vector<LearnedEntry> entries_;
  mutable std::mutex mu_;
};

/// "The following code is used to perform <SCENARIO>.<CODE> Please tell me
/// which service from which company is used by the code to complete the
/// given task."
std::string build_fallback_prompt(const Scenario& scenario, std::string_view code,
                                  const SubjectLanguage& lang = SubjectLanguage::python());

struct FallbackAnswer {
  std::string provider;
  std::optional<std::string> service_name;
  bool known = false;
};

/// Picks the provider named in a fallback reply. Known providers (the
/// scenario's first, then the whole registry) win; otherwise a
/// "Company: X" / "from X" phrase yields a novel provider.
std::optional<FallbackAnswer> parse_fallback_reply(std::string_view reply, const Scenario& scenario,
                                                   const std::vector<std::string>& known_providers);

/// Asks a model to name the service; returns the reply text.
using FallbackQuery = std::function<std::string(const std::string& prompt)>;

struct LabelerOptions {
  SubjectLanguage language = SubjectLanguage::python();
  /// Enables the LLM fallback when set.
  FallbackQuery fallback;
  LearnedStore* learned = nullptr;
};

class Labeler {
 public:
  Labeler(const Registry& registry, LabelerOptions options = {});

  /// Scoped fingerprints, then learned fingerprints, then the fallback (when
  /// enabled and the code references anything third-party), then sentinels.
  /// Throws AmbiguousLabel.
  Label label(std::string_view scenario_id, std::string_view code) const;

  /// Full response pipeline: extract, check validity, label. With
  /// `per_block`, each block is labeled separately (Multiple responses).
  std::vector<LabeledResponse> label_response(std::string_view scenario_id, const std::string& case_id,
                                              int attempt, std::string_view response_text,
                                              const std::vector<std::string>& markers, bool per_block) const;

 private:
  const Registry& registry_;
  LabelerOptions options_;
  std::vector<std::string> known_providers_;
};

enum class ModificationCategory { SameProvider, ProviderSwapped, ServiceDropped, Invalid };
std::string_view to_string(ModificationCategory c);

struct ModificationVerdict {
  bool is_modification = false;
  std::string source_provider;
  std::string target_provider;
  ModificationCategory category = ModificationCategory::Invalid;
};

/// Compares a labeled response with the seed's provider. Throws MissingSource
/// when `source_provider` is empty.
ModificationVerdict detect_modification(const LabeledResponse& labeled, std::string_view source_provider);

}  // namespace provaudit
