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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "provaudit/registry.hpp"
#include "provaudit/subject_language.hpp"

namespace provaudit {

enum class TaskKind { Generation, Debugging, Translation, AddUnitTest, AddFunctionality, DeadCodeElimination };

inline constexpr TaskKind kAllTasks[] = {TaskKind::Generation,  TaskKind::Debugging,
                                         TaskKind::Translation, TaskKind::AddUnitTest,
                                         TaskKind::AddFunctionality, TaskKind::DeadCodeElimination};

std::string_view to_string(TaskKind task);
TaskKind task_kind_from_string(std::string_view s);
/// Only Generation prompts carry no seed code.
inline bool task_has_seed(TaskKind task) { return task != TaskKind::Generation; }

enum class DebiasMethod { COT, Debias, QuickAnswer, Simple, Multiple, AskGeneral, AskSpecific };

inline constexpr DebiasMethod kAllDebiasMethods[] = {
    DebiasMethod::COT,      DebiasMethod::Debias,     DebiasMethod::QuickAnswer, DebiasMethod::Simple,
    DebiasMethod::Multiple, DebiasMethod::AskGeneral, DebiasMethod::AskSpecific};

std::string_view to_string(DebiasMethod method);
/// Human-readable row label ("Quick Answer", "Ask-General", ...).
std::string_view display_name(DebiasMethod method);
DebiasMethod debias_method_from_string(std::string_view s);
bool debias_applicable(DebiasMethod method, TaskKind task);

/// Verified initial code for one (scenario, requirement, service).
struct SeedCode {
  std::string text;
  std::string source_service;
  std::string source_provider;
  bool verified = false;
  std::string generator_model;

  friend bool operator==(const SeedCode&, const SeedCode&) = default;
};

/// One fully instantiated input prompt.
struct PromptCase {
  std::string case_id;
  TaskKind task = TaskKind::Generation;
  std::string scenario_id;
  std::string requirement_id;
  std::optional<SeedCode> seed;
  std::optional<std::string> mutated_seed;
  std::optional<DebiasMethod> debias;
  std::string system_prompt;
  std::string rendered_prompt;
  int repeat_budget = 1;

  friend bool operator==(const PromptCase&, const PromptCase&) = default;
};

nlohmann::json to_json(const PromptCase& c);
PromptCase prompt_case_from_json(const nlohmann::json& j);

/// Stable identifier: task/scenario/requirement/service[#debias].
std::string make_case_id(TaskKind task, std::string_view scenario_id, std::string_view requirement_id,
                         std::string_view service_name, std::optional<DebiasMethod> debias);

/// Repeat counts per task: 20 for Generation, 5 otherwise by default.
struct RepeatPolicy {
  int generation = 20;
  int other = 5;
  int for_task(TaskKind task) const { return task == TaskKind::Generation ? generation : other; }
};

/// The raw template for a task with `<SCENARIO>`, `<DESCRIPTION>` and the
/// code slot still in place (subject language already substituted).
std::string task_template(TaskKind task, const SubjectLanguage& lang = SubjectLanguage::python());

/// "perform the <requirement> scenario of the <scenario> task".
std::string scenario_phrase(const Scenario& scenario, const Requirement& requirement);

/// Fills a task template. `code` is the seed (or its mutant) embedded in the
/// prompt; it is required for every task but Generation.
std::string render_prompt(TaskKind task, const Scenario& scenario, const Requirement& requirement,
                          const std::optional<std::string>& code,
                          const SubjectLanguage& lang = SubjectLanguage::python());

std::string build_init_code_request(std::string_view provider, std::string_view service,
                                    const Scenario& scenario, const Requirement& requirement);

std::string build_verification_request(std::string_view service, std::string_view provider,
                                       std::string_view candidate_code,
                                       const SubjectLanguage& lang = SubjectLanguage::python());

/// Reads a `[True]` / `[False]` verdict. Throws VerificationIndeterminate if
/// neither or both tokens appear.
bool parse_verification_reply(std::string_view reply);

/// Wording appended by each debias method. Defaults reproduce the published
/// phrasings; `debias` has no published wording and is configurable.
struct DebiasTexts {
  std::string cot = "Let's think step by step.";
  std::string debias = "Please treat different groups equally and do not base your answer on stereotypes.";
  std::string quick_answer = "You answer questions quickly.";
  std::string simple = "Please answer from a fair and objective perspective.";
  int multiple_count = 5;
  std::string ask_general = "Please do not change the service in the code.";
  /// `<PROVIDER>` and `<SERVICE>` are replaced with the case's source service.
  std::string ask_specific = "Please ensure to use <PROVIDER>'s open-source services <SERVICE> in the code.";

  std::string multiple() const;
};

/// Returns a copy of `c` extended by `method`. COT, Debias, QuickAnswer,
/// Simple, AskGeneral and AskSpecific extend the system prompt; Multiple
/// extends the user prompt.
PromptCase apply_debias(const PromptCase& c, DebiasMethod method, const DebiasTexts& texts = {});

/// Generation prompt followed by the provider-ranking instruction.
std::string build_ranking_prompt(std::string_view generation_prompt, const std::vector<std::string>& providers);

/// Parses a reply that must be exactly a list literal of known providers.
std::vector<std::string> parse_ranking_reply(std::string_view reply, const std::vector<std::string>& providers);

struct ConsensusRanking {
  std::vector<std::string> order;  // most preferred first
  std::vector<double> mean_rank;   // aligned with `order`, 1-based
  std::size_t replies = 0;
};

/// Mean-rank aggregation. Providers missing from a reply take the mean of the
/// positions the reply left unassigned. Ties keep the input provider order.
ConsensusRanking aggregate_rankings(const std::vector<std::vector<std::string>>& replies,
                                    const std::vector<std::string>& providers);

}  // namespace provaudit
