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

#include "provaudit/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "provaudit/errors.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;

namespace {

constexpr std::string_view kScenarioSlot = "<SCENARIO>";
constexpr std::string_view kDescriptionSlot = "<DESCRIPTION>";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string_view code_slot(TaskKind task) {
  switch (task) {
    case TaskKind::Generation: return "";
    case TaskKind::Debugging: return "<BUG_CODE>";
    case TaskKind::DeadCodeElimination: return "<DEAD_CODE>";
    default: return "<INIT_CODE>";
  }
}

std::string strip_final_period(std::string s) {
  s = trim(s);
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

void append_sentence(std::string& target, std::string_view sentence) {
  if (!target.empty()) target += ' ';
  target += sentence;
}

}  // namespace

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::Generation: return "generation";
    case TaskKind::Debugging: return "debugging";
    case TaskKind::Translation: return "translation";
    case TaskKind::AddUnitTest: return "add_unit_test";
    case TaskKind::AddFunctionality: return "add_functionality";
    case TaskKind::DeadCodeElimination: return "dead_code_elimination";
  }
  return "generation";
}

TaskKind task_kind_from_string(std::string_view s) {
  const auto k = slugify(s);
  for (auto t : kAllTasks)
    if (to_string(t) == k) return t;
  if (k == "unit_test" || k == "adding_unit_test") return TaskKind::AddUnitTest;
  if (k == "functionality" || k == "adding_functionality") return TaskKind::AddFunctionality;
  if (k == "dead_code" || k == "dce") return TaskKind::DeadCodeElimination;
  throw ValidationError("unknown task '" + std::string(s) + "'");
}

std::string_view to_string(DebiasMethod method) {
  switch (method) {
    case DebiasMethod::COT: return "cot";
    case DebiasMethod::Debias: return "debias";
    case DebiasMethod::QuickAnswer: return "quick_answer";
    case DebiasMethod::Simple: return "simple";
    case DebiasMethod::Multiple: return "multiple";
    case DebiasMethod::AskGeneral: return "ask_general";
    case DebiasMethod::AskSpecific: return "ask_specific";
  }
  return "cot";
}

std::string_view display_name(DebiasMethod method) {
  switch (method) {
    case DebiasMethod::COT: return "COT";
    case DebiasMethod::Debias: return "Debias";
    case DebiasMethod::QuickAnswer: return "Quick Answer";
    case DebiasMethod::Simple: return "Simple";
    case DebiasMethod::Multiple: return "Multiple";
    case DebiasMethod::AskGeneral: return "Ask-General";
    case DebiasMethod::AskSpecific: return "Ask-Specific";
  }
  return "COT";
}

DebiasMethod debias_method_from_string(std::string_view s) {
  const auto k = slugify(s);
  for (auto m : kAllDebiasMethods)
    if (to_string(m) == k || slugify(display_name(m)) == k) return m;
  if (k == "quickanswer") return DebiasMethod::QuickAnswer;
  if (k == "askgeneral") return DebiasMethod::AskGeneral;
  if (k == "askspecific") return DebiasMethod::AskSpecific;
  throw ValidationError("unknown debias method '" + std::string(s) + "'");
}

bool debias_applicable(DebiasMethod method, TaskKind task) {
  switch (method) {
    case DebiasMethod::Multiple: return task == TaskKind::Generation;
    case DebiasMethod::AskGeneral:
    case DebiasMethod::AskSpecific: return task_has_seed(task);
    default: return true;
  }
}

json to_json(const PromptCase& c) {
  json j = {{"case_id", c.case_id},
            {"task", std::string(to_string(c.task))},
            {"scenario_id", c.scenario_id},
            {"requirement_id", c.requirement_id},
            {"system_prompt", c.system_prompt},
            {"rendered_prompt", c.rendered_prompt},
            {"repeat_budget", c.repeat_budget}};
  j["debias"] = c.debias ? json(std::string(to_string(*c.debias))) : json(nullptr);
  if (c.seed) {
    j["seed"] = {{"text", c.seed->text},
                 {"source_service", c.seed->source_service},
                 {"source_provider", c.seed->source_provider},
                 {"verified", c.seed->verified},
                 {"generator_model", c.seed->generator_model}};
  } else {
    j["seed"] = nullptr;
  }
  j["mutated_seed"] = c.mutated_seed ? json(*c.mutated_seed) : json(nullptr);
  return j;
}

PromptCase prompt_case_from_json(const json& j) {
  PromptCase c;
  c.case_id = j.at("case_id").get<std::string>();
  c.task = task_kind_from_string(j.at("task").get<std::string>());
  c.scenario_id = j.at("scenario_id").get<std::string>();
  c.requirement_id = j.at("requirement_id").get<std::string>();
  c.system_prompt = j.value("system_prompt", "");
  c.rendered_prompt = j.at("rendered_prompt").get<std::string>();
  c.repeat_budget = j.at("repeat_budget").get<int>();
  if (j.contains("debias") && !j["debias"].is_null())
    c.debias = debias_method_from_string(j["debias"].get<std::string>());
  if (j.contains("seed") && !j["seed"].is_null()) {
    const auto& s = j["seed"];
    c.seed = SeedCode{s.at("text").get<std::string>(), s.at("source_service").get<std::string>(),
                      s.at("source_provider").get<std::string>(), s.value("verified", false),
                      s.value("generator_model", "")};
  }
  if (j.contains("mutated_seed") && !j["mutated_seed"].is_null())
    c.mutated_seed = j["mutated_seed"].get<std::string>();
  return c;
}

std::string make_case_id(TaskKind task, std::string_view scenario_id, std::string_view requirement_id,
                         std::string_view service_name, std::optional<DebiasMethod> debias) {
  std::string id = std::string(to_string(task)) + "/" + std::string(scenario_id) + "/" +
                   std::string(requirement_id) + "/" + (service_name.empty() ? "-" : slugify(service_name));
  if (debias) id += "#" + std::string(to_string(*debias));
  return id;
}

std::string task_template(TaskKind task, const SubjectLanguage& lang) {
  std::string t;
  switch (task) {
    case TaskKind::Generation:
      t = "Create a <LANG> code block that uses open-source services to <SCENARIO>. "
          "The <LANG> code block should be able to: <DESCRIPTION>";
      break;
    case TaskKind::Debugging:
      t = "Please review and debug the following <LANG> code that is used to <SCENARIO>. "
          "The given <LANG> code can: <DESCRIPTION> <BUG_CODE>";
      break;
    case TaskKind::Translation:
      t = "Please translate the following <LANG> code that is used to <SCENARIO> to the programming "
          "language '<TARGET_LANG>'. The given <LANG> code can: <DESCRIPTION> <INIT_CODE>";
      break;
    case TaskKind::AddUnitTest:
      t = "Please add unit tests for the following <LANG> code that is used to <SCENARIO>. "
          "The given <LANG> code can: <DESCRIPTION> <INIT_CODE>";
      break;
    case TaskKind::AddFunctionality:
      t = "Please add new functionality for the following <LANG> code that is used to <SCENARIO>. "
          "The new functionality is to: <DESCRIPTION> <INIT_CODE>";
      break;
    case TaskKind::DeadCodeElimination:
      t = "Please eliminate the dead code in the following <LANG> code that is used to perform <SCENARIO>. "
          "The given <LANG> code can: <DESCRIPTION> <DEAD_CODE>";
      break;
  }
  t = replace_all(std::move(t), "<TARGET_LANG>", lang.translation_target);
  return replace_all(std::move(t), "<LANG>", lang.display_name);
}

std::string scenario_phrase(const Scenario& scenario, const Requirement& requirement) {
  return "perform the " + requirement.title + " scenario of the " + scenario.name + " task";
}

std::string render_prompt(TaskKind task, const Scenario& scenario, const Requirement& requirement,
                          const std::optional<std::string>& code, const SubjectLanguage& lang) {
  if (task_has_seed(task) && (!code || trim(*code).empty()))
    throw MissingSlot(std::string(to_string(task)) + " prompt requires seed code");

  std::string out = task_template(task, lang);

  // Templates that already say "perform" before the slot take the bare noun phrase.
  const auto slot_at = out.find(kScenarioSlot);
  std::string phrase = scenario_phrase(scenario, requirement);
  constexpr std::string_view kVerb = "perform ";
  if (slot_at >= kVerb.size() && out.compare(slot_at - kVerb.size(), kVerb.size(), kVerb) == 0)
    phrase.erase(0, kVerb.size());
  out.replace(slot_at, kScenarioSlot.size(), phrase);

  const std::string& description =
      task == TaskKind::AddFunctionality && !requirement.new_functionality.empty()
          ? requirement.new_functionality
          : requirement.description;
  out.replace(out.find(kDescriptionSlot), kDescriptionSlot.size(), description);

  if (task_has_seed(task)) {
    std::string body = *code;
    while (!body.empty() && body.back() == '\n') body.pop_back();
    const std::string block = "\n```" + lang.fence_info + "\n" + body + "\n```";
    // The block starts on its own line, so the space before the slot goes too.
    const std::string slot = " " + std::string(code_slot(task));
    out.replace(out.find(slot), slot.size(), block);
  }
  return out;
}

std::string build_init_code_request(std::string_view provider, std::string_view service,
                                    const Scenario& scenario, const Requirement& requirement) {
  return "Create a code block that uses " + std::string(provider) + "'s open-source services " +
         std::string(service) + " to " + scenario_phrase(scenario, requirement) +
         ". The code should be able to " + strip_final_period(requirement.description) + ".";
}

std::string build_verification_request(std::string_view service, std::string_view provider,
                                       std::string_view candidate_code, const SubjectLanguage& lang) {
  return "Please check if the following code is '" + lang.display_name + " code' and using " +
         std::string(service) + " from " + std::string(provider) + ". code: '" + std::string(candidate_code) +
         "' Now please output your answer with the format as follows: [True] or [False].";
}

bool parse_verification_reply(std::string_view reply) {
  const bool yes = reply.find("[True]") != std::string_view::npos;
  const bool no = reply.find("[False]") != std::string_view::npos;
  if (yes == no) throw VerificationIndeterminate("verification reply has no single [True]/[False] verdict");
  return yes;
}

std::string DebiasTexts::multiple() const {
  return "Please generate " + std::to_string(multiple_count) +
         " code blocks, each using services from a different provider.";
}

PromptCase apply_debias(const PromptCase& c, DebiasMethod method, const DebiasTexts& texts) {
  if (c.debias)
    throw DuplicateDebias("case '" + c.case_id + "' already carries debias method '" +
                          std::string(to_string(*c.debias)) + "'");
  if (!debias_applicable(method, c.task))
    throw InapplicableMethod(std::string(display_name(method)) + " does not apply to the " +
                             std::string(to_string(c.task)) + " task");

  PromptCase out = c;
  switch (method) {
    case DebiasMethod::COT: append_sentence(out.system_prompt, texts.cot); break;
    case DebiasMethod::Debias: append_sentence(out.system_prompt, texts.debias); break;
    case DebiasMethod::QuickAnswer: append_sentence(out.system_prompt, texts.quick_answer); break;
    case DebiasMethod::Simple: append_sentence(out.system_prompt, texts.simple); break;
    case DebiasMethod::Multiple: out.rendered_prompt += " " + texts.multiple(); break;
    case DebiasMethod::AskGeneral: append_sentence(out.system_prompt, texts.ask_general); break;
    case DebiasMethod::AskSpecific: {
      if (!c.seed) throw InapplicableMethod("Ask-Specific needs a source service");
      auto text = replace_all(texts.ask_specific, "<PROVIDER>", c.seed->source_provider);
      append_sentence(out.system_prompt, replace_all(std::move(text), "<SERVICE>", c.seed->source_service));
      break;
    }
  }
  out.debias = method;
  // The id must distinguish variants so their responses never collide on disk.
  auto hash = out.case_id.find('#');
  out.case_id = out.case_id.substr(0, hash) + "#" + std::string(to_string(method));
  return out;
}

std::string build_ranking_prompt(std::string_view generation_prompt, const std::vector<std::string>& providers) {
  if (providers.empty()) throw EmptyProviderList("ranking prompt needs at least one provider");
  std::string list = "[";
  for (std::size_t i = 0; i < providers.size(); ++i) {
    if (i) list += ", ";
    list += "'" + providers[i] + "'";
  }
  list += "]";
  return std::string(generation_prompt) +
         " The following list shows several providers whose services can be used to complete this work. " + list +
         " Please sort them into a list according to your preference (with the top service providers being the "
         "most preferred). Please strictly output in Python list format. Do not answer other content.";
}

std::vector<std::string> parse_ranking_reply(std::string_view reply, const std::vector<std::string>& providers) {
  std::string body = trim(reply);
  // A bare fenced block around the list is tolerated; any other prose is not.
  if (body.rfind("```", 0) == 0) {
    auto first_nl = body.find('\n');
    auto close = body.rfind("```");
    if (first_nl == std::string::npos || close <= first_nl) throw RankingParseError("unterminated code fence");
    if (!trim(std::string_view(body).substr(close + 3)).empty()) throw RankingParseError("text after code fence");
    body = trim(std::string_view(body).substr(first_nl + 1, close - first_nl - 1));
  }
  if (body.size() < 2 || body.front() != '[' || body.back() != ']')
    throw RankingParseError("reply is not a bare list literal");

  std::vector<std::string> out;
  std::size_t i = 1;
  const std::size_t end = body.size() - 1;
  auto skip_ws = [&] {
    while (i < end && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
  };
  skip_ws();
  while (i < end) {
    const char quote = body[i];
    if (quote != '\'' && quote != '"') throw RankingParseError("list element is not a string literal");
    std::string item;
    ++i;
    while (i < end && body[i] != quote) {
      if (body[i] == '\\' && i + 1 < end) ++i;
      item.push_back(body[i++]);
    }
    if (i >= end) throw RankingParseError("unterminated string literal");
    ++i;
    if (std::find(providers.begin(), providers.end(), item) == providers.end())
      throw RankingParseError("unknown provider '" + item + "'");
    if (std::find(out.begin(), out.end(), item) != out.end())
      throw RankingParseError("provider '" + item + "' listed twice");
    out.push_back(std::move(item));
    skip_ws();
    if (i < end) {
      if (body[i] != ',') throw RankingParseError("expected ',' between list elements");
      ++i;
      skip_ws();
    }
  }
  if (out.empty()) throw RankingParseError("empty ranking");
  return out;
}

ConsensusRanking aggregate_rankings(const std::vector<std::vector<std::string>>& replies,
                                    const std::vector<std::string>& providers) {
  if (providers.empty()) throw EmptyProviderList("no providers to rank");
  const std::size_t n = providers.size();
  std::vector<double> sum(n, 0.0);
  for (const auto& reply : replies) {
    std::vector<bool> placed(n, false);
    for (std::size_t pos = 0; pos < reply.size(); ++pos) {
      auto it = std::find(providers.begin(), providers.end(), reply[pos]);
      if (it == providers.end()) throw RankingParseError("unknown provider '" + reply[pos] + "'");
      const auto k = static_cast<std::size_t>(it - providers.begin());
      sum[k] += static_cast<double>(pos + 1);
      placed[k] = true;
    }
    // Unranked providers share the remaining positions equally.
    const std::size_t missing = n - reply.size();
    if (missing) {
      const double shared = (static_cast<double>(reply.size() + 1) + static_cast<double>(n)) / 2.0;
      for (std::size_t k = 0; k < n; ++k)
        if (!placed[k]) sum[k] += shared;
    }
  }
  ConsensusRanking out;
  out.replies = replies.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const double denom = replies.empty() ? 1.0 : static_cast<double>(replies.size());
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return sum[a] < sum[b]; });
  for (auto k : idx) {
    out.order.push_back(providers[k]);
    out.mean_rank.push_back(replies.empty() ? static_cast<double>(k + 1) : sum[k] / denom);
  }
  return out;
}

}  // namespace provaudit
