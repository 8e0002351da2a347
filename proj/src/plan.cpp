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

#include <algorithm>
#include <numeric>
#include <set>

#include "provaudit/errors.hpp"
#include "provaudit/orchestrator.hpp"
#include "provaudit/rng.hpp"
#include "provaudit/seeds.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;

json Plan::meta_json() const {
  return {{"sampling", sampling},
          {"case_count", cases.size()},
          {"mutant_count", mutants.size()},
          {"warnings", warnings}};
}

SeedLookup seed_files(const AuditConfig& config) {
  auto store = std::make_shared<SeedStore>(config.seeds.dir, config.language);
  return [store](const Scenario& sc, const Requirement& req, const ServiceEntry& svc) {
    return store->load(sc.id, req.id, svc);
  };
}

SeedLookup seed_source(const AuditConfig& config, std::shared_ptr<Gateway> generator) {
  if (config.seeds.mode != "generate" || !generator) return seed_files(config);
  auto store = std::make_shared<SeedStore>(config.seeds.dir, config.language);
  const auto lang = config.language;
  const int attempts = config.seeds.max_attempts;
  return [store, generator, lang, attempts](const Scenario& sc, const Requirement& req,
                                            const ServiceEntry& svc) -> std::optional<SeedCode> {
    if (auto s = store->load(sc.id, req.id, svc)) return s;
    auto g = generate_seed(*generator, sc, req, svc, lang, attempts);
    if (g.seed) store->save(sc.id, req.id, *g.seed);
    return g.seed;
  };
}

namespace {

std::vector<const Scenario*> selected_scenarios(const Registry& registry, const AuditConfig& config) {
  std::vector<const Scenario*> out;
  if (config.scenarios.empty()) {
    for (const auto& s : registry.scenarios()) out.push_back(&s);
    return out;
  }
  for (const auto& id : config.scenarios) out.push_back(&registry.lookup(id));
  return out;
}

// Seeded choice of up to k indices, returned in ascending order.
std::vector<std::size_t> sample_indices(std::vector<std::size_t> pool, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.uniform_index(i)]);
  pool.resize(std::min(k, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

// Case ids with at least one provider swap in an earlier run.
std::set<std::string> triggering_cases(const std::filesystem::path& prior_run) {
  const auto path = prior_run / "analysis" / "case_verdicts.jsonl";
  if (!std::filesystem::exists(path))
    throw MissingRunData("prior run " + prior_run.string() + " has no analysis/case_verdicts.jsonl");
  std::set<std::string> out;
  for (const auto& line : split_lines(read_file(path))) {
    if (trim(line).empty()) continue;
    const auto j = json::parse(line);
    if (j.value("swapped", 0) > 0) out.insert(j.at("case_id").get<std::string>());
  }
  return out;
}

}  // namespace

Plan plan(const Registry& registry, const AuditConfig& config, const SeedLookup& seeds) {
  config.validate();
  Plan p;
  const auto& lang = config.language;
  std::vector<PromptCase> bases;

  for (auto task : config.tasks) {
    for (const Scenario* sc : selected_scenarios(registry, config)) {
      for (const auto& req : sc->requirements) {
        if (!task_has_seed(task)) {
          PromptCase c;
          c.case_id = make_case_id(task, sc->id, req.id, "", std::nullopt);
          c.task = task;
          c.scenario_id = sc->id;
          c.requirement_id = req.id;
          c.rendered_prompt = render_prompt(task, *sc, req, std::nullopt, lang);
          c.repeat_budget = config.repeats.for_task(task);
          bases.push_back(std::move(c));
          continue;
        }
        for (const auto& svc : sc->services) {
          if (!svc.supports_language(lang.tag)) continue;
          const auto case_id = make_case_id(task, sc->id, req.id, svc.service_name, std::nullopt);
          std::optional<SeedCode> seed = seeds ? seeds(*sc, req, svc) : std::nullopt;
          if (!seed) {
            p.warnings.push_back(case_id + ": no seed code, case skipped");
            continue;
          }
          PromptCase c;
          c.case_id = case_id;
          c.task = task;
          c.scenario_id = sc->id;
          c.requirement_id = req.id;
          c.seed = *seed;
          c.repeat_budget = config.repeats.for_task(task);
          std::string code = seed->text;
          try {
            if (task == TaskKind::Debugging) {
              BugOptions o;
              o.language_tag = lang.tag;
              auto m = inject_bug(seed->text, derive_seed(config.rng_seed, "bug/" + case_id), o);
              code = m.mutant;
              p.mutants.emplace(case_id, std::move(m));
            } else if (task == TaskKind::DeadCodeElimination) {
              DeadCodeOptions o;
              o.language_tag = lang.tag;
              auto m = inject_dead_code(seed->text, derive_seed(config.rng_seed, "dead/" + case_id), o);
              code = m.mutant;
              p.mutants.emplace(case_id, std::move(m));
            }
          } catch (const SeedTooSmall& e) {
            p.warnings.push_back(case_id + ": " + e.what() + ", case skipped");
            continue;
          }
          if (code != seed->text) c.mutated_seed = code;
          c.rendered_prompt = render_prompt(task, *sc, req, code, lang);
          bases.push_back(std::move(c));
        }
      }
    }
  }

  if (config.debias_subset) {
    std::optional<std::set<std::string>> trigger;
    if (config.debias_prior_run) {
      trigger = triggering_cases(*config.debias_prior_run);
      p.sampling = "prior_run";
    } else {
      p.sampling = "random";
      p.warnings.push_back("debias subset drawn at random: no prior run verdicts were given");
    }
    std::vector<std::size_t> keep;
    for (auto task : config.tasks) {
      std::vector<std::size_t> pool, hot, cold;
      for (std::size_t i = 0; i < bases.size(); ++i)
        if (bases[i].task == task) pool.push_back(i);
      const auto key = "subset/" + std::string(to_string(task));
      if (task == TaskKind::Generation) {
        auto s = sample_indices(pool, 20, derive_seed(config.rng_seed, key));
        keep.insert(keep.end(), s.begin(), s.end());
      } else if (trigger) {
        for (auto i : pool) (trigger->count(bases[i].case_id) ? hot : cold).push_back(i);
        auto a = sample_indices(hot, 20, derive_seed(config.rng_seed, key + "/hot"));
        auto b = sample_indices(cold, 20, derive_seed(config.rng_seed, key + "/cold"));
        keep.insert(keep.end(), a.begin(), a.end());
        keep.insert(keep.end(), b.begin(), b.end());
      } else {
        auto s = sample_indices(pool, 40, derive_seed(config.rng_seed, key));
        keep.insert(keep.end(), s.begin(), s.end());
      }
    }
    std::sort(keep.begin(), keep.end());
    std::vector<PromptCase> chosen;
    for (auto i : keep) chosen.push_back(std::move(bases[i]));
    bases = std::move(chosen);
    std::erase_if(p.mutants, [&](const auto& kv) {
      return std::none_of(bases.begin(), bases.end(), [&](const PromptCase& c) { return c.case_id == kv.first; });
    });
  }

  for (const auto& base : bases) {
    p.cases.push_back(base);
    for (auto m : config.debias)
      if (debias_applicable(m, base.task)) p.cases.push_back(apply_debias(base, m, config.debias_texts));
  }
  if (p.cases.empty()) {
    std::string why = "the plan has no cases; check tasks, scenarios and seeds";
    if (!p.warnings.empty()) why += " (first warning: " + p.warnings.front() + ")";
    throw EmptyPlan(why);
  }
  return p;
}

std::vector<PromptCase> plan_rankings(const Registry& registry, const AuditConfig& config) {
  std::vector<PromptCase> out;
  for (const Scenario* sc : selected_scenarios(registry, config)) {
    const auto& req = sc->requirements.front();
    PromptCase c;
    c.case_id = "rank/" + sc->id;
    c.task = TaskKind::Generation;
    c.scenario_id = sc->id;
    c.requirement_id = req.id;
    c.rendered_prompt =
        build_ranking_prompt(render_prompt(TaskKind::Generation, *sc, req, std::nullopt, config.language),
                             sc->providers());
    c.repeat_budget = config.repeats.generation;
    out.push_back(std::move(c));
  }
  if (out.empty()) throw EmptyPlan("no scenarios to rank");
  return out;
}

}  // namespace provaudit
