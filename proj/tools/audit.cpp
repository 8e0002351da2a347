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

// audit: command-line driver for provider-bias audits.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "provaudit/errors.hpp"
#include "provaudit/mock_backend.hpp"
#include "provaudit/orchestrator.hpp"
#include "provaudit/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace provaudit;

namespace {

constexpr int kExitComplete = 0;
constexpr int kExitFailure = 1;
constexpr int kExitIncomplete = 2;
constexpr int kExitValidation = 3;

struct GlobalFlags {
  std::string registry = "data/registry.json";
  std::string config;
  std::string run_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> backends;
  std::vector<std::string> tasks;
  std::vector<std::string> scenarios;
  std::vector<std::string> debias;
  std::string mock;
  bool include_none = false;
  bool exclude_none = false;
  std::string subject_language;
  std::optional<int> b;
};

AuditConfig effective_config(const GlobalFlags& g) {
  AuditConfig c = g.config.empty() ? AuditConfig{} : load_config(g.config);
  if (g.seed) c.rng_seed = *g.seed;
  if (!g.subject_language.empty()) c.language = SubjectLanguage::from_tag(g.subject_language);
  if (!g.tasks.empty()) {
    c.tasks.clear();
    for (const auto& t : g.tasks) c.tasks.push_back(task_kind_from_string(t));
  }
  if (!g.scenarios.empty()) c.scenarios = g.scenarios;
  if (!g.debias.empty()) {
    c.debias.clear();
    for (const auto& d : g.debias) c.debias.push_back(debias_method_from_string(d));
  }
  if (g.include_none) c.include_none = true;
  if (g.exclude_none) c.include_none = false;
  if (g.b) c.bootstrap_b = *g.b;
  if (!g.mock.empty()) {
    if (c.backends.empty()) c.backends.push_back(mock_backend(json::object(), "mock"));
    for (auto& b : c.backends) {
      b.kind = "mock";
      b.mock_script = nullptr;
      b.mock_script_path = fs::absolute(g.mock).string();
      b.auth_env.clear();
      b.backoff = std::chrono::milliseconds(0);
    }
  }
  if (!g.backends.empty()) {
    std::vector<BackendConfig> keep;
    for (const auto& id : g.backends) keep.push_back(c.backend(id));
    c.backends = keep;
  }
  c.validate();
  return c;
}

fs::path run_dir_for(const GlobalFlags& g, const AuditConfig& c) {
  return g.run_dir.empty() ? fs::path("runs") / default_run_id(c) : fs::path(g.run_dir);
}

std::shared_ptr<Gateway> gateway_for(const AuditConfig& c, const std::string& backend_id) {
  const auto& b = c.backend(backend_id);
  GatewayOptions o;
  o.cache_enabled = c.cache_enabled;
  o.cache_dir = cache_dir_from_env();
  return std::make_shared<Gateway>(b, make_transport(b), o);
}

void print_outcome(const RunOutcome& o) {
  std::cout << "run directory: " << o.run_dir.string() << "\n"
            << "responses: " << o.present_before + o.received << " of " << o.expected << " (" << o.received
            << " new)\n";
  for (const auto& [b, s] : o.spent) std::cout << "spent[" << b << "]: " << s << "\n";
  for (const auto& e : o.errors) std::cout << "error: " << e << "\n";
  std::cout << "status: " << (o.complete ? "complete" : "incomplete") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit LLM provider bias in generated and modified code"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--registry", g.registry, "Registry JSON file")->capture_default_str();
  app.add_option("--config", g.config, "Audit config JSON file");
  app.add_option("--run-dir", g.run_dir, "Run directory (default runs/<run_id>)");
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--backend", g.backends, "Backend ids to use")->delimiter(',');
  app.add_option("--tasks", g.tasks, "Tasks (comma separated)")->delimiter(',');
  app.add_option("--scenarios", g.scenarios, "Scenario ids or names")->delimiter(',');
  app.add_option("--debias", g.debias, "Debias methods")->delimiter(',');
  app.add_option("--mock", g.mock, "Mock script; replaces every backend transport");
  auto* inc = app.add_flag("--include-none", g.include_none, "Count the None provider in GI");
  app.add_flag("--exclude-none", g.exclude_none, "Leave the None provider out of GI")->excludes(inc);
  app.add_option("--subject-language", g.subject_language, "Language of the audited code (python, java)");
  app.add_option("--b", g.b, "Bootstrap replicates (default 1000)");

  auto* plan_cmd = app.add_subcommand("plan", "Expand the prompt plan");
  std::string plan_out;
  plan_cmd->add_option("--out", plan_out, "Write the plan as JSONL here instead of stdout");

  auto* run_cmd = app.add_subcommand("run", "Query every planned case (resumes an existing run)");
  auto* analyze_cmd = app.add_subcommand("analyze", "Label responses and compute the bias report");
  bool use_fallback = false;
  analyze_cmd->add_flag("--fallback", use_fallback, "Ask the configured fallback backend about unmatched code");

  auto* report_cmd = app.add_subcommand("report", "Write CSV, JSON and Markdown reports");
  std::vector<std::string> formats = {"csv", "json", "md"};
  std::string report_out;
  report_cmd->add_option("--formats", formats, "Formats to write")->delimiter(',');
  report_cmd->add_option("--out", report_out, "Output directory (default <run-dir>/report)");

  auto* rank_cmd = app.add_subcommand("rank", "Ask each backend to rank the providers of each scenario");
  auto* selftest_cmd = app.add_subcommand("selftest", "Label the golden corpus and compare with expectations");
  std::string corpus = "data/golden_corpus";
  selftest_cmd->add_option("--corpus", corpus, "Golden corpus directory")->capture_default_str();

  auto* promote_cmd = app.add_subcommand("promote-fingerprints", "Merge learned fingerprints into a registry");
  std::string learned_path, promote_out;
  std::vector<std::string> accept;
  promote_cmd->add_option("--learned", learned_path, "Learned fingerprint store (default from config)");
  promote_cmd->add_option("--out", promote_out, "Where to write the merged registry")->required();
  promote_cmd->add_option("--accept", accept, "Quarantined providers to accept")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*selftest_cmd) {
      const auto c = effective_config(g);
      const auto reg = load_registry(g.registry, c.language.tag);
      const auto r = selftest(reg, corpus, c.language);
      for (const auto& tc : r.cases)
        std::cout << (tc.passed ? "PASS " : "FAIL ") << tc.name << "  expected=" << tc.expected
                  << " actual=" << tc.actual << "\n";
      std::cout << r.passed() << "/" << r.cases.size() << " labels correct\n";
      return r.passed() == r.cases.size() ? kExitComplete : kExitFailure;
    }

    if (*promote_cmd) {
      const auto c = effective_config(g);
      LearnedStore store(learned_path.empty() ? c.learned_store : fs::path(learned_path));
      std::size_t n = 0;
      const auto doc = promote_fingerprints(json::parse(read_file(g.registry)), store, accept, &n);
      write_file_atomic(promote_out, doc.dump(2) + "\n");
      std::cout << "promoted " << n << " fingerprints into " << promote_out << "\n";
      return kExitComplete;
    }

    if (*analyze_cmd || *report_cmd) {
      fs::path dir = g.run_dir;
      AuditConfig c;
      if (dir.empty()) {
        c = effective_config(g);
        dir = run_dir_for(g, c);
      } else if (!g.config.empty()) {
        c = effective_config(g);
      }
      AnalyzeOptions opts;
      if (g.include_none) opts.include_none = true;
      if (g.exclude_none) opts.include_none = false;
      opts.bootstrap_b = g.b;
      std::unique_ptr<LearnedStore> learned;
      if (use_fallback) {
        if (!c.fallback.enabled) throw ValidationError("--fallback needs fallback.enabled and a backend in --config");
        learned = std::make_unique<LearnedStore>(c.learned_store);
        opts.learned = learned.get();
        auto gw = gateway_for(c, c.fallback.backend);
        opts.fallback = [gw](const std::string& prompt) { return gw->complete("fallback", "", prompt, 0, true).text; };
      }
      json analysis;
      const auto saved = dir / "analysis" / "analysis.json";
      if (*report_cmd && fs::exists(saved) && !g.b && !g.include_none && !g.exclude_none)
        analysis = json::parse(read_file(saved));
      else
        analysis = analyze(dir, opts);
      if (*analyze_cmd) {
        std::cout << "analysis written to " << saved.string() << "\n";
        for (const auto& row : analysis["summary"])
          std::cout << row["backend"].get<std::string>() << ": median GI " << row["gi_median"].dump() << " over "
                    << row["gi_scenarios"].dump() << " scenarios\n";
        return kExitComplete;
      }
      const fs::path out = report_out.empty() ? dir / "report" : fs::path(report_out);
      for (const auto& p : report(analysis, out, formats)) std::cout << p.string() << "\n";
      return kExitComplete;
    }

    const auto c = effective_config(g);
    const auto reg = load_registry(g.registry, c.language.tag);

    if (*plan_cmd) {
      std::shared_ptr<Gateway> generator;
      if (c.seeds.mode == "generate" && !c.seeds.generator_backend.empty())
        generator = gateway_for(c, c.seeds.generator_backend);
      const auto p = plan(reg, c, seed_source(c, generator));
      std::string text;
      for (const auto& pc : p.cases) text += to_json(pc).dump() + "\n";
      if (plan_out.empty()) std::cout << text;
      else write_file_atomic(plan_out, text);
      for (const auto& w : p.warnings) std::cerr << "warning: " << w << "\n";
      std::cerr << p.cases.size() << " cases planned\n";
      return kExitComplete;
    }

    if (*run_cmd) {
      const auto o = plan_and_run(reg, c, run_dir_for(g, c));
      print_outcome(o);
      return o.complete ? kExitComplete : kExitIncomplete;
    }

    if (*rank_cmd) {
      RunOptions ro;
      ro.phase = "rank";
      const auto o = run(reg, c, plan_rankings(reg, c), run_dir_for(g, c), ro);
      print_outcome(o);
      return o.complete ? kExitComplete : kExitIncomplete;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UnknownScenario& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EmptyPlan& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const MissingRunData& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
