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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "provaudit/analyzer.hpp"
#include "provaudit/config.hpp"
#include "provaudit/gateway.hpp"
#include "provaudit/mutation.hpp"
#include "provaudit/prompts.hpp"
#include "provaudit/registry.hpp"

namespace provaudit {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Finds the seed for one (scenario, requirement, service), if any.
using SeedLookup = std::function<std::optional<SeedCode>(const Scenario&, const Requirement&, const ServiceEntry&)>;

struct Plan {
  std::vector<PromptCase> cases;
  /// Mutation logs by case id (Debugging and dead-code cases).
  std::map<std::string, MutationResult> mutants;
  std::vector<std::string> warnings;
  /// How the debias subset was drawn ("full", "prior_run" or "random").
  std::string sampling = "full";

  nlohmann::json meta_json() const;
};

/// Cartesian expansion of tasks x scenarios x requirements x seeded
/// services x debias variants. Deterministic in (registry, config, seeds).
/// Throws EmptyPlan.
Plan plan(const Registry& registry, const AuditConfig& config, const SeedLookup& seeds);

/// Seed lookup over a SeedStore (files mode).
SeedLookup seed_files(const AuditConfig& config);

/// Seed lookup honouring `config.seeds.mode`. In generate mode a missing seed
/// is requested from `generator`, verified, and saved to the store.
SeedLookup seed_source(const AuditConfig& config, std::shared_ptr<Gateway> generator);

/// Ranking cases: one per scenario, built on its first requirement.
std::vector<PromptCase> plan_rankings(const Registry& registry, const AuditConfig& config);

/// Exclusive ownership of a run directory through a lock file holding the
/// owner's pid. A lock left by a dead process is taken over.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& run_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct RunOptions {
  /// Phase name; "rank" keeps ranking replies and their plan apart.
  std::string phase = "main";
  /// Called after each persisted response (tests use it to simulate a crash).
  std::function<void(const RawResponse&)> after_response;
  /// Replaces sleeping during retry backoff.
  std::function<void(std::chrono::milliseconds)> sleep;
  /// Overrides the transport per backend (tests); built from config otherwise.
  std::function<std::shared_ptr<Transport>(const BackendConfig&)> transport;
};

struct RunOutcome {
  std::filesystem::path run_dir;
  bool complete = false;
  std::int64_t expected = 0;
  std::int64_t present_before = 0;
  std::int64_t received = 0;
  std::map<std::string, std::int64_t> spent;
  std::vector<std::string> errors;
};

/// Queries every missing (case, attempt) and appends each reply to
/// `<run_dir>/<backend>/<task>/<scenario>.jsonl` as it lands. Writes the
/// manifest first; re-invocation on the same directory resumes.
RunOutcome run(const Registry& registry, const AuditConfig& config, const std::vector<PromptCase>& cases,
               const std::filesystem::path& run_dir, const RunOptions& options = {}, const Plan* plan_meta = nullptr);

/// plan() followed by run().
RunOutcome plan_and_run(const Registry& registry, const AuditConfig& config, const std::filesystem::path& run_dir,
                        const RunOptions& options = {});

/// Deterministic run directory name derived from the config and seed.
std::string default_run_id(const AuditConfig& config);

/// Raw responses persisted for one phase, sorted by (backend, case, attempt).
std::vector<RawResponse> load_responses(const std::filesystem::path& run_dir, const std::string& phase = "main");

struct AnalyzeOptions {
  std::optional<bool> include_none;
  std::optional<int> bootstrap_b;
  /// Fallback labeling; disabled when empty.
  FallbackQuery fallback;
  LearnedStore* learned = nullptr;
};

/// Labels every persisted response and computes the bias report. Reads only
/// the run directory; writes `.labeled.jsonl` files and `analysis/analysis.json`.
/// Throws MissingRunData.
nlohmann::json analyze(const std::filesystem::path& run_dir, const AnalyzeOptions& options = {});

/// A typed table shared by the CSV and JSON writers, so both carry the same
/// values.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

std::vector<Table> report_tables(const nlohmann::json& analysis);
std::string to_csv(const Table& t);
std::string render_markdown(const nlohmann::json& analysis, const std::vector<Table>& tables);

/// Writes `<out_dir>/<table>.csv`, `report.json` and `summary.md`.
std::vector<std::filesystem::path> report(const nlohmann::json& analysis, const std::filesystem::path& out_dir,
                                          const std::vector<std::string>& formats = {"csv", "json", "md"});

struct SelftestCase {
  std::string name;
  bool passed = false;
  std::string expected;
  std::string actual;
};

struct SelftestResult {
  std::vector<SelftestCase> cases;
  std::size_t passed() const;
};

/// Labels each snippet in `corpus_dir` and compares with its
/// `<stem>.expected.json` sidecar.
SelftestResult selftest(const Registry& registry, const std::filesystem::path& corpus_dir,
                        const SubjectLanguage& lang = SubjectLanguage::python());

/// Merges learned fingerprints into a registry document. Quarantined
/// entries are merged only for providers listed in `accept`.
nlohmann::json promote_fingerprints(const nlohmann::json& registry_doc, const LearnedStore& store,
                                    const std::vector<std::string>& accept, std::size_t* promoted = nullptr);

}  // namespace provaudit
