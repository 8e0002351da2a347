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

#include <array>
#include <tuple>
#include <algorithm>
#include <cmath>
#include <set>

#include "provaudit/errors.hpp"
#include "provaudit/orchestrator.hpp"
#include "provaudit/rng.hpp"
#include "provaudit/stats.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kOriginal = "original";

// One counted observation: a response, or one block of a Multiple response.
struct Unit {
  std::string backend;
  std::string case_id;
  int attempt = 0;
  TaskKind task = TaskKind::Generation;
  std::string scenario;
  std::string method;
  bool valid = false;
  ValidityReason reason = ValidityReason::NoCode;
  std::optional<std::string> provider;
  bool ambiguous = false;
  std::string source_provider;
  ModificationCategory category = ModificationCategory::Invalid;
};

std::string method_of(const PromptCase& c) {
  return c.debias ? std::string(to_string(*c.debias)) : std::string(kOriginal);
}

std::vector<std::string> method_order() {
  std::vector<std::string> out{std::string(kOriginal)};
  for (auto m : kAllDebiasMethods) out.emplace_back(to_string(m));
  return out;
}

std::string method_label(const std::string& m) {
  return m == kOriginal ? "Original" : std::string(display_name(debias_method_from_string(m)));
}

json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

// GI over a fixed provider universe, so every replicate shares the same n.
double gi_over(const std::vector<std::string>& universe, const std::vector<const std::string*>& labels,
               const std::vector<std::size_t>& idx) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& p : universe) counts[p] = 0;
  for (auto i : idx) {
    auto it = counts.find(*labels[i]);
    if (it != counts.end()) ++it->second;
  }
  std::vector<std::int64_t> x;
  for (const auto& [_, c] : counts) x.push_back(c);
  return gini(x);
}

}  // namespace

json analyze(const fs::path& run_dir, const AnalyzeOptions& options) {
  const auto manifest_path = run_dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw MissingRunData(run_dir.string() + " has no manifest.json");
  const auto manifest = json::parse(read_file(manifest_path));
  const auto& cfg = manifest.at("config");
  const auto registry = Registry::parse(read_file(run_dir / "registry.json"), cfg.value("subject_language", "python"));
  const auto lang = SubjectLanguage::from_tag(cfg.value("subject_language", "python"));
  const auto markers = cfg.at("markers").get<std::vector<std::string>>();
  const bool include_none = options.include_none.value_or(cfg.value("include_none", true));
  const int b = options.bootstrap_b.value_or(cfg.at("bootstrap").value("b", 1000));
  std::optional<std::size_t> resample;
  if (!cfg.at("bootstrap").at("resample_size").is_null())
    resample = cfg["bootstrap"]["resample_size"].get<std::size_t>();
  const auto rng_seed = cfg.value("rng_seed", std::uint64_t{0});

  std::map<std::string, PromptCase> cases;
  for (const auto& line : split_lines(read_file(run_dir / "plan.jsonl")))
    if (!trim(line).empty()) {
      auto c = prompt_case_from_json(json::parse(line));
      cases.emplace(c.case_id, std::move(c));
    }

  LabelerOptions lopts;
  lopts.language = lang;
  lopts.fallback = options.fallback;
  lopts.learned = options.learned;
  const Labeler labeler(registry, lopts);

  // ---- label every persisted response
  std::vector<Unit> units;
  std::map<fs::path, std::string> labeled_files;
  std::map<std::string, std::int64_t> responses_per_backend;
  std::vector<std::string> warnings;
  for (const auto& r : load_responses(run_dir, "main")) {
    auto it = cases.find(r.case_id);
    if (it == cases.end()) {
      warnings.push_back("response for unknown case " + r.case_id + " ignored");
      continue;
    }
    const auto& c = it->second;
    ++responses_per_backend[r.backend_id];
    const bool per_block = c.debias == DebiasMethod::Multiple;
    const auto labeled = labeler.label_response(c.scenario_id, c.case_id, r.attempt, r.text, markers, per_block);
    auto& file = labeled_files[run_dir / r.backend_id / std::string(to_string(c.task)) / (c.scenario_id + ".labeled.jsonl")];
    for (const auto& l : labeled) {
      file += l.to_json().dump() + "\n";
      Unit u;
      u.backend = r.backend_id;
      u.case_id = c.case_id;
      u.attempt = r.attempt;
      u.task = c.task;
      u.scenario = c.scenario_id;
      u.method = method_of(c);
      u.valid = l.verdict.valid && l.label.has_value();
      u.reason = l.verdict.reason;
      u.ambiguous = l.error.has_value();
      if (l.label) u.provider = l.label->provider;
      if (c.seed) {
        u.source_provider = c.seed->source_provider;
        u.category = detect_modification(l, u.source_provider).category;
      }
      units.push_back(std::move(u));
    }
  }
  for (const auto& [path, text] : labeled_files) write_file_atomic(path, text);

  json analysis;
  analysis["run_id"] = manifest.value("run_id", "");
  analysis["registry_sha256"] = manifest.value("registry_sha256", "");
  analysis["warnings"] = warnings;
  const auto& texts = cfg.at("debias_texts");
  analysis["conventions"] = {
      {"include_none", include_none},
      {"gi_n", "providers seen for the scenario in any backend's responses"},
      {"gi_max", "(n-1)/n"},
      {"mr_denominator", "valid labeled responses; the queried count is reported alongside"},
      {"service_dropped", "counted in N, excluded from N_m"},
      {"bootstrap_b", b},
      {"bootstrap_rng_seed", rng_seed},
      {"bootstrap_resample_size", resample ? json(*resample) : json("observation count")},
      {"markers", markers},
      {"multiple_counting", "each block labeled and counted once"},
      {"median", "unweighted over scenarios"},
      {"debias_text", texts.value("debias", "")},
      {"debias_text_default", texts.value("debias", "") == DebiasTexts{}.debias},
      {"fallback", static_cast<bool>(options.fallback)}};

  // ---- GI
  std::map<std::string, std::set<std::string>> universe;  // scenario -> providers
  for (const auto& u : units)
    if (u.task == TaskKind::Generation && u.valid) universe[u.scenario].insert(*u.provider);

  std::map<std::tuple<std::string, std::string, std::string>, std::vector<const Unit*>> gen_groups;
  for (const auto& u : units)
    if (u.task == TaskKind::Generation) gen_groups[{u.backend, u.scenario, u.method}].push_back(&u);

  json gi_rows = json::array();
  std::map<std::pair<std::string, std::string>, std::map<std::string, double>> gi_by_method;  // (backend, method) -> scenario -> gi
  for (const auto& [key, group] : gen_groups) {
    const auto& [backend, scenario, method] = key;
    std::vector<std::string> uni_with(universe[scenario].begin(), universe[scenario].end());
    std::vector<std::string> uni_without;
    for (const auto& p : uni_with)
      if (p != kProviderNone) uni_without.push_back(p);

    std::vector<const std::string*> all_labels, labels_without;
    for (const Unit* u : group)
      if (u->valid) {
        all_labels.push_back(&*u->provider);
        if (*u->provider != kProviderNone) labels_without.push_back(&*u->provider);
      }
    auto full = [](const std::vector<const std::string*>& l) {
      std::vector<std::size_t> idx(l.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      return idx;
    };
    auto gi_or_nan = [&](const std::vector<std::string>& uni, const std::vector<const std::string*>& l) {
      if (l.empty() || uni.empty()) return std::nan("");
      return gi_over(uni, l, full(l));
    };
    const double gi_with = gi_or_nan(uni_with, all_labels);
    const double gi_without = gi_or_nan(uni_without, labels_without);
    const auto& uni = include_none ? uni_with : uni_without;
    const auto& labels = include_none ? all_labels : labels_without;
    if (labels.empty()) continue;

    BootstrapOptions bo;
    bo.replicates = b;
    bo.rng_seed = derive_seed(rng_seed, "gi/" + backend + "/" + scenario + "/" + method);
    bo.resample_size = resample;
    const auto boot = bootstrap(labels.size(), [&](const std::vector<std::size_t>& idx) { return gi_over(uni, labels, idx); }, bo);

    json counts = json::object();
    for (const auto& p : uni) counts[p] = 0;
    for (const auto* l : labels) counts[*l] = counts[*l].get<std::int64_t>() + 1;
    gi_rows.push_back({{"backend", backend},
                       {"scenario", scenario},
                       {"method", method},
                       {"n", uni.size()},
                       {"total", labels.size()},
                       {"counts", counts},
                       {"gi", boot.point},
                       {"gi_with_none", nullable(gi_with)},
                       {"gi_without_none", nullable(gi_without)},
                       {"n_with_none", uni_with.size()},
                       {"n_without_none", uni_without.size()},
                       {"bootstrap", boot.to_json()}});
    gi_by_method[{backend, method}][scenario] = boot.point;
  }
  analysis["gi"] = gi_rows;

  // ---- MR
  struct MrAcc {
    std::int64_t swapped = 0, same = 0, dropped = 0, invalid = 0, queried = 0;
    std::vector<double> indicators;
  };
  std::map<std::tuple<std::string, std::string, std::string>, MrAcc> mr_groups;
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::pair<std::int64_t, std::int64_t>>> per_case;  // (backend, method) -> case -> (swapped, valid)
  std::map<std::pair<std::string, std::string>, std::array<std::int64_t, 3>> case_verdicts;  // (backend, case) -> swapped, dropped, valid
  std::map<std::tuple<std::string, std::string, std::string>, std::int64_t> pairs;
  for (const auto& u : units) {
    if (u.task == TaskKind::Generation) continue;
    auto& acc = mr_groups[{u.backend, std::string(to_string(u.task)), u.method}];
    ++acc.queried;
    auto& pc = per_case[{u.backend, u.method}][u.case_id];
    auto& cv = case_verdicts[{u.backend, u.case_id}];
    switch (u.valid ? u.category : ModificationCategory::Invalid) {
      case ModificationCategory::ProviderSwapped:
        ++acc.swapped;
        ++pc.first;
        ++cv[0];
        if (u.method == kOriginal) ++pairs[{u.backend, u.source_provider, *u.provider}];
        break;
      case ModificationCategory::SameProvider: ++acc.same; break;
      case ModificationCategory::ServiceDropped:
        ++acc.dropped;
        ++cv[1];
        break;
      case ModificationCategory::Invalid: ++acc.invalid; break;
    }
    if (u.valid) {
      acc.indicators.push_back(u.category == ModificationCategory::ProviderSwapped ? 100.0 : 0.0);
      ++pc.second;
      ++cv[2];
    }
  }
  json mr_rows = json::array();
  for (const auto& [key, acc] : mr_groups) {
    const auto& [backend, task, method] = key;
    const std::int64_t n_valid = acc.swapped + acc.same + acc.dropped;
    json row = {{"backend", backend},       {"task", task},         {"method", method},
                {"n_m", acc.swapped},       {"n_valid", n_valid},   {"n_queried", acc.queried},
                {"same_provider", acc.same}, {"service_dropped", acc.dropped}, {"invalid", acc.invalid}};
    if (n_valid > 0) {
      const auto mr = modification_ratio({acc.swapped, n_valid, task, backend, ""});
      row["mr_valid"] = mr.value();
      row["mr_valid_text"] = mr.format(2);
      BootstrapOptions bo;
      bo.replicates = b;
      bo.rng_seed = derive_seed(rng_seed, "mr/" + backend + "/" + task + "/" + method);
      bo.resample_size = resample;
      const auto& ind = acc.indicators;
      row["bootstrap"] = bootstrap(ind.size(),
                                   [&](const std::vector<std::size_t>& idx) {
                                     double s = 0;
                                     for (auto i : idx) s += ind[i];
                                     return s / static_cast<double>(idx.size());
                                   },
                                   bo)
                             .to_json();
    } else {
      row["mr_valid"] = nullptr;
      row["mr_valid_text"] = nullptr;
      row["bootstrap"] = nullptr;
    }
    const auto mq = modification_ratio({acc.swapped, std::max<std::int64_t>(acc.queried, 1), task, backend, ""});
    row["mr_queried"] = mq.value();
    row["mr_queried_text"] = mq.format(2);
    mr_rows.push_back(row);
  }
  analysis["mr"] = mr_rows;

  // ---- preferred providers
  json pref = json::array();
  for (const auto& [key, group] : gen_groups) {
    const auto& [backend, scenario, method] = key;
    if (method != kOriginal) continue;
    ProviderCountVector v;
    v.scenario_id = scenario;
    v.model_id = backend;
    for (const Unit* u : group)
      if (u->valid) ++v.counts[*u->provider];
    std::int64_t non_none = 0;
    for (const auto& [p, c] : v.counts)
      if (p != kProviderNone) non_none += c;
    json row = {{"backend", backend}, {"scenario", scenario}};
    try {
      const auto top = preferred_provider(v);
      row["preferred"] = top;
      row["count"] = v.counts[top.front()];
      row["share"] = 100.0 * static_cast<double>(v.counts[top.front()]) / static_cast<double>(non_none);
    } catch (const OnlySentinels&) {
      row["preferred"] = json::array();
      row["count"] = 0;
      row["share"] = nullptr;
    }
    pref.push_back(row);
  }
  analysis["preferred_generation"] = pref;

  json pair_rows = json::array();
  for (const auto& [key, count] : pairs)
    pair_rows.push_back({{"backend", std::get<0>(key)}, {"source", std::get<1>(key)}, {"target", std::get<2>(key)}, {"count", count}});
  analysis["modification_pairs"] = pair_rows;

  // ---- debias comparison
  std::set<std::string> backends;
  for (const auto& u : units) backends.insert(u.backend);
  json debias_rows = json::array();
  for (const auto& backend : backends) {
    auto gi_values = [&](const std::string& m) {
      std::vector<double> v;
      if (auto it = gi_by_method.find({backend, m}); it != gi_by_method.end())
        for (const auto& [_, g] : it->second) v.push_back(g);
      return v;
    };
    auto case_ratios = [&](const std::string& m) {
      std::vector<double> v;
      if (auto it = per_case.find({backend, m}); it != per_case.end())
        for (const auto& [_, sv] : it->second)
          if (sv.second > 0) v.push_back(100.0 * static_cast<double>(sv.first) / static_cast<double>(sv.second));
      return v;
    };
    auto p_or_null = [](const std::vector<double>& a, const std::vector<double>& o) -> json {
      if (a.size() < 2 || o.size() < 2) return nullptr;
      try {
        return welch_t(a, o).p_value;
      } catch (const DegenerateSample&) {
        return nullptr;
      }
    };
    const auto gi_orig = gi_values(std::string(kOriginal));
    const auto mr_orig = case_ratios(std::string(kOriginal));
    for (const auto& m : method_order()) {
      const auto gv = gi_values(m);
      std::int64_t sw = 0, valid = 0;
      if (auto it = per_case.find({backend, m}); it != per_case.end())
        for (const auto& [_, sv] : it->second) {
          sw += sv.first;
          valid += sv.second;
        }
      if (gv.empty() && valid == 0 && !per_case.count({backend, m})) continue;
      json row = {{"backend", backend}, {"method", method_label(m)}};
      row["gi_median"] = gv.empty() ? json(nullptr) : json(median(gv));
      row["gi_scenarios"] = gv.size();
      row["mr"] = valid > 0 ? json(modification_ratio({sw, valid, "", backend, ""}).value()) : json(nullptr);
      row["mr_valid"] = valid;
      row["gi_p"] = m == kOriginal ? json(nullptr) : p_or_null(gv, gi_orig);
      row["mr_p"] = m == kOriginal ? json(nullptr) : p_or_null(case_ratios(m), mr_orig);
      debias_rows.push_back(row);
    }
  }
  analysis["debias"] = debias_rows;

  // ---- invalid-response distribution
  json invalid = json::array();
  for (const auto& backend : backends) {
    std::int64_t valid = 0, no_code = 0, refusal = 0, other = 0, ambiguous = 0, total = 0;
    for (const auto& u : units) {
      if (u.backend != backend) continue;
      ++total;
      if (u.ambiguous) ++ambiguous;
      else if (u.valid) ++valid;
      else if (u.reason == ValidityReason::NoCode) ++no_code;
      else if (u.reason == ValidityReason::RefusalText) ++refusal;
      else ++other;
    }
    invalid.push_back({{"backend", backend},
                       {"responses", responses_per_backend[backend]},
                       {"units", total},
                       {"valid", valid},
                       {"no_code", no_code},
                       {"refusal_text", refusal},
                       {"other", other},
                       {"ambiguous", ambiguous}});
  }
  analysis["invalid"] = invalid;

  // ---- ranking vs generation
  json rank_rows = json::array();
  if (fs::exists(run_dir / "rank_manifest.json")) {
    std::map<std::pair<std::string, std::string>, std::vector<std::vector<std::string>>> replies;
    std::map<std::pair<std::string, std::string>, std::int64_t> failures;
    for (const auto& r : load_responses(run_dir, "rank")) {
      const std::string scenario = r.case_id.substr(r.case_id.find('/') + 1);
      if (!registry.contains(scenario)) continue;
      try {
        replies[{r.backend_id, scenario}].push_back(parse_ranking_reply(r.text, registry.scenario(scenario).providers()));
      } catch (const RankingParseError&) {
        ++failures[{r.backend_id, scenario}];
        replies[{r.backend_id, scenario}];
      }
    }
    for (const auto& [key, rs] : replies) {
      const auto& [backend, scenario] = key;
      const auto providers = registry.scenario(scenario).providers();
      json row = {{"backend", backend}, {"scenario", scenario}, {"replies", rs.size()}, {"unparsed", failures[key]}};
      row["rho"] = nullptr;
      row["p_value"] = nullptr;
      if (rs.empty()) {
        row["consensus"] = json::array();
        rank_rows.push_back(row);
        continue;
      }
      const auto consensus = aggregate_rankings(rs, providers);
      row["consensus"] = consensus.order;
      std::map<std::string, double> mean_rank;
      for (std::size_t i = 0; i < consensus.order.size(); ++i) mean_rank[consensus.order[i]] = consensus.mean_rank[i];
      std::map<std::string, std::int64_t> counts;
      if (auto it = gen_groups.find({backend, scenario, std::string(kOriginal)}); it != gen_groups.end())
        for (const Unit* u : it->second)
          if (u->valid) ++counts[*u->provider];
      std::vector<double> a, g;
      for (const auto& p : providers) {
        a.push_back(mean_rank[p]);
        g.push_back(-static_cast<double>(counts[p]));
      }
      try {
        const auto t = spearman(a, g);
        row["rho"] = t.statistic;
        row["p_value"] = t.p_value;
      } catch (const Error& e) {
        row["note"] = e.what();
      }
      rank_rows.push_back(row);
    }
  }
  analysis["ranking"] = rank_rows;

  // ---- per-backend summary
  json summary = json::array();
  for (const auto& backend : backends) {
    const auto it = gi_by_method.find({backend, std::string(kOriginal)});
    std::vector<double> g;
    if (it != gi_by_method.end())
      for (const auto& [_, v] : it->second) g.push_back(v);
    double mean = 0;
    for (double x : g) mean += x;
    summary.push_back({{"backend", backend},
                       {"gi_scenarios", g.size()},
                       {"gi_median", g.empty() ? json(nullptr) : json(median(g))},
                       {"gi_mean", g.empty() ? json(nullptr) : json(mean / static_cast<double>(g.size()))}});
  }
  analysis["summary"] = summary;

  if (options.learned) {
    json q = json::array();
    for (const auto& e : options.learned->quarantine()) q.push_back(e.to_json());
    analysis["quarantine"] = q;
  }

  std::string verdicts;
  for (const auto& [key, cv] : case_verdicts)
    verdicts += json{{"backend", key.first}, {"case_id", key.second}, {"swapped", cv[0]}, {"dropped", cv[1]}, {"valid", cv[2]}}.dump() + "\n";
  write_file_atomic(run_dir / "analysis" / "case_verdicts.jsonl", verdicts);
  write_file_atomic(run_dir / "analysis" / "analysis.json", analysis.dump(2) + "\n");
  return analysis;
}

}  // namespace provaudit
