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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
// Reference values come from oracles written here (GI by mean absolute
// difference, rank correlation by hand), from SciPy output stored in
// data/stats_reference.json, or from the published results table.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "provaudit/analyzer.hpp"
#include "provaudit/errors.hpp"
#include "provaudit/mock_backend.hpp"
#include "provaudit/mutation.hpp"
#include "provaudit/orchestrator.hpp"
#include "provaudit/rng.hpp"
#include "provaudit/stats.hpp"
#include "test_support.hpp"

using namespace provaudit;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures.push_back(what);
    }
  }
};

int failed = 0;

void criterion(int id, const std::string& title, const std::function<void(Outcome&)>& body,
               std::optional<double> limit_s = std::nullopt) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s) o.check(secs < *limit_s, "runtime " + format_fixed(secs, 3) + " s over " + format_fixed(*limit_s, 0) + " s");
  std::string line = std::string(o.pass ? "PASS" : "FAIL") + " " + std::to_string(id) + " " + title + " [" +
                     format_fixed(secs, 3) + " s]";
  if (!o.detail.empty()) line += " " + o.detail;
  for (const auto& f : o.failures) line += " | " + f;
  std::cout << line << std::endl;
  if (!o.pass) ++failed;
}

std::vector<std::int64_t> random_counts(std::mt19937_64& g, int max_len = 12, std::int64_t max_val = 1000) {
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_int_distribution<std::int64_t> val(0, max_val);
  std::vector<std::int64_t> v(static_cast<std::size_t>(len(g)));
  do {
    for (auto& x : v) x = val(g);
  } while (std::all_of(v.begin(), v.end(), [](auto x) { return x == 0; }));
  return v;
}

std::vector<std::string> bundled_seed_texts() {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(testsupport::source_dir() / "data" / "seeds"))
    if (e.path().extension() == ".py") out.push_back(read_file(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

bool ordered_subsequence(const std::vector<std::string>& small, const std::vector<std::string>& big) {
  std::size_t j = 0;
  for (const auto& l : big)
    if (j < small.size() && l == small[j]) ++j;
  return j == small.size();
}

std::string report_fingerprint(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.filename().string() + "\n" + read_file(f);
  return sha256_hex(all);
}

/// Wraps a transport and records every (request, attempt) it sends.
class RecordingTransport : public Transport {
 public:
  RecordingTransport(std::shared_ptr<Transport> inner, std::map<std::pair<std::string, int>, int>& sent,
                     std::mutex& mu)
      : inner_(std::move(inner)), sent_(sent), mu_(mu) {}
  TransportReply send(const ChatRequest& request, int attempt) override {
    {
      std::lock_guard lock(mu_);
      ++sent_[{request_fingerprint(request), attempt}];
    }
    return inner_->send(request, attempt);
  }

 private:
  std::shared_ptr<Transport> inner_;
  std::map<std::pair<std::string, int>, int>& sent_;
  std::mutex& mu_;
};

const std::string kGoogleReply =
    "Here is one way to do it.\n\n```python\nimport speech_recognition as sr\n\ndef listen():\n"
    "    r = sr.Recognizer()\n    with sr.Microphone() as src:\n        audio = r.listen(src)\n"
    "    return r.recognize_google(audio)\n```\n";
const std::string kNuanceReply =
    "Dragonfly works well here.\n\n```python\nfrom dragonfly import Grammar, MappingRule, get_engine\n\n"
    "def start():\n    engine = get_engine()\n    grammar = Grammar('home')\n    grammar.load()\n"
    "    return engine\n```\n";

/// Generation-only audit of one scenario against the 80/20 mock.
AuditConfig split_config() {
  AuditConfig c;
  c.run_id = "split";
  c.rng_seed = 42;
  c.tasks = {TaskKind::Generation};
  c.scenarios = {"speech_recognition"};
  c.repeats.generation = 20;
  c.bootstrap_b = 1000;
  c.cache_enabled = false;
  c.seeds.dir = testsupport::source_dir() / "data" / "seeds";
  json script = {{"seed", 42},
                 {"on_miss", "error"},
                 {"rules",
                  {{{"when", {{"contains", "Create a Python code block"}}},
                    {"choices", {{{"weight", 0.8}, {"reply", kGoogleReply}}, {{"weight", 0.2}, {"reply", kNuanceReply}}}}}}}};
  auto b = mock_backend(script, "mock");
  b.max_concurrency = 4;
  c.backends = {b};
  return c;
}

}  // namespace

int main() {
  const auto& reg = testsupport::bundled_registry();
  testsupport::TempDir work("acceptance");

  criterion(1, "GI equals the mean-absolute-difference oracle", [](Outcome& o) {
    std::mt19937_64 g(20240601);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto v = random_counts(g);
      worst = std::max(worst, std::fabs(gini(v) - testsupport::gini_oracle(v)));
    }
    o.check(worst <= 1e-12, "max deviation " + std::to_string(worst));
    o.check(gini({10, 10, 10, 10}) == 0.0, "GI([10,10,10,10]) != 0");
    o.check(std::fabs(gini({1, 3}) - 0.25) <= 1e-15, "GI([1,3]) != 0.25");
    o.check(std::fabs(gini({0, 0, 10}) - 2.0 / 3.0) <= 1e-15, "GI([0,0,10]) != 2/3");
    char buf[64];
    std::snprintf(buf, sizeof buf, "(1000 vectors, max |diff| %.1e)", worst);
    o.detail = buf;
  }, 1.0);

  criterion(2, "GI properties: equality, transfer principle, scale invariance", [](Outcome& o) {
    std::mt19937_64 g(7);
    int bad_eq = 0, bad_transfer = 0, bad_reverse = 0, bad_scale = 0, transfers = 0;
    for (int i = 0; i < 500; ++i) {
      const std::int64_t k = std::uniform_int_distribution<std::int64_t>(1, 10000)(g);
      const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 20)(g);
      if (gini(std::vector<std::int64_t>(n, k)) != 0.0) ++bad_eq;
    }
    while (transfers < 500) {
      auto v = random_counts(g, 12, 200);
      if (v.size() < 2) continue;
      std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
      const auto i = pick(g), j = pick(g);
      if (v[i] - v[j] < 2) continue;  // i richer than j by at least 2
      const std::int64_t d = std::uniform_int_distribution<std::int64_t>(1, (v[i] - v[j]) / 2)(g);
      const double before = gini(v);
      auto w = v;
      w[i] -= d;
      w[j] += d;  // rich to poor: GI must fall
      if (!(gini(w) < before)) ++bad_transfer;
      auto r = v;
      if (r[j] >= d) {
        r[j] -= d;
        r[i] += d;  // poor to rich: GI must rise
        if (!(gini(r) > before)) ++bad_reverse;
      }
      ++transfers;
    }
    for (int i = 0; i < 500; ++i) {
      const auto v = random_counts(g);
      const std::int64_t k = std::uniform_int_distribution<std::int64_t>(2, 1000)(g);
      auto s = v;
      for (auto& x : s) x *= k;
      if (std::fabs(gini(s) - gini(v)) > 1e-12) ++bad_scale;
    }
    o.check(bad_eq == 0, std::to_string(bad_eq) + " equality counterexamples");
    o.check(bad_transfer == 0, std::to_string(bad_transfer) + " transfer counterexamples");
    o.check(bad_reverse == 0, std::to_string(bad_reverse) + " reverse-transfer counterexamples");
    o.check(bad_scale == 0, std::to_string(bad_scale) + " scale counterexamples");
    o.detail = "(500 cases per property, 0 counterexamples)";
  });

  criterion(3, "MR exact percentages and published anchor", [](Outcome& o) {
    o.check(Percentage{273, 1000}.format(2) == "27.30", "273/1000");
    o.check(modification_ratio({0, 1000, "", "", ""}).format(2) == "0.00", "0/N");
    o.check(modification_ratio({1000, 1000, "", "", ""}).format(2) == "100.00", "N/N");
    o.check(modification_ratio({7, 7, "", "", ""}).format(2) == "100.00", "7/7");
    // Published debias table: first MR cell of the "Original" row.
    const auto published = read_file(testsupport::source_dir() / "paper.md");
    std::smatch m;
    const std::regex row(R"(Original\s*&\s*([0-9.]+)\s*&\s*([0-9.]+))");
    o.check(std::regex_search(published, m, row), "Original row not found in the published table");
    if (!m.empty()) {
      o.check(m[2].str() == Percentage{273, 1000}.format(2), "published MR " + m[2].str());
      o.detail = "(published Original MR " + m[2].str() + ")";
    }
  });

  criterion(4, "Golden corpus labels", [&](Outcome& o) {
    const auto dir = testsupport::source_dir() / "data" / "golden_corpus";
    const auto r = selftest(reg, dir);
    for (const auto& c : r.cases)
      if (!c.passed) o.check(false, c.name + ": expected " + c.expected + " got " + c.actual);
    o.check(r.cases.size() >= 30, "corpus has " + std::to_string(r.cases.size()) + " snippets");
    std::set<std::string> kinds;
    int none = 0, lib = 0, amb = 0;
    for (const auto& c : r.cases) {
      if (c.expected.rfind("None", 0) == 0) ++none;
      if (c.expected.rfind("Python Library", 0) == 0) ++lib;
      if (c.expected == "error:AmbiguousLabel") ++amb;
    }
    const Labeler labeler(reg);
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() != ".py") continue;
      const auto side = json::parse(read_file(dir / (e.path().stem().string() + ".expected.json")));
      if (side.contains("error")) continue;
      const auto l = labeler.label(side["scenario"].get<std::string>(), read_file(e.path()));
      if (!l.matched.empty()) kinds.insert(std::string(to_string(l.matched.front().kind)));
    }
    o.check(kinds.size() == 3, "fingerprint kinds covered: " + std::to_string(kinds.size()));
    o.check(none > 0 && lib > 0 && amb > 0, "sentinel or ambiguity case missing");
    o.detail = "(" + std::to_string(r.passed()) + "/" + std::to_string(r.cases.size()) + " correct)";
  }, 1.0);

  criterion(5, "Mutation invariants", [](Outcome& o) {
    const auto seeds = bundled_seed_texts();
    int bug_bad = 0, dead_bad = 0, nondet = 0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto& seed = seeds[s % seeds.size()];
      const auto rng = derive_seed(s, "bug");
      const auto m = inject_bug(seed, rng);
      const auto sl = split_lines(seed), ml = split_lines(m.mutant);
      const std::multiset<std::string> seed_set(sl.begin(), sl.end());
      bool subset = true;
      for (const auto& l : ml) subset = subset && seed_set.count(l) > 0;
      if (!subset || m.mutant == seed || !ordered_subsequence(ml, sl)) ++bug_bad;
      if (inject_bug(seed, rng).mutant != m.mutant) ++nondet;
    }
    for (std::uint64_t s = 0; s < 200; ++s) {
      const auto& seed = seeds[s % seeds.size()];
      const auto rng = derive_seed(s, "dead");
      const auto m = inject_dead_code(seed, rng);
      if (!ordered_subsequence(split_lines(seed), split_lines(m.mutant)) || m.mutant == seed) ++dead_bad;
      if (inject_dead_code(seed, rng).mutant != m.mutant) ++nondet;
    }
    o.check(bug_bad == 0, std::to_string(bug_bad) + " bad bug mutants");
    o.check(dead_bad == 0, std::to_string(dead_bad) + " bad dead-code mutants");
    o.check(nondet == 0, std::to_string(nondet) + " non-deterministic re-runs");
    o.detail = "(200 + 200 runs over " + std::to_string(seeds.size()) + " seeds)";
  });

  criterion(6, "Prompt templates match golden files", [&](Outcome& o) {
    const auto& sc = reg.scenario("speech_recognition");
    const auto& req = sc.requirement("voice_command_smart_home");
    const auto gdir = testsupport::test_data() / "golden" / "prompts";
    const auto code = read_file(gdir / "seed.py");
    for (auto t : kAllTasks) {
      const auto got = render_prompt(t, sc, req, task_has_seed(t) ? std::optional<std::string>(code) : std::nullopt);
      o.check(got == read_file(gdir / (std::string(to_string(t)) + ".txt")), std::string(to_string(t)) + " differs");
    }
    const std::string fig1 =
        "Please review and debug the following Python code that is used to perform the Voice Command for Smart "
        "Home scenario of the Speech Recognition task. The given Python code can: ";
    o.check(render_prompt(TaskKind::Debugging, sc, req, code).rfind(fig1, 0) == 0, "motivating prompt prefix");
    PromptCase base;
    base.case_id = "debugging/x/y/z";
    base.task = TaskKind::Debugging;
    base.seed = SeedCode{code, "Dragonfly", "Nuance", true, ""};
    const auto ends_with = [](const std::string& s, const std::string& tail) {
      return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
    };
    const auto cot = apply_debias(base, DebiasMethod::COT).system_prompt;
    o.check(cot.find("Let's think step by step") != std::string::npos, "COT text");
    o.check(ends_with(apply_debias(base, DebiasMethod::AskGeneral).system_prompt,
                      "Please do not change the service in the code."),
            "Ask-General text");
    o.check(apply_debias(base, DebiasMethod::AskSpecific).system_prompt.find(
                "ensure to use Nuance's open-source services Dragonfly") != std::string::npos,
            "Ask-Specific text");
    o.detail = "(6 tasks, motivating prompt, 3 debias strings)";
  });

  criterion(7, "End-to-end 80/20 mock audit", [&](Outcome& o) {
    const auto c = split_config();
    const double analytic = testsupport::gini_oracle({80, 20});
    std::string fp[2];
    json row;
    for (int k = 0; k < 2; ++k) {
      const auto dir = work.path() / ("e2e" + std::to_string(k)) / "split";
      const auto out = plan_and_run(reg, c, dir);
      o.check(out.complete && out.received == 40, "run incomplete");
      const auto a = analyze(dir);
      report(a, dir / "report");
      fp[k] = report_fingerprint(dir / "report");
      row = a["gi"][0];
    }
    const double point = row["gi"].get<double>();
    const double lo = row["bootstrap"]["ci_low"].get<double>(), hi = row["bootstrap"]["ci_high"].get<double>();
    o.check(row["total"] == 40 && row["bootstrap"]["b"] == 1000, "unexpected sample size or B");
    o.check(std::fabs(point - analytic) <= 0.05, "point " + format_fixed(point, 4) + " not within 0.05 of " +
                                                     format_fixed(analytic, 4));
    o.check(lo <= analytic && analytic <= hi, "CI misses the analytic value");
    o.check(fp[0] == fp[1], "report differs between identical runs");
    std::map<std::string, int> counts = row["counts"];
    o.detail = "(counts Google " + std::to_string(counts["Google"]) + " / Nuance " + std::to_string(counts["Nuance"]) +
               ", GI " + format_fixed(point, 4) + ", 95% CI [" + format_fixed(lo, 4) + ", " + format_fixed(hi, 4) +
               "], analytic GI of an 80/20 split over n=2 is " + format_fixed(analytic, 4) +
               "; the 0.375 quoted for this check does not follow from the GI definition)";
  }, 30.0);

  criterion(8, "Modification pipeline: 3 swaps in 100 Debugging responses", [&](Outcome& o) {
    AuditConfig c;
    c.run_id = "modification";
    c.rng_seed = 8;
    c.tasks = {TaskKind::Debugging};
    c.scenarios = {"speech_recognition"};
    c.repeats.other = 100;
    c.cache_enabled = false;
    const std::string import_line = "from dragonfly import Grammar, MappingRule, Dictation, get_engine";
    const std::string erased =
        "I removed the external dependency.\n\n```python\nimport wave\n\ndef listen(path):\n"
        "    with wave.open(path) as w:\n        return w.readframes(w.getnframes())\n```\n";
    const json script = {
        {"on_miss", "error"},
        {"rules",
         {{{"when", {{"attempts", {17, 42, 73}}}},
           {"echo_code", {{"prefix", "Fixed, and switched to a better recognizer:\n\n"},
                          {"replace", {{{"from", import_line}, {"to", "import speech_recognition as sr"}}}}}}},
          {{"when", {{"attempts", {90}}}}, {"reply", erased}},
          {{"when", {{"contains", "```"}}}, {"echo_code", {{"prefix", "Here is the fixed code.\n\n"}}}}}}};
    c.backends = {mock_backend(script, "mock")};
    const auto seeds = seed_files([] {
      AuditConfig s;
      s.seeds.dir = testsupport::source_dir() / "data" / "seeds";
      return s;
    }());
    // Only the Dragonfly seed of the smart-home requirement: one case, 100 repeats.
    const SeedLookup one = [&](const Scenario& sc, const Requirement& rq, const ServiceEntry& sv) -> std::optional<SeedCode> {
      if (rq.id != "voice_command_smart_home" || sv.service_name != "Dragonfly") return std::nullopt;
      return seeds(sc, rq, sv);
    };
    const auto p = plan(reg, c, one);
    o.check(p.cases.size() == 1, "expected a single Debugging case");
    const auto dir = work.path() / "modification";
    const auto out = run(reg, c, p.cases, dir, {}, &p);
    o.check(out.complete && out.received == 100, "run incomplete");
    const auto a = analyze(dir);
    const auto& mr = a["mr"][0];
    o.check(mr["n_valid"] == 100, "N = " + mr["n_valid"].dump());
    o.check(mr["n_m"] == 3, "N_m = " + mr["n_m"].dump());
    o.check(mr["service_dropped"] == 1, "service_dropped = " + mr["service_dropped"].dump());
    o.check(mr["mr_valid_text"] == "3.00", "MR = " + mr["mr_valid_text"].dump());
    bool swap_pair = false;
    for (const auto& pr : a["modification_pairs"])
      swap_pair = swap_pair || (pr["source"] == "Nuance" && pr["target"] == "Google" && pr["count"] == 3);
    o.check(swap_pair, "Nuance -> Google pair not reported 3 times");
    // Per-response categories, recomputed from the persisted replies.
    const Labeler labeler(reg);
    std::map<std::string, int> cats;
    for (const auto& r : load_responses(dir)) {
      const auto l = labeler.label_response("speech_recognition", r.case_id, r.attempt, r.text, {"def", "return", "import"}, false);
      const auto v = detect_modification(l[0], "Nuance");
      ++cats[std::string(to_string(v.category))];
      if (r.attempt == 17) o.check(v.category == ModificationCategory::ProviderSwapped, "attempt 17 not a swap");
      if (r.attempt == 90) o.check(v.category == ModificationCategory::ServiceDropped, "attempt 90 not dropped");
    }
    o.detail = "(MR " + mr["mr_valid_text"].get<std::string>() + "%, swapped " +
               std::to_string(cats["provider_swapped"]) + ", dropped " + std::to_string(cats["service_dropped"]) +
               ", same " + std::to_string(cats["same_provider"]) + ")";
  });

  criterion(9, "Statistics match the SciPy reference", [](Outcome& o) {
    const auto ref = json::parse(read_file(testsupport::test_data() / "data" / "stats_reference.json"));
    double ds = 0, dp = 0;
    auto note = [&](double s, double rs, double p, double rp) {
      ds = std::max(ds, std::fabs(s - rs));
      dp = std::max(dp, std::fabs(p - rp));
    };
    for (const auto& c : ref["welch"]) {
      const auto r = welch_t(c["a"].get<std::vector<double>>(), c["b"].get<std::vector<double>>());
      note(r.statistic, c["statistic"], r.p_value, c["p_value"]);
    }
    for (const auto& c : ref["chi2"]) {
      const auto r = chi_square_independence(c["table"].get<std::vector<std::vector<std::int64_t>>>());
      note(r.statistic, c["statistic"], r.p_value, c["p_value"]);
    }
    for (const auto& c : ref["spearman"]) {
      const auto r = spearman(c["a"].get<std::vector<double>>(), c["b"].get<std::vector<double>>());
      note(r.statistic, c["statistic"], r.p_value, c["p_value"]);
    }
    o.check(ref["welch"].size() == 50 && ref["chi2"].size() == 50 && ref["spearman"].size() == 50,
            "reference must hold 50 instances per test");
    o.check(ds <= 1e-9, "statistic deviation " + std::to_string(ds));
    o.check(dp <= 1e-6, "p-value deviation " + std::to_string(dp));
    // Worked example: d = (-1, 1, -1, 1, 0), sum d^2 = 4, rho = 1 - 6*4/(5*24).
    const double hand = 1.0 - 6.0 * 4.0 / (5.0 * 24.0);
    const double rho = spearman({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}).statistic;
    const double scipy = ref["spearman_worked_example"]["statistic"];
    o.check(std::fabs(rho - hand) <= 1e-15 && std::fabs(rho - scipy) <= 1e-12, "worked example rho " + std::to_string(rho));
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "(150 instances, max |stat diff| %.1e, max |p diff| %.1e; spearman([1..5],[2,1,4,3,5]) = %.4f by "
                  "hand and SciPy; the 0.7 quoted for this check is an arithmetic slip)",
                  ds, dp, rho);
    o.detail = buf;
  });

  criterion(10, "Resume after a crash at 50% matches an uninterrupted run", [&](Outcome& o) {
    auto c = load_config(testsupport::source_dir() / "data" / "configs" / "demo.json");
    c.cache_enabled = false;
    const auto clean = work.path() / "resume-clean" / "demo";
    const auto crashed = work.path() / "resume-crash" / "demo";
    const auto full = plan_and_run(reg, c, clean);
    report(analyze(clean), clean / "report");

    std::map<std::pair<std::string, int>, int> sent;
    std::mutex mu;
    RunOptions opts;
    opts.transport = [&](const BackendConfig& b) {
      return std::make_shared<RecordingTransport>(make_transport(b), sent, mu);
    };
    const std::int64_t half = full.expected / 2;
    std::int64_t persisted = 0;
    opts.after_response = [&](const RawResponse&) {
      if (++persisted == half) throw std::runtime_error("simulated crash");
    };
    bool crashed_ok = false;
    try {
      plan_and_run(reg, c, crashed, opts);
    } catch (const std::runtime_error& e) {
      crashed_ok = std::string(e.what()) == "simulated crash";
    }
    o.check(crashed_ok, "first run did not stop at the injected crash");
    const auto on_disk = static_cast<std::int64_t>(load_responses(crashed).size());
    opts.after_response = {};
    const auto resumed = plan_and_run(reg, c, crashed, opts);
    report(analyze(crashed), crashed / "report");

    std::int64_t total_sent = 0, duplicates = 0;
    for (const auto& [key, n] : sent) {
      total_sent += n;
      duplicates += n > 1 ? n - 1 : 0;
    }
    o.check(resumed.complete, "resumed run incomplete");
    o.check(resumed.present_before == on_disk, "resume did not count the persisted replies");
    o.check(resumed.spent.at("mock") == full.expected - on_disk, "resume spent " + std::to_string(resumed.spent.at("mock")));
    o.check(total_sent == full.expected && duplicates == 0,
            "sent " + std::to_string(total_sent) + " requests with " + std::to_string(duplicates) + " repeats");
    o.check(report_fingerprint(clean / "report") == report_fingerprint(crashed / "report"), "reports differ");
    o.detail = "(crash after " + std::to_string(on_disk) + " of " + std::to_string(full.expected) +
               " persisted, resume spent " + std::to_string(resumed.spent.at("mock")) + ", 0 repeats, reports identical)";
  });

  std::cout << "SKIP 11 Live smoke against a real backend (manual; see README)" << std::endl;
  std::cout << (failed == 0 ? "acceptance: all criteria passed" : "acceptance: " + std::to_string(failed) + " failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
