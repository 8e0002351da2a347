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
#include <set>

#include "provaudit/errors.hpp"
#include "provaudit/orchestrator.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json get_or_null(const json& row, const std::string& key) {
  return row.contains(key) ? row[key] : json(nullptr);
}

json boot_field(const json& row, const std::string& key) {
  if (!row.contains("bootstrap") || row["bootstrap"].is_null()) return nullptr;
  return get_or_null(row["bootstrap"], key);
}

std::string join(const json& arr, const std::string& sep) {
  std::string s;
  for (const auto& v : arr) {
    if (!s.empty()) s += sep;
    s += v.get<std::string>();
  }
  return s;
}

std::string cell_text(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_cell(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_number_float()) return format_fixed(v.get<double>(), 4);
  std::string s = cell_text(v);
  std::string out;
  for (char c : s) out += c == '|' ? std::string("\\|") : std::string(1, c);
  return out;
}

}  // namespace

std::vector<Table> report_tables(const json& analysis) {
  std::vector<Table> t;
  auto rows_of = [&](const char* key) { return analysis.contains(key) ? analysis[key] : json::array(); };

  Table summary{"summary", {"backend", "gi_scenarios", "gi_median", "gi_mean"}, {}};
  for (const auto& r : rows_of("summary"))
    summary.rows.push_back({r["backend"], r["gi_scenarios"], r["gi_median"], r["gi_mean"]});
  t.push_back(std::move(summary));

  Table gi{"gi",
           {"backend", "scenario", "method", "n", "total", "gi", "ci_low", "ci_high", "boot_mean", "b", "gi_with_none",
            "gi_without_none", "n_with_none", "n_without_none"},
           {}};
  for (const auto& r : rows_of("gi"))
    gi.rows.push_back({r["backend"], r["scenario"], r["method"], r["n"], r["total"], r["gi"], boot_field(r, "ci_low"),
                       boot_field(r, "ci_high"), boot_field(r, "mean"), boot_field(r, "b"), r["gi_with_none"],
                       r["gi_without_none"], r["n_with_none"], r["n_without_none"]});
  t.push_back(std::move(gi));

  Table mr{"mr",
           {"backend", "task", "method", "n_m", "n_valid", "n_queried", "service_dropped", "same_provider", "invalid",
            "mr_valid", "mr_valid_text", "mr_queried", "mr_queried_text", "ci_low", "ci_high", "b"},
           {}};
  for (const auto& r : rows_of("mr"))
    mr.rows.push_back({r["backend"], r["task"], r["method"], r["n_m"], r["n_valid"], r["n_queried"],
                       r["service_dropped"], r["same_provider"], r["invalid"], r["mr_valid"], r["mr_valid_text"],
                       r["mr_queried"], r["mr_queried_text"], boot_field(r, "ci_low"), boot_field(r, "ci_high"),
                       boot_field(r, "b")});
  t.push_back(std::move(mr));

  Table pref{"preferred_generation", {"backend", "scenario", "preferred", "count", "share"}, {}};
  for (const auto& r : rows_of("preferred_generation"))
    pref.rows.push_back({r["backend"], r["scenario"], join(r["preferred"], "; "), r["count"], r["share"]});
  t.push_back(std::move(pref));

  Table pairs{"modification_pairs", {"backend", "source", "target", "count"}, {}};
  for (const auto& r : rows_of("modification_pairs"))
    pairs.rows.push_back({r["backend"], r["source"], r["target"], r["count"]});
  t.push_back(std::move(pairs));

  Table debias{"debias", {"backend", "method", "gi_median", "gi_p", "gi_scenarios", "mr", "mr_p", "mr_valid"}, {}};
  for (const auto& r : rows_of("debias"))
    debias.rows.push_back(
        {r["backend"], r["method"], r["gi_median"], r["gi_p"], r["gi_scenarios"], r["mr"], r["mr_p"], r["mr_valid"]});
  t.push_back(std::move(debias));

  Table ranking{"ranking", {"backend", "scenario", "replies", "unparsed", "consensus", "rho", "p_value"}, {}};
  for (const auto& r : rows_of("ranking"))
    ranking.rows.push_back({r["backend"], r["scenario"], r["replies"], r["unparsed"], join(r["consensus"], " > "),
                            r["rho"], r["p_value"]});
  t.push_back(std::move(ranking));

  Table invalid{"invalid", {"backend", "responses", "units", "valid", "no_code", "refusal_text", "other", "ambiguous"}, {}};
  for (const auto& r : rows_of("invalid"))
    invalid.rows.push_back({r["backend"], r["responses"], r["units"], r["valid"], r["no_code"], r["refusal_text"],
                            r["other"], r["ambiguous"]});
  t.push_back(std::move(invalid));
  return t;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_escape(t.columns[i]);
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_escape(cell_text(row[i]));
    out += "\n";
  }
  return out;
}

std::string render_markdown(const json& analysis, const std::vector<Table>& tables) {
  std::string md = "# Provider bias audit: " + analysis.value("run_id", std::string("run")) + "\n\n";
  md += "## Conventions\n\n";
  const auto conv = analysis.value("conventions", json::object());
  for (const auto& [k, v] : conv.items()) md += "- " + k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
  md += "\nGI ranges over [0, (n-1)/n]; read every GI together with its n.\n";
  if (!conv.value("debias_text_default", true) || conv.contains("debias_text"))
    md += "The Debias method's wording is not published; the text used is listed above.\n";
  for (const auto& t : tables) {
    md += "\n## " + t.name + "\n\n|";
    for (const auto& c : t.columns) md += " " + c + " |";
    md += "\n|";
    for (std::size_t i = 0; i < t.columns.size(); ++i) md += " --- |";
    md += "\n";
    for (const auto& row : t.rows) {
      md += "|";
      for (const auto& v : row) md += " " + md_cell(v) + " |";
      md += "\n";
    }
  }
  const auto warnings = analysis.value("warnings", json::array());
  if (!warnings.empty()) {
    md += "\n## Warnings\n\n";
    for (const auto& w : warnings) md += "- " + w.get<std::string>() + "\n";
  }
  return md;
}

std::vector<fs::path> report(const json& analysis, const fs::path& out_dir, const std::vector<std::string>& formats) {
  const auto tables = report_tables(analysis);
  std::vector<fs::path> written;
  const std::set<std::string> want(formats.begin(), formats.end());
  for (const auto& f : want)
    if (f != "csv" && f != "json" && f != "md") throw ValidationError("unknown report format '" + f + "'");
  if (want.count("csv"))
    for (const auto& t : tables) {
      written.push_back(out_dir / (t.name + ".csv"));
      write_file_atomic(written.back(), to_csv(t));
    }
  if (want.count("json")) {
    json j = {{"run_id", analysis.value("run_id", "")}, {"conventions", analysis.value("conventions", json::object())}};
    j["tables"] = json::object();
    for (const auto& t : tables) j["tables"][t.name] = {{"columns", t.columns}, {"rows", t.rows}};
    written.push_back(out_dir / "report.json");
    write_file_atomic(written.back(), j.dump(2) + "\n");
  }
  if (want.count("md")) {
    written.push_back(out_dir / "summary.md");
    write_file_atomic(written.back(), render_markdown(analysis, tables));
  }
  return written;
}

std::size_t SelftestResult::passed() const {
  return static_cast<std::size_t>(std::count_if(cases.begin(), cases.end(), [](const auto& c) { return c.passed; }));
}

SelftestResult selftest(const Registry& registry, const fs::path& corpus_dir, const SubjectLanguage& lang) {
  if (!fs::is_directory(corpus_dir)) throw ValidationError("golden corpus " + corpus_dir.string() + " not found");
  std::vector<fs::path> sidecars;
  for (const auto& e : fs::directory_iterator(corpus_dir)) {
    const auto name = e.path().filename().string();
    if (name.size() > 14 && name.substr(name.size() - 14) == ".expected.json") sidecars.push_back(e.path());
  }
  std::sort(sidecars.begin(), sidecars.end());
  LabelerOptions o;
  o.language = lang;
  const Labeler labeler(registry, o);

  SelftestResult out;
  for (const auto& side : sidecars) {
    const auto expect = json::parse(read_file(side));
    const auto stem = side.filename().string().substr(0, side.filename().string().size() - 14);
    const auto code_path = corpus_dir / expect.value("file", stem + (lang.tag == "python" ? ".py" : "." + lang.tag));
    SelftestCase c;
    c.name = stem;
    if (expect.contains("error")) c.expected = "error:" + expect["error"].get<std::string>();
    else {
      c.expected = expect.at("provider").get<std::string>();
      if (expect.contains("service_name")) c.expected += "/" + expect["service_name"].get<std::string>();
    }
    try {
      const auto l = labeler.label(expect.at("scenario").get<std::string>(), read_file(code_path));
      c.actual = l.provider;
      if (expect.contains("service_name")) c.actual += "/" + l.service_name.value_or("");
    } catch (const AmbiguousLabel&) {
      c.actual = "error:AmbiguousLabel";
    } catch (const Error& e) {
      c.actual = std::string("error:") + e.what();
    }
    c.passed = c.actual == c.expected;
    out.cases.push_back(std::move(c));
  }
  return out;
}

json promote_fingerprints(const json& registry_doc, const LearnedStore& store, const std::vector<std::string>& accept,
                          std::size_t* promoted) {
  json doc = registry_doc;
  std::size_t count = 0;
  for (const auto& e : store.entries()) {
    if (e.quarantined && std::find(accept.begin(), accept.end(), e.provider) == accept.end()) continue;
    json* scenario = nullptr;
    for (auto& sc : doc.at("scenarios"))
      if (sc.at("id") == e.scenario_id) scenario = &sc;
    if (!scenario) throw UnknownScenario("learned entry names unknown scenario '" + e.scenario_id + "'");
    const std::string name = e.service_name.empty() ? e.provider + " service" : e.service_name;
    json* service = nullptr;
    for (auto& s : (*scenario)["services"])
      if (s.at("provider") == e.provider && (e.service_name.empty() || s.at("service_name") == name)) {
        service = &s;
        break;
      }
    if (!service) {
      (*scenario)["services"].push_back({{"service_name", name}, {"provider", e.provider}, {"fingerprints", json::array()}});
      service = &(*scenario)["services"].back();
    }
    for (const auto& fp : e.fingerprints) {
      const json f = {{"kind", std::string(to_string(fp.kind))}, {"pattern", fp.pattern}};
      auto& list = (*service)["fingerprints"];
      if (std::find(list.begin(), list.end(), f) == list.end()) {
        list.push_back(f);
        ++count;
      }
    }
  }
  Registry::from_json(doc);  // must still validate
  if (promoted) *promoted = count;
  return doc;
}

}  // namespace provaudit
