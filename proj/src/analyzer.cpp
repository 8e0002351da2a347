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

#include "provaudit/analyzer.hpp"

#include <algorithm>
#include <fstream>
#include <regex>

#include <nlohmann/json.hpp>

#include "provaudit/errors.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;

std::string_view to_string(ExtractionMethod m) {
  switch (m) {
    case ExtractionMethod::FencedBlock: return "fenced_block";
    case ExtractionMethod::HeuristicIndent: return "heuristic_indent";
    case ExtractionMethod::WholeBody: return "whole_body";
  }
  return "whole_body";
}

std::string_view to_string(ValidityReason r) {
  switch (r) {
    case ValidityReason::Valid: return "valid";
    case ValidityReason::NoCode: return "no_code";
    case ValidityReason::RefusalText: return "refusal_text";
    case ValidityReason::Other: return "other";
  }
  return "other";
}

ValidityReason validity_reason_from_string(std::string_view s) {
  if (s == "valid") return ValidityReason::Valid;
  if (s == "no_code") return ValidityReason::NoCode;
  if (s == "refusal_text") return ValidityReason::RefusalText;
  if (s == "other") return ValidityReason::Other;
  throw ParseError("unknown validity reason '" + std::string(s) + "'");
}

std::string_view to_string(LabelSource s) {
  switch (s) {
    case LabelSource::Fingerprint: return "fingerprint";
    case LabelSource::LLMFallback: return "llm_fallback";
    case LabelSource::Sentinel: return "sentinel";
  }
  return "sentinel";
}

LabelSource label_source_from_string(std::string_view s) {
  if (s == "fingerprint") return LabelSource::Fingerprint;
  if (s == "llm_fallback") return LabelSource::LLMFallback;
  if (s == "sentinel") return LabelSource::Sentinel;
  throw ParseError("unknown label source '" + std::string(s) + "'");
}

std::string_view to_string(ModificationCategory c) {
  switch (c) {
    case ModificationCategory::SameProvider: return "same_provider";
    case ModificationCategory::ProviderSwapped: return "provider_swapped";
    case ModificationCategory::ServiceDropped: return "service_dropped";
    case ModificationCategory::Invalid: return "invalid";
  }
  return "invalid";
}

// ---------------------------------------------------------------- extraction

namespace {

bool is_fence(std::string_view line) {
  const auto t = trim(line);
  return t.size() >= 3 && t.compare(0, 3, "```") == 0;
}

bool has_marker(std::string_view text, const std::vector<std::string>& markers) {
  return std::any_of(markers.begin(), markers.end(),
                     [&](const std::string& m) { return contains_word(text, m, false); });
}

// A column-0 line that reads like source rather than prose.
bool code_like(std::string_view line) {
  static const std::regex re(
      R"(^(def|class|import|from|return|for|while|if|elif|else|try|except|with|async|public|private|package)\b.*|^@\w.*|^[A-Za-z_][\w.]*(\[[^\]]*\])?\s*(=|\+=|-=|\().*)");
  if (line.empty() || line[0] == ' ' || line[0] == '\t') return false;
  return std::regex_match(std::string(line), re);
}

bool indented(std::string_view line) {
  return (line.size() >= 4 && line.substr(0, 4) == "    ") || (!line.empty() && line[0] == '\t');
}

std::string dedent_block(const std::vector<std::string>& lines) {
  std::vector<std::string> out;
  for (const auto& l : lines) {
    if (l.size() >= 4 && l.compare(0, 4, "    ") == 0) out.push_back(l.substr(4));
    else if (!l.empty() && l[0] == '\t') out.push_back(l.substr(1));
    else out.push_back(l);
  }
  while (!out.empty() && trim(out.back()).empty()) out.pop_back();
  return join_lines(out, true);
}

}  // namespace

ExtractedCode extract_code(std::string_view response_text, const std::vector<std::string>& markers) {
  const auto lines = split_lines(response_text);
  ExtractedCode out;

  // Fenced blocks; an unterminated fence (truncated reply) runs to the end.
  bool in_fence = false;
  bool saw_fence = false;
  std::vector<std::string> cur;
  for (const auto& l : lines) {
    if (is_fence(l)) {
      saw_fence = true;
      if (in_fence) {
        out.blocks.push_back(join_lines(cur, true));
        cur.clear();
      }
      in_fence = !in_fence;
      continue;
    }
    if (in_fence) cur.push_back(l);
  }
  if (in_fence && !cur.empty()) out.blocks.push_back(join_lines(cur, true));
  if (saw_fence) {
    std::erase_if(out.blocks, [](const std::string& b) { return trim(b).empty(); });
    out.method = ExtractionMethod::FencedBlock;
    if (!out.blocks.empty()) return out;
  }

  // Markdown-style indented code, only when no column-0 line looks like code.
  const bool column0_code = std::any_of(lines.begin(), lines.end(), [](const auto& l) { return code_like(l); });
  if (!column0_code) {
    std::vector<std::string> run;
    std::vector<std::string> blocks;
    auto flush = [&] {
      if (!run.empty()) blocks.push_back(dedent_block(run));
      run.clear();
    };
    for (const auto& l : lines) {
      if (indented(l)) run.push_back(l);
      else if (trim(l).empty() && !run.empty()) run.push_back(l);
      else flush();
    }
    flush();
    std::erase_if(blocks, [&](const std::string& b) { return !has_marker(b, markers); });
    if (!blocks.empty()) {
      out.blocks = std::move(blocks);
      out.method = ExtractionMethod::HeuristicIndent;
      return out;
    }
  }

  out.method = ExtractionMethod::WholeBody;
  out.blocks.clear();
  if (has_marker(response_text, markers)) out.blocks.emplace_back(response_text);
  return out;
}

ExtractedCode extract_code(std::string_view response_text) {
  return extract_code(response_text, SubjectLanguage::python().default_markers);
}

ValidityVerdict validity(const ExtractedCode& extracted, const std::vector<std::string>& markers,
                         std::string_view response_text) {
  if (markers.empty()) throw EmptyMarkerSet("validity check needs at least one marker token");
  for (const auto& b : extracted.blocks)
    if (has_marker(b, markers)) return {true, ValidityReason::Valid};
  if (!extracted.blocks.empty()) return {false, ValidityReason::Other};
  static const std::regex refusal(
      R"(\b(I'm sorry|I am sorry|I apologi[sz]e|I cannot|I can't|I can not|I'm unable|I am unable|I won't|As an AI)\b)",
      std::regex::icase);
  const std::string text(response_text);
  if (std::regex_search(text, refusal)) return {false, ValidityReason::RefusalText};
  return {false, ValidityReason::NoCode};
}

// ---------------------------------------------------------------- records

namespace {

json fingerprints_to_json(const std::vector<Fingerprint>& fps) {
  json a = json::array();
  for (const auto& f : fps) a.push_back({{"kind", to_string(f.kind)}, {"pattern", f.pattern}});
  return a;
}

std::vector<Fingerprint> fingerprints_from_json(const json& a) {
  std::vector<Fingerprint> out;
  for (const auto& f : a)
    out.push_back({fingerprint_kind_from_string(f.at("kind").get<std::string>()), f.at("pattern").get<std::string>()});
  return out;
}

}  // namespace

json LabeledResponse::to_json() const {
  json j = {{"case_id", case_id},
            {"attempt", attempt},
            {"block", block},
            {"valid", verdict.valid},
            {"reason", to_string(verdict.reason)},
            {"extraction", to_string(extraction)}};
  if (label) {
    j["provider"] = label->provider;
    j["service_name"] = label->service_name ? json(*label->service_name) : json(nullptr);
    j["label_source"] = to_string(label->source);
    j["matched_fingerprints"] = fingerprints_to_json(label->matched);
    if (label->quarantined) j["quarantined"] = true;
  } else {
    j["provider"] = nullptr;
  }
  if (error) j["error"] = *error;
  return j;
}

LabeledResponse LabeledResponse::from_json(const json& j) {
  LabeledResponse r;
  r.case_id = j.at("case_id").get<std::string>();
  r.attempt = j.at("attempt").get<int>();
  r.block = j.value("block", 0);
  r.verdict.valid = j.at("valid").get<bool>();
  r.verdict.reason = validity_reason_from_string(j.at("reason").get<std::string>());
  const auto ex = j.value("extraction", "whole_body");
  r.extraction = ex == "fenced_block"       ? ExtractionMethod::FencedBlock
                 : ex == "heuristic_indent" ? ExtractionMethod::HeuristicIndent
                                            : ExtractionMethod::WholeBody;
  if (!j.at("provider").is_null()) {
    Label l;
    l.provider = j["provider"].get<std::string>();
    if (j.contains("service_name") && !j["service_name"].is_null()) l.service_name = j["service_name"].get<std::string>();
    l.source = label_source_from_string(j.at("label_source").get<std::string>());
    l.matched = fingerprints_from_json(j.value("matched_fingerprints", json::array()));
    l.quarantined = j.value("quarantined", false);
    r.label = std::move(l);
  }
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  return r;
}

// ---------------------------------------------------------------- learned store

json LearnedEntry::to_json() const {
  return {{"scenario_id", scenario_id},
          {"provider", provider},
          {"service_name", service_name},
          {"fingerprints", fingerprints_to_json(fingerprints)},
          {"quarantined", quarantined}};
}

LearnedEntry LearnedEntry::from_json(const json& j) {
  LearnedEntry e;
  e.scenario_id = j.at("scenario_id").get<std::string>();
  e.provider = j.at("provider").get<std::string>();
  e.service_name = j.value("service_name", "");
  e.fingerprints = fingerprints_from_json(j.at("fingerprints"));
  e.quarantined = j.value("quarantined", false);
  return e;
}

LearnedStore::LearnedStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  for (const auto& line : split_lines(read_file(*path_))) {
    if (trim(line).empty()) continue;
    try {
      entries_.push_back(LearnedEntry::from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError("learned store " + path_->string() + ": " + e.what());
    }
  }
}

std::optional<Label> LearnedStore::match(std::string_view scenario_id, const CodeFeatures& features) const {
  std::lock_guard lock(mu_);
  std::optional<Label> found;
  for (const auto& e : entries_) {
    if (e.scenario_id != scenario_id) continue;
    std::vector<Fingerprint> hits;
    for (const auto& fp : e.fingerprints) {
      bool hit = false;
      if (fp.kind == FingerprintKind::LibraryImport)
        hit = std::find(features.third_party_imports.begin(), features.third_party_imports.end(), fp.pattern) !=
              features.third_party_imports.end();
      else if (fp.kind == FingerprintKind::UrlTemplate)
        hit = std::any_of(features.external_urls.begin(), features.external_urls.end(),
                          [&](const std::string& u) { return url_matches(u, fp.pattern); });
      if (hit) hits.push_back(fp);
    }
    if (hits.empty()) continue;
    if (found && found->provider != e.provider)
      throw AmbiguousLabel("learned fingerprints of '" + found->provider + "' and '" + e.provider +
                           "' both match");
    if (!found) {
      Label l;
      l.provider = e.provider;
      if (!e.service_name.empty()) l.service_name = e.service_name;
      l.source = LabelSource::LLMFallback;
      l.matched = std::move(hits);
      l.quarantined = e.quarantined;
      found = std::move(l);
    }
  }
  return found;
}

void LearnedStore::add(LearnedEntry entry) {
  std::lock_guard lock(mu_);
  if (path_) {
    std::filesystem::create_directories(path_->parent_path().empty() ? "." : path_->parent_path());
    std::ofstream out(*path_, std::ios::app | std::ios::binary);
    out << entry.to_json().dump() << '\n';
    if (!out) throw Error("cannot append to learned store " + path_->string());
  }
  entries_.push_back(std::move(entry));
}

std::vector<LearnedEntry> LearnedStore::quarantine() const {
  std::lock_guard lock(mu_);
  std::vector<LearnedEntry> out;
  for (const auto& e : entries_)
    if (e.quarantined) out.push_back(e);
  return out;
}

// ---------------------------------------------------------------- fallback

std::string build_fallback_prompt(const Scenario& scenario, std::string_view code, const SubjectLanguage& lang) {
  std::string c(code);
  while (!c.empty() && c.back() == '\n') c.pop_back();
  return "The following code is used to perform " + scenario.name + ".\n```" + lang.fence_info + "\n" + c +
         "\n```\nPlease tell me which service from which company is used by the code to complete the given task.";
}

namespace {

// Earliest whole-word occurrence among `names`, case-insensitive.
std::optional<std::string> earliest(std::string_view text, const std::vector<std::string>& names) {
  const auto lower = to_lower(text);
  std::optional<std::string> best;
  std::size_t best_pos = std::string::npos;
  for (const auto& n : names) {
    if (is_sentinel_provider(n)) continue;
    const auto ln = to_lower(n);
    for (std::size_t pos = lower.find(ln); pos != std::string::npos; pos = lower.find(ln, pos + 1)) {
      const bool left = pos == 0 || !is_ident_char(lower[pos - 1]);
      const bool right = pos + ln.size() >= lower.size() || !is_ident_char(lower[pos + ln.size()]);
      if (left && right) {
        if (pos < best_pos) {
          best_pos = pos;
          best = n;
        }
        break;
      }
    }
  }
  return best;
}

std::string strip_trailing_punct(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == '*' || s.back() == ':')) s.pop_back();
  return trim(s);
}

}  // namespace

std::optional<FallbackAnswer> parse_fallback_reply(std::string_view reply, const Scenario& scenario,
                                                   const std::vector<std::string>& known_providers) {
  std::optional<std::string> provider = earliest(reply, scenario.providers());
  if (!provider) provider = earliest(reply, known_providers);
  if (provider) {
    FallbackAnswer a{*provider, std::nullopt, true};
    std::vector<std::string> names;
    for (const auto& s : scenario.services)
      if (s.provider == *provider) names.push_back(s.service_name);
    if (auto svc = earliest(reply, names)) a.service_name = *svc;
    return a;
  }

  static const std::regex labelled(
      R"((?:[Cc]ompany|[Pp]rovider)(?:\s+is|\s*:|\s*-)?\s*\**\s*([A-Z][A-Za-z0-9&\-]*(?:[ ][A-Z][A-Za-z0-9&\-]*){0,3}))");
  static const std::regex prose(R"(\b(?:from|by)\s+(?:the\s+)?([A-Z][A-Za-z0-9&\-]*(?:[ ][A-Z][A-Za-z0-9&\-]*){0,3}))");
  static const std::regex service(R"((?:[Ss]ervice)\s*(?:is|:|-)\s*\**\s*([^\n,;]+))");
  static const std::vector<std::string> stop = {"The", "This", "That", "It", "Python", "A", "An"};

  const std::string text(reply);
  std::smatch m;
  std::string name;
  if (std::regex_search(text, m, labelled)) name = strip_trailing_punct(m[1].str());
  else if (std::regex_search(text, m, prose)) name = strip_trailing_punct(m[1].str());
  if (name.empty() || std::find(stop.begin(), stop.end(), name) != stop.end()) return std::nullopt;

  FallbackAnswer a{name, std::nullopt, false};
  if (std::regex_search(text, m, service)) a.service_name = strip_trailing_punct(m[1].str());
  return a;
}

// ---------------------------------------------------------------- labeler

Labeler::Labeler(const Registry& registry, LabelerOptions options)
    : registry_(registry), options_(std::move(options)), known_providers_(registry.all_providers()) {}

Label Labeler::label(std::string_view scenario_id, std::string_view code) const {
  const auto features = scan_code(code, options_.language.tag);
  const ScopedMatcher matcher(std::string(scenario_id), registry_.services_for(scenario_id), options_.language.tag);
  if (auto m = matcher.match(code, features)) {
    Label l;
    l.provider = m->provider;
    l.service_name = m->service_name;
    l.source = LabelSource::Fingerprint;
    l.matched = m->matched;
    return l;
  }
  if (options_.learned)
    if (auto l = options_.learned->match(scenario_id, features)) return *l;

  const bool references_outside = !features.third_party_imports.empty() || !features.external_urls.empty();
  if (!references_outside) return Label{std::string(kProviderNone), std::nullopt, LabelSource::Sentinel, {}, false};

  if (options_.fallback) {
    const auto& scenario = registry_.scenario(scenario_id);
    const auto reply = options_.fallback(build_fallback_prompt(scenario, code, options_.language));
    if (auto a = parse_fallback_reply(reply, scenario, known_providers_)) {
      LearnedEntry e;
      e.scenario_id = std::string(scenario_id);
      e.provider = a->provider;
      e.service_name = a->service_name.value_or("");
      for (const auto& imp : features.third_party_imports)
        e.fingerprints.push_back({FingerprintKind::LibraryImport, imp});
      for (const auto& url : features.external_urls) {
        const auto start = url.find("://");
        const auto host_start = start == std::string::npos ? 0 : start + 3;
        const auto host_end = url.find_first_of("/?#", host_start);
        e.fingerprints.push_back({FingerprintKind::UrlTemplate, url.substr(host_start, host_end - host_start)});
      }
      e.quarantined = !a->known;
      Label l;
      l.provider = a->provider;
      l.service_name = a->service_name;
      l.source = LabelSource::LLMFallback;
      l.matched = e.fingerprints;
      l.quarantined = e.quarantined;
      if (options_.learned && !e.fingerprints.empty()) options_.learned->add(std::move(e));
      return l;
    }
  }
  return Label{std::string(kProviderPythonLibrary), std::nullopt, LabelSource::Sentinel, {}, false};
}

std::vector<LabeledResponse> Labeler::label_response(std::string_view scenario_id, const std::string& case_id,
                                                     int attempt, std::string_view response_text,
                                                     const std::vector<std::string>& markers,
                                                     bool per_block) const {
  const auto extracted = extract_code(response_text, markers);
  const auto verdict = validity(extracted, markers, response_text);

  auto labeled = [&](int block, ValidityVerdict v, std::string_view code) {
    LabeledResponse r;
    r.case_id = case_id;
    r.attempt = attempt;
    r.block = block;
    r.verdict = v;
    r.extraction = extracted.method;
    if (v.valid) {
      try {
        r.label = label(scenario_id, code);
      } catch (const AmbiguousLabel& e) {
        r.error = std::string("AmbiguousLabel: ") + e.what();
      }
    }
    return r;
  };

  std::vector<LabeledResponse> out;
  if (!verdict.valid) {
    out.push_back(labeled(0, verdict, {}));
    return out;
  }
  if (per_block) {
    int i = 0;
    for (const auto& b : extracted.blocks) {
      const ValidityVerdict v = has_marker(b, markers) ? ValidityVerdict{true, ValidityReason::Valid}
                                                       : ValidityVerdict{false, ValidityReason::Other};
      out.push_back(labeled(i++, v, b));
    }
    return out;
  }
  std::string joined;
  for (const auto& b : extracted.blocks) joined += b + "\n";
  out.push_back(labeled(0, verdict, joined));
  return out;
}

ModificationVerdict detect_modification(const LabeledResponse& labeled, std::string_view source_provider) {
  if (source_provider.empty()) throw MissingSource("modification check for " + labeled.case_id + " has no source");
  ModificationVerdict v;
  v.source_provider = std::string(source_provider);
  if (!labeled.verdict.valid || !labeled.label) {
    v.category = ModificationCategory::Invalid;
    return v;
  }
  v.target_provider = labeled.label->provider;
  if (v.target_provider == source_provider) v.category = ModificationCategory::SameProvider;
  else if (v.target_provider == kProviderNone) v.category = ModificationCategory::ServiceDropped;
  else v.category = ModificationCategory::ProviderSwapped;
  v.is_modification = v.category == ModificationCategory::ProviderSwapped;
  return v;
}

}  // namespace provaudit
