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

#include "provaudit/mutation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "provaudit/errors.hpp"
#include "provaudit/rng.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;

json MutationResult::to_json() const {
  json edits = json::array();
  for (const auto& e : log) edits.push_back({{"line", e.line}, {"text", e.text}});
  return {{"kind", kind}, {"rng_seed", rng_seed}, {"edits", std::move(edits)}};
}

namespace {

struct LineInfo {
  int depth_start = 0;
  int depth_end = 0;
  bool in_string_start = false;  // inside a triple-quoted string / block comment
  bool in_string_end = false;
  bool blank = true;
  bool comment_only = false;
  std::string code;  // text with any trailing comment removed, right-trimmed
  std::size_t indent = 0;
  std::string indent_text;
};

bool is_java(std::string_view tag) { return to_lower(tag) == "java"; }

/// Lexes just enough to know bracket depth and string/comment state per line.
std::vector<LineInfo> analyze_lines(const std::vector<std::string>& lines, bool java) {
  std::vector<LineInfo> out(lines.size());
  int depth = 0;
  char triple = 0;  // quote char of an open python triple string
  bool block_comment = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    auto& info = out[i];
    info.depth_start = depth;
    info.in_string_start = triple != 0 || block_comment;
    std::size_t k = 0;
    while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
    info.indent = k;
    info.indent_text = line.substr(0, k);
    info.blank = k == line.size();
    std::string code;
    bool saw_code = false;
    for (std::size_t c = 0; c < line.size(); ++c) {
      const char ch = line[c];
      if (triple) {
        if (line.compare(c, 3, std::string(3, triple)) == 0) {
          triple = 0;
          c += 2;
        }
        code.push_back(ch);
        continue;
      }
      if (block_comment) {
        if (line.compare(c, 2, "*/") == 0) {
          block_comment = false;
          ++c;
        }
        continue;
      }
      if (!java && ch == '#') break;
      if (java && line.compare(c, 2, "//") == 0) break;
      if (java && line.compare(c, 2, "/*") == 0) {
        block_comment = true;
        ++c;
        continue;
      }
      if (!java && (ch == '"' || ch == '\'') && line.compare(c, 3, std::string(3, ch)) == 0) {
        triple = ch;
        code.append(3, ch);
        c += 2;
        saw_code = true;
        continue;
      }
      if (ch == '"' || ch == '\'') {
        code.push_back(ch);
        std::size_t e = c + 1;
        while (e < line.size() && line[e] != ch) {
          if (line[e] == '\\') ++e;
          ++e;
        }
        code.append(line, c + 1, std::min(e, line.size()) - (c + 1));
        if (e < line.size()) code.push_back(ch);
        c = e;
        saw_code = true;
        continue;
      }
      if (ch == '(' || ch == '[' || (!java && ch == '{')) ++depth;
      if (ch == ')' || ch == ']' || (!java && ch == '}')) depth = std::max(0, depth - 1);
      if (!std::isspace(static_cast<unsigned char>(ch))) saw_code = true;
      code.push_back(ch);
    }
    while (!code.empty() && std::isspace(static_cast<unsigned char>(code.back()))) code.pop_back();
    info.code = code;
    info.comment_only = !info.blank && !saw_code && !info.in_string_start;
    info.depth_end = depth;
    info.in_string_end = triple != 0 || block_comment;
  }
  return out;
}

bool is_statement(const LineInfo& l) { return !l.blank && !l.comment_only && !l.in_string_start; }

bool starts_with_token(std::string_view text, std::string_view token) {
  return text.substr(0, token.size()) == token &&
         (text.size() == token.size() || !is_ident_char(text[token.size()]));
}

std::string stripped(const LineInfo& l) { return trim(l.code); }

bool is_import_line(const LineInfo& l, bool java) {
  const auto s = stripped(l);
  if (java) return starts_with_token(s, "import") || starts_with_token(s, "package");
  return starts_with_token(s, "import") || starts_with_token(s, "from");
}

bool is_block_header(const LineInfo& l, bool java) {
  const auto s = stripped(l);
  if (s.empty()) return false;
  if (java) return s.find('{') != std::string::npos || s.find('}') != std::string::npos || s.front() == '@';
  return s.back() == ':' || s.front() == '@' || starts_with_token(s, "def") || starts_with_token(s, "class");
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  return std::all_of(s.begin(), s.end(), is_ident_char);
}

/// Names bound by a simple assignment on this line.
std::vector<std::string> defined_names(const LineInfo& l, bool java) {
  const auto s = stripped(l);
  int depth = 0;
  std::size_t eq = std::string::npos;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == '"' || c == '\'') return {};
    if (c == '=' && depth == 0) {
      const char prev = i ? s[i - 1] : ' ';
      const char next = i + 1 < s.size() ? s[i + 1] : ' ';
      if (next == '=' || std::string_view("=!<>+-*/%&|^:").find(prev) != std::string_view::npos) return {};
      eq = i;
      break;
    }
  }
  if (eq == std::string::npos) return {};
  std::string lhs = trim(std::string_view(s).substr(0, eq));
  std::vector<std::string> names;
  if (java) {
    auto end = lhs.size();
    auto start = end;
    while (start > 0 && is_ident_char(lhs[start - 1])) --start;
    auto name = lhs.substr(start, end - start);
    if (is_identifier(name)) names.push_back(name);
    return names;
  }
  if (auto colon = lhs.find(':'); colon != std::string::npos) lhs = trim(lhs.substr(0, colon));
  std::size_t start = 0;
  while (start <= lhs.size()) {
    auto comma = lhs.find(',', start);
    auto part = trim(std::string_view(lhs).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    std::erase_if(part, [](char c) { return c == '(' || c == ')' || c == '[' || c == ']' || c == '*'; });
    part = trim(part);
    if (part.rfind("self.", 0) == 0) part = part.substr(5);
    if (is_identifier(part)) names.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return names;
}

std::size_t next_statement(const std::vector<LineInfo>& info, std::size_t from) {
  for (std::size_t j = from; j < info.size(); ++j)
    if (is_statement(info[j])) return j;
  return info.size();
}

std::size_t prev_statement(const std::vector<LineInfo>& info, std::size_t before) {
  for (std::size_t j = before; j-- > 0;)
    if (is_statement(info[j])) return j;
  return info.size();
}

std::string fresh_name(Rng& rng, std::set<std::string>& taken) {
  static constexpr char kHex[] = "0123456789abcdef";
  while (true) {
    std::string name = "_dc_";
    auto bits = rng.next();
    for (int i = 0; i < 6; ++i, bits >>= 4) name.push_back(kHex[bits & 0xf]);
    if (taken.insert(name).second) return name;
  }
}

std::vector<std::string> dead_block(DeadCodeShape shape, Rng& rng, std::set<std::string>& taken, bool java) {
  const auto a = fresh_name(rng, taken);
  const auto b = fresh_name(rng, taken);
  const auto outer = std::to_string(3 + rng.uniform_index(8));
  const auto inner = std::to_string(10 * (1 + rng.uniform_index(10)));
  if (java) {
    switch (shape) {
      case DeadCodeShape::NoOpLoop:
        return {"for (int " + a + " = 0; " + a + " < " + outer + "; " + a + "++) {",
                "    for (int " + b + " = 0; " + b + " < " + inner + "; " + b + "++) {", "    }", "}"};
      case DeadCodeShape::UnreachableBranch:
        return {"if (false) {", "    int " + a + " = " + outer + ";", "}"};
      case DeadCodeShape::UnusedAssignment:
        return {"int " + a + " = " + outer + " * " + inner + ";"};
    }
  }
  switch (shape) {
    case DeadCodeShape::NoOpLoop:
      return {"for " + a + " in range(" + outer + "):", "    for " + b + " in range(" + inner + "):",
              "        pass"};
    case DeadCodeShape::UnreachableBranch:
      return {"if False:", "    " + a + " = " + outer};
    case DeadCodeShape::UnusedAssignment:
      return {a + " = [" + b + " * " + outer + " for " + b + " in range(" + inner + ")]"};
  }
  return {};
}

}  // namespace

std::vector<std::string> identifiers_in(std::string_view code) {
  std::set<std::string> ids;
  std::size_t i = 0;
  while (i < code.size()) {
    if (is_ident_char(code[i]) && !std::isdigit(static_cast<unsigned char>(code[i]))) {
      std::size_t j = i;
      while (j < code.size() && is_ident_char(code[j])) ++j;
      ids.emplace(code.substr(i, j - i));
      i = j;
    } else if (is_ident_char(code[i])) {
      while (i < code.size() && is_ident_char(code[i])) ++i;
    } else {
      ++i;
    }
  }
  return {ids.begin(), ids.end()};
}

MutationResult inject_bug(std::string_view seed, std::uint64_t rng_seed, const BugOptions& options) {
  const bool java = is_java(options.language_tag);
  const auto lines = split_lines(seed);
  const auto info = analyze_lines(lines, java);

  std::size_t statements = 0;
  for (const auto& l : info) statements += is_statement(l) ? 1 : 0;
  if (statements < 3)
    throw SeedTooSmall("seed has " + std::to_string(statements) + " statement lines; at least 3 required");

  std::vector<std::size_t> candidates;
  std::vector<double> weights;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = info[i];
    if (!is_statement(l) || l.in_string_end || l.depth_start != l.depth_end) continue;
    if (is_import_line(l, java) || is_block_header(l, java)) continue;
    if (!java) {
      // Deleting the only statement of a block would leave an empty suite.
      const auto prev = prev_statement(info, i);
      const auto next = next_statement(info, i + 1);
      const bool opens_block = prev < info.size() && !stripped(info[prev]).empty() &&
                               stripped(info[prev]).back() == ':' && info[prev].depth_end == 0;
      if (opens_block && (next == info.size() || info[next].indent < l.indent)) continue;
    }
    double w = 1.0;
    for (const auto& name : defined_names(l, java)) {
      bool used_later = false;
      for (std::size_t j = i + 1; j < lines.size() && !used_later; ++j)
        used_later = contains_word(lines[j], name, /*case_insensitive=*/false);
      if (used_later) {
        w = options.def_use_weight;
        break;
      }
    }
    candidates.push_back(i);
    weights.push_back(w);
  }
  if (candidates.empty()) throw SeedTooSmall("seed has no deletable statement lines");

  const std::size_t per = std::max<std::size_t>(1, options.lines_per_deletion);
  std::size_t k = std::min(options.max_deletions, (statements + per - 1) / per);
  k = std::clamp<std::size_t>(k, 1, candidates.size());

  Rng rng(rng_seed);
  std::vector<std::size_t> chosen;
  for (std::size_t draw = 0; draw < k; ++draw) {
    double total = 0;
    for (double w : weights) total += w;
    double u = rng.uniform01() * total;
    std::size_t pick = 0;
    for (; pick + 1 < weights.size(); ++pick) {
      if (u < weights[pick]) break;
      u -= weights[pick];
    }
    chosen.push_back(candidates[pick]);
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
    weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  std::sort(chosen.begin(), chosen.end());

  MutationResult result;
  result.kind = "bug";
  result.rng_seed = rng_seed;
  std::vector<std::string> kept;
  std::size_t c = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (c < chosen.size() && chosen[c] == i) {
      result.log.push_back({i, lines[i]});
      ++c;
    } else {
      kept.push_back(lines[i]);
    }
  }
  result.mutant = join_lines(kept, !seed.empty() && seed.back() == '\n');
  return result;
}

std::vector<InsertionSite> dead_code_sites(std::string_view seed, std::string_view language_tag) {
  const bool java = is_java(language_tag);
  const auto lines = split_lines(seed);
  const auto info = analyze_lines(lines, java);
  std::vector<InsertionSite> sites;

  int brace_depth = 0;  // java only
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = info[i];
    const int depth_here = brace_depth;
    if (java) {
      for (char ch : l.code) {
        if (ch == '{') ++brace_depth;
        if (ch == '}') --brace_depth;
      }
    }
    if (!is_statement(l) || l.depth_start != 0) continue;
    const auto s = stripped(l);
    const auto prev = prev_statement(info, i);
    if (prev < info.size()) {
      const auto p = stripped(info[prev]);
      if (!p.empty() && p.back() == '\\') continue;
      if (!java && !p.empty() && p.front() == '@') continue;
      if (info[prev].in_string_end) continue;
    }
    if (java) {
      if (depth_here < 2 || s.front() == '}' || s.front() == '.' || starts_with_token(s, "else") ||
          starts_with_token(s, "catch") || starts_with_token(s, "finally"))
        continue;
      if (prev < info.size()) {
        const auto p = stripped(info[prev]);
        if (p.empty() || (p.back() != ';' && p.back() != '{' && p.back() != '}')) continue;
      }
    } else {
      if (starts_with_token(s, "else") || starts_with_token(s, "elif") || starts_with_token(s, "except") ||
          starts_with_token(s, "finally") || s.front() == ')' || s.front() == ']' || s.front() == '}')
        continue;
    }
    sites.push_back({i, l.indent_text});
  }
  if (!java) sites.push_back({lines.size(), ""});
  return sites;
}

MutationResult inject_dead_code(std::string_view seed, std::uint64_t rng_seed, const DeadCodeOptions& options) {
  if (trim(seed).empty()) throw SeedTooSmall("dead-code injection needs a non-empty seed");
  const bool java = is_java(options.language_tag);
  auto lines = split_lines(seed);
  const auto sites = dead_code_sites(seed, options.language_tag);
  if (sites.empty()) throw SeedTooSmall("seed has no statement boundary for dead code");

  auto taken_vec = identifiers_in(seed);
  std::set<std::string> taken(taken_vec.begin(), taken_vec.end());
  Rng rng(rng_seed);

  struct Planned {
    InsertionSite site;
    std::vector<std::string> block;
  };
  std::vector<Planned> planned;
  const std::size_t blocks = std::max<std::size_t>(1, options.blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    InsertionSite site;
    if (options.site) {
      auto it = std::find_if(sites.begin(), sites.end(),
                             [&](const InsertionSite& s) { return s.before_line == *options.site; });
      if (it == sites.end())
        throw SeedTooSmall("line " + std::to_string(*options.site) + " is not a valid insertion site");
      site = *it;
    } else {
      site = sites[rng.uniform_index(sites.size())];
    }
    const auto shape = options.shape ? *options.shape : static_cast<DeadCodeShape>(rng.uniform_index(3));
    planned.push_back({site, dead_block(shape, rng, taken, java)});
  }

  // Insert bottom-up so earlier site indices stay valid; equal sites keep draw order.
  std::stable_sort(planned.begin(), planned.end(),
                   [](const Planned& a, const Planned& b) { return a.site.before_line > b.site.before_line; });
  std::vector<bool> inserted_flags(lines.size(), false);
  for (const auto& p : planned) {
    std::vector<std::string> indented;
    for (const auto& l : p.block) indented.push_back(p.site.indent + l);
    const auto at = static_cast<std::ptrdiff_t>(p.site.before_line);
    lines.insert(lines.begin() + at, indented.begin(), indented.end());
    inserted_flags.insert(inserted_flags.begin() + at, indented.size(), true);
  }

  MutationResult result;
  result.kind = "dead_code";
  result.rng_seed = rng_seed;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (inserted_flags[i]) result.log.push_back({i, lines[i]});
  result.mutant = join_lines(lines, seed.back() == '\n');
  return result;
}

}  // namespace provaudit
