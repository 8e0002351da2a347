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

#include "provaudit/matcher.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <utility>

#include "provaudit/errors.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

namespace {

// Top-level standard library modules of CPython 3.10 (public names only).
constexpr std::array kPythonStdlib = {
    "abc", "aifc", "antigravity", "argparse", "array", "ast", "asynchat", "asyncio", "asyncore",
    "atexit", "audioop", "base64", "bdb", "binascii", "binhex", "bisect", "builtins", "bz2",
    "cProfile", "calendar", "cgi", "cgitb", "chunk", "cmath", "cmd", "code", "codecs", "codeop",
    "collections", "colorsys", "compileall", "concurrent", "configparser", "contextlib",
    "contextvars", "copy", "copyreg", "crypt", "csv", "ctypes", "curses", "dataclasses",
    "datetime", "dbm", "decimal", "difflib", "dis", "distutils", "doctest", "email", "encodings",
    "ensurepip", "enum", "errno", "faulthandler", "fcntl", "filecmp", "fileinput", "fnmatch",
    "fractions", "ftplib", "functools", "gc", "genericpath", "getopt", "getpass", "gettext",
    "glob", "graphlib", "grp", "gzip", "hashlib", "heapq", "hmac", "html", "http", "idlelib",
    "imaplib", "imghdr", "imp", "importlib", "inspect", "io", "ipaddress", "itertools", "json",
    "keyword", "lib2to3", "linecache", "locale", "logging", "lzma", "mailbox", "mailcap",
    "marshal", "math", "mimetypes", "mmap", "modulefinder", "msilib", "msvcrt", "multiprocessing",
    "netrc", "nis", "nntplib", "nt", "ntpath", "nturl2path", "numbers", "opcode", "operator",
    "optparse", "os", "ossaudiodev", "pathlib", "pdb", "pickle", "pickletools", "pipes", "pkgutil",
    "platform", "plistlib", "poplib", "posix", "posixpath", "pprint", "profile", "pstats", "pty",
    "pwd", "py_compile", "pyclbr", "pydoc", "pydoc_data", "pyexpat", "queue", "quopri", "random",
    "re", "readline", "reprlib", "resource", "rlcompleter", "runpy", "sched", "secrets", "select",
    "selectors", "shelve", "shlex", "shutil", "signal", "site", "smtpd", "smtplib", "sndhdr",
    "socket", "socketserver", "spwd", "sqlite3", "sre_compile", "sre_constants", "sre_parse",
    "ssl", "stat", "statistics", "string", "stringprep", "struct", "subprocess", "sunau",
    "symtable", "sys", "sysconfig", "syslog", "tabnanny", "tarfile", "telnetlib", "tempfile",
    "termios", "textwrap", "this", "threading", "time", "timeit", "tkinter", "token", "tokenize",
    "trace", "traceback", "tracemalloc", "tty", "turtle", "turtledemo", "types", "typing",
    "unicodedata", "unittest", "urllib", "uu", "uuid", "venv", "warnings", "wave", "weakref",
    "webbrowser", "winreg", "winsound", "wsgiref", "xdrlib", "xml", "xmlrpc", "zipapp", "zipfile",
    "zipimport", "zlib", "zoneinfo"
};

bool is_python_stdlib(std::string_view module) {
  auto top = module.substr(0, module.find('.'));
  return std::binary_search(kPythonStdlib.begin(), kPythonStdlib.end(), top,
                            [](std::string_view a, std::string_view b) { return a < b; });
}

bool is_java_stdlib(std::string_view module) {
  for (std::string_view prefix : {"java.", "javax.", "jdk.", "sun.", "org.w3c.", "org.xml."})
    if (module.substr(0, prefix.size()) == prefix) return true;
  return false;
}

std::vector<std::string> split_names(std::string_view list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    auto item = trim(list.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (auto as = item.find(" as "); as != std::string::npos) item = trim(item.substr(0, as));
    if (!item.empty() && item != "(" && item != ")" && item != "\\") {
      std::erase_if(item, [](char c) { return c == '(' || c == ')' || c == '\\'; });
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool starts_with_word(std::string_view line, std::string_view word) {
  return line.substr(0, word.size()) == word &&
         (line.size() == word.size() || std::isspace(static_cast<unsigned char>(line[word.size()])));
}

void scan_python_imports(std::string_view code, CodeFeatures& f) {
  for (const auto& raw : split_lines(code)) {
    auto line = trim(raw);
    if (auto hash = line.find('#'); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (starts_with_word(line, "import")) {
      for (auto& name : split_names(std::string_view(line).substr(6))) {
        f.imports.push_back(name);
        if (!is_python_stdlib(name)) f.third_party_imports.push_back(name);
      }
    } else if (starts_with_word(line, "from")) {
      auto rest = std::string_view(line).substr(4);
      auto imp = rest.find(" import ");
      if (imp == std::string_view::npos) continue;
      auto module = trim(rest.substr(0, imp));
      if (module.empty()) continue;
      const bool relative = module.front() == '.';
      f.imports.push_back(module);
      if (!relative && !is_python_stdlib(module)) f.third_party_imports.push_back(module);
      if (relative) continue;
      for (auto& name : split_names(rest.substr(imp + 8))) {
        if (name == "*") continue;
        f.imports.push_back(module + "." + name);
      }
    }
  }
}

void scan_java_imports(std::string_view code, CodeFeatures& f) {
  for (const auto& raw : split_lines(code)) {
    auto line = trim(raw);
    if (!starts_with_word(line, "import")) continue;
    auto rest = trim(std::string_view(line).substr(6));
    if (starts_with_word(rest, "static")) rest = trim(std::string_view(rest).substr(6));
    if (!rest.empty() && rest.back() == ';') rest.pop_back();
    rest = trim(rest);
    if (rest.size() > 2 && rest.substr(rest.size() - 2) == ".*") rest.resize(rest.size() - 2);
    if (rest.empty()) continue;
    f.imports.push_back(rest);
    if (!is_java_stdlib(rest)) f.third_party_imports.push_back(rest);
  }
}

bool is_url_delimiter(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '\'' || c == '"' || c == '`' || c == '<' ||
         c == '>' || c == '(' || c == ')' || c == '[' || c == ']' || c == '{' || c == '}' || c == ',';
}

bool is_local_url(std::string_view url) {
  auto host_start = url.find("://");
  if (host_start == std::string_view::npos) return false;
  auto host = url.substr(host_start + 3);
  host = host.substr(0, host.find_first_of("/:?#"));
  const auto h = to_lower(host);
  return h == "localhost" || h.rfind("127.", 0) == 0 || h == "0.0.0.0" || h.empty();
}

void scan_urls(std::string_view code, CodeFeatures& f) {
  const auto lower = to_lower(code);
  std::size_t pos = 0;
  while (pos < lower.size()) {
    auto http = lower.find("http", pos);
    if (http == std::string::npos) break;
    std::size_t after = http + 4;
    if (after < lower.size() && lower[after] == 's') ++after;
    if (lower.compare(after, 3, "://") != 0 || (http > 0 && is_ident_char(lower[http - 1]))) {
      pos = http + 4;
      continue;
    }
    std::size_t end = after + 3;
    while (end < code.size() && !is_url_delimiter(code[end])) ++end;
    std::string url(code.substr(http, end - http));
    while (!url.empty() && (url.back() == '.' || url.back() == ';')) url.pop_back();
    if (url.size() > static_cast<std::size_t>(after + 3 - http)) {
      f.urls.push_back(url);
      if (!is_local_url(url)) f.external_urls.push_back(url);
    }
    pos = end;
  }
}

}  // namespace

CodeFeatures scan_code(std::string_view code, std::string_view language_tag) {
  CodeFeatures f;
  if (to_lower(language_tag) == "java")
    scan_java_imports(code, f);
  else
    scan_python_imports(code, f);
  scan_urls(code, f);
  return f;
}

bool import_matches(std::string_view module, std::string_view pattern) {
  if (pattern.empty()) return false;
  if (module == pattern) return true;
  return module.size() > pattern.size() && module.substr(0, pattern.size()) == pattern &&
         module[pattern.size()] == '.';
}

bool url_matches(std::string_view url, std::string_view pattern) {
  const auto u = to_lower(url);
  const auto p = to_lower(pattern);
  const auto star = p.find('*');
  if (star == std::string::npos) return u.find(p) != std::string::npos;
  const std::string_view prefix = std::string_view(p).substr(0, star);
  const std::string_view suffix = std::string_view(p).substr(star + 1);
  std::size_t from = 0;
  while (true) {
    const auto at = prefix.empty() ? from : u.find(prefix, from);
    if (at == std::string::npos || at > u.size()) return false;
    const auto wild_begin = at + prefix.size();
    if (suffix.empty()) return true;
    const auto sfx = u.find(suffix, wild_begin);
    if (sfx != std::string::npos) {
      const auto gap = std::string_view(u).substr(wild_begin, sfx - wild_begin);
      if (std::none_of(gap.begin(), gap.end(), [](unsigned char c) { return std::isspace(c); })) return true;
    }
    if (prefix.empty()) return false;
    from = at + 1;
  }
}

ScopedMatcher::ScopedMatcher(std::string scenario_id, std::vector<ServiceEntry> services,
                             std::string language_tag)
    : scenario_id_(std::move(scenario_id)),
      services_(std::move(services)),
      language_tag_(std::move(language_tag)) {}

bool ScopedMatcher::fingerprint_hits(const Fingerprint& fp, std::string_view code,
                                     const CodeFeatures& features) const {
  switch (fp.kind) {
    case FingerprintKind::LibraryImport:
      return std::any_of(features.imports.begin(), features.imports.end(),
                         [&](const std::string& m) { return import_matches(m, fp.pattern); });
    case FingerprintKind::UrlTemplate:
      return std::any_of(features.urls.begin(), features.urls.end(),
                         [&](const std::string& u) { return url_matches(u, fp.pattern); });
    case FingerprintKind::Keyword:
      return contains_word(code, fp.pattern, /*case_insensitive=*/true);
  }
  return false;
}

std::optional<MatchedService> ScopedMatcher::match(std::string_view code) const {
  return match(code, scan_code(code, language_tag_));
}

std::optional<MatchedService> ScopedMatcher::match(std::string_view code,
                                                   const CodeFeatures& features) const {
  for (auto tier : {FingerprintKind::LibraryImport, FingerprintKind::UrlTemplate, FingerprintKind::Keyword}) {
    std::vector<MatchedService> hits;
    for (std::size_t i = 0; i < services_.size(); ++i) {
      const auto& svc = services_[i];
      MatchedService m{i, svc.service_name, svc.provider, tier, {}};
      for (const auto& fp : svc.fingerprints)
        if (fp.kind == tier && fingerprint_hits(fp, code, features)) m.matched.push_back(fp);
      if (!m.matched.empty()) hits.push_back(std::move(m));
    }
    if (hits.empty()) continue;
    std::set<std::string> providers;
    for (const auto& h : hits) providers.insert(h.provider);
    if (providers.size() > 1) {
      std::string names;
      for (const auto& p : providers) names += (names.empty() ? "" : ", ") + p;
      throw AmbiguousLabel("scenario '" + scenario_id_ + "': " + std::string(to_string(tier)) +
                           " fingerprints of several providers match (" + names + ")");
    }
    return hits.front();
  }
  return std::nullopt;
}

}  // namespace provaudit
