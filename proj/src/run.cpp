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

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <fstream>
#include <set>
#include <tuple>

#include "provaudit/errors.hpp"
#include "provaudit/orchestrator.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

using nlohmann::json;
namespace fs = std::filesystem;

RunLock::RunLock(const fs::path& run_dir) : path_(run_dir / ".lock") {
  fs::create_directories(run_dir);
  for (int tries = 0; tries < 2; ++tries) {
    const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL, 0644);
    if (fd >= 0) {
      const auto pid = std::to_string(::getpid()) + "\n";
      const auto n = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      if (n != static_cast<ssize_t>(pid.size())) throw Error("cannot write lock file " + path_.string());
      return;
    }
    if (errno != EEXIST) throw Error("cannot create lock file " + path_.string());
    long owner = 0;
    try {
      owner = std::stol(trim(read_file(path_)));
    } catch (const std::exception&) {
      owner = 0;
    }
    const bool alive = owner > 0 && (::kill(static_cast<pid_t>(owner), 0) == 0 || errno == EPERM);
    if (alive) throw RunLocked("run directory is locked by process " + std::to_string(owner));
    fs::remove(path_);
  }
  throw RunLocked("could not take over the lock " + path_.string());
}

RunLock::~RunLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

std::string default_run_id(const AuditConfig& config) {
  if (!config.run_id.empty()) return config.run_id;
  return "run-" + sha256_hex(config.to_manifest_json().dump()).substr(0, 12);
}

namespace {

std::string group_of(const PromptCase& c, const std::string& phase) {
  return phase == "rank" ? "rank" : std::string(to_string(c.task));
}

fs::path response_file(const fs::path& run_dir, const std::string& backend, const std::string& group,
                       const std::string& scenario) {
  return run_dir / backend / group / (scenario + ".jsonl");
}

// Parses a JSONL response file. A torn final line (a crash mid-write) is cut
// off so that appends resume on a clean boundary.
std::vector<RawResponse> read_response_file(const fs::path& path, bool repair) {
  std::vector<RawResponse> out;
  if (!fs::exists(path)) return out;
  const auto text = read_file(path);
  std::size_t pos = 0;
  std::size_t good_end = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const bool complete_line = nl != std::string::npos;
    const auto line = text.substr(pos, (complete_line ? nl : text.size()) - pos);
    if (!trim(line).empty()) {
      try {
        out.push_back(RawResponse::from_json(json::parse(line)));
      } catch (const json::exception& e) {
        if (complete_line) throw ParseError(path.string() + ": corrupt record: " + e.what());
        break;
      }
    }
    if (!complete_line) break;
    pos = nl + 1;
    good_end = pos;
  }
  if (repair && good_end < text.size()) {
    fs::resize_file(path, good_end);
    if (!out.empty() && good_end < text.size()) {
      // The last parsed record may sit on the torn line; re-read to be exact.
      return read_response_file(path, false);
    }
  }
  return out;
}

std::string plan_jsonl(const std::vector<PromptCase>& cases) {
  std::string s;
  for (const auto& c : cases) s += to_json(c).dump() + "\n";
  return s;
}

std::string phase_file(const std::string& phase, const std::string& main_name) {
  return phase == "main" ? main_name : phase + "_" + main_name;
}

}  // namespace

RunOutcome run(const Registry& registry, const AuditConfig& config, const std::vector<PromptCase>& cases,
               const fs::path& run_dir, const RunOptions& options, const Plan* plan_meta) {
  if (cases.empty()) throw EmptyPlan("nothing to run");
  RunLock lock(run_dir);
  const auto& phase = options.phase;

  const auto plan_text = plan_jsonl(cases);
  const auto plan_sha = sha256_hex(plan_text);
  const auto manifest_path = run_dir / phase_file(phase, "manifest.json");
  if (fs::exists(manifest_path)) {
    const auto m = json::parse(read_file(manifest_path));
    if (m.value("plan_sha256", "") != plan_sha)
      throw ValidationError(run_dir.string() + " holds a different plan; use a fresh run directory");
  } else {
    json m = {{"run_id", run_dir.filename().string()},
              {"phase", phase},
              {"tool_version", kToolVersion},
              {"registry_sha256", sha256_hex(registry.to_json().dump())},
              {"config", config.to_manifest_json()},
              {"plan_sha256", plan_sha},
              {"plan_cases", cases.size()},
              {"started_at", utc_timestamp()}};
    m["plan_meta"] = plan_meta ? plan_meta->meta_json() : json(nullptr);
    write_file_atomic(run_dir / "registry.json", registry.to_json().dump(2) + "\n");
    write_file_atomic(run_dir / phase_file(phase, "plan.jsonl"), plan_text);
    if (plan_meta && !plan_meta->mutants.empty()) {
      std::string lines;
      for (const auto& [id, mr] : plan_meta->mutants) {
        auto j = mr.to_json();
        j["case_id"] = id;
        lines += j.dump() + "\n";
      }
      write_file_atomic(run_dir / "mutants.jsonl", lines);
    }
    // The manifest goes last among the setup files and is never rewritten.
    write_file_atomic(manifest_path, m.dump(2) + "\n");
  }

  RunOutcome out;
  out.run_dir = run_dir;
  for (const auto& c : cases) out.expected += static_cast<std::int64_t>(c.repeat_budget) * static_cast<std::int64_t>(config.backends.size());

  const auto status_path = run_dir / phase_file(phase, "run_status.json");
  auto write_status = [&](const std::string& state) {
    json s = {{"phase", phase},
              {"state", state},
              {"expected", out.expected},
              {"present_before", out.present_before},
              {"received", out.received},
              {"present", out.present_before + out.received},
              {"spent", out.spent},
              {"errors", out.errors},
              {"updated_at", utc_timestamp()}};
    write_file_atomic(status_path, s.dump(2) + "\n");
  };
  if (config.backends.empty()) out.errors.push_back("no backends configured");

  write_status("running");
  bool stopped = !out.errors.empty();
  try {
    for (const auto& backend : config.backends) {
      // Attempts already on disk, per case.
      std::map<std::string, std::set<int>> have;
      std::set<fs::path> files;
      for (const auto& c : cases) files.insert(response_file(run_dir, backend.backend_id, group_of(c, phase), c.scenario_id));
      for (const auto& f : files)
        for (const auto& r : read_response_file(f, true)) have[r.case_id].insert(r.attempt);
      for (const auto& c : cases)
        for (int a : have[c.case_id])
          if (a < c.repeat_budget) ++out.present_before;

      GatewayOptions gopts;
      gopts.cache_enabled = config.cache_enabled;
      gopts.cache_dir = cache_dir_from_env();
      gopts.sleep = options.sleep;
      Gateway gw(backend, options.transport ? options.transport(backend) : make_transport(backend), gopts);

      for (const auto& c : cases) {
        std::vector<int> missing;
        for (int a = 0; a < c.repeat_budget; ++a)
          if (!have[c.case_id].count(a)) missing.push_back(a);
        if (missing.empty()) continue;
        const auto path = response_file(run_dir, backend.backend_id, group_of(c, phase), c.scenario_id);
        fs::create_directories(path.parent_path());
        std::ofstream file(path, std::ios::app | std::ios::binary);
        if (!file) throw Error("cannot open " + path.string());
        RepeatResult rr;
        try {
          rr = gw.query_attempts(c, missing, [&](const RawResponse& r) {
            file << r.to_json().dump() << '\n';
            file.flush();
            if (!file) throw Error("write failed on " + path.string());
            ++out.received;
            if (options.after_response) options.after_response(r);
          });
        } catch (const AuthMissing& e) {
          out.errors.push_back(backend.backend_id + ": " + e.what());
          stopped = true;
          break;
        } catch (const TransportError& e) {
          out.errors.push_back(backend.backend_id + ": " + e.what());
          stopped = true;
          break;
        } catch (const MockMiss& e) {
          out.errors.push_back(backend.backend_id + ": " + e.what());
          stopped = true;
          break;
        }
        if (rr.truncated) {
          out.errors.push_back(backend.backend_id + ": request budget exhausted");
          stopped = true;
          break;
        }
      }
      out.spent[backend.backend_id] = gw.spent();
    }
  } catch (...) {
    write_status("incomplete");
    throw;
  }
  out.complete = !stopped && out.present_before + out.received == out.expected;
  write_status(out.complete ? "complete" : "incomplete");
  return out;
}

RunOutcome plan_and_run(const Registry& registry, const AuditConfig& config, const fs::path& run_dir,
                        const RunOptions& options) {
  std::shared_ptr<Gateway> generator;
  if (config.seeds.mode == "generate" && !config.seeds.generator_backend.empty()) {
    const auto& b = config.backend(config.seeds.generator_backend);
    GatewayOptions g;
    g.cache_enabled = config.cache_enabled;
    g.cache_dir = cache_dir_from_env();
    g.sleep = options.sleep;
    generator = std::make_shared<Gateway>(b, options.transport ? options.transport(b) : make_transport(b), g);
  }
  const auto p = plan(registry, config, seed_source(config, generator));
  return run(registry, config, p.cases, run_dir, options, &p);
}

std::vector<RawResponse> load_responses(const fs::path& run_dir, const std::string& phase) {
  const auto manifest_path = run_dir / phase_file(phase, "manifest.json");
  if (!fs::exists(manifest_path)) throw MissingRunData(run_dir.string() + " has no " + manifest_path.filename().string());
  const auto manifest = json::parse(read_file(manifest_path));
  std::vector<RawResponse> out;
  for (const auto& b : manifest.at("config").at("backends")) {
    const auto dir = run_dir / b.at("backend_id").get<std::string>();
    if (!fs::exists(dir)) continue;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      const auto name = e.path().filename().string();
      if (name.size() < 6 || name.substr(name.size() - 6) != ".jsonl") continue;
      if (name.find(".labeled.") != std::string::npos) continue;
      const bool rank_file = e.path().parent_path().filename() == "rank";
      if ((phase == "rank") != rank_file) continue;
      files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
      for (auto& r : read_response_file(f, false)) out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const RawResponse& a, const RawResponse& b) {
    return std::tie(a.backend_id, a.case_id, a.attempt) < std::tie(b.backend_id, b.case_id, b.attempt);
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const RawResponse& a, const RawResponse& b) {
                          return a.backend_id == b.backend_id && a.case_id == b.case_id && a.attempt == b.attempt;
                        }),
            out.end());
  return out;
}

}  // namespace provaudit
