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

// Python bindings. JSON documents cross the boundary as strings; the Python
// package decodes them with the standard json module.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "provaudit/analyzer.hpp"
#include "provaudit/errors.hpp"
#include "provaudit/mutation.hpp"
#include "provaudit/orchestrator.hpp"
#include "provaudit/stats.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace provaudit;

namespace {

AuditConfig config_with_mock(const fs::path& config_path, const std::optional<fs::path>& mock) {
  auto c = load_config(config_path);
  if (mock) {
    for (auto& b : c.backends) {
      b.kind = "mock";
      b.mock_script = nullptr;
      b.mock_script_path = fs::absolute(*mock).string();
      b.auth_env.clear();
      b.backoff = std::chrono::milliseconds(0);
    }
  }
  c.validate();
  return c;
}

py::dict label_dict(const Label& l) {
  py::dict d;
  d["provider"] = l.provider;
  d["service_name"] = l.service_name;
  d["source"] = std::string(to_string(l.source));
  d["quarantined"] = l.quarantined;
  return d;
}

py::tuple test_tuple(const TestResult& r) { return py::make_tuple(r.statistic, r.p_value); }

}  // namespace

PYBIND11_MODULE(_provaudit, m) {
  m.doc() = "Provider-bias audit core";

  // Translators run newest first, so the subclass is registered after its base.
  const auto& error = py::register_exception<Error>(m, "AuditError");
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());

  py::class_<Registry>(m, "Registry")
      .def_static("load", &load_registry, py::arg("path"), py::arg("default_language") = "python")
      .def("scenario_ids",
           [](const Registry& r) {
             std::vector<std::string> ids;
             for (const auto& s : r.scenarios()) ids.push_back(s.id);
             return ids;
           })
      .def("requirement_ids",
           [](const Registry& r, const std::string& scenario) {
             std::vector<std::string> ids;
             for (const auto& q : r.scenario(scenario).requirements) ids.push_back(q.id);
             return ids;
           })
      .def("providers", [](const Registry& r, const std::string& scenario) { return r.scenario(scenario).providers(); })
      .def("label",
           [](const Registry& r, const std::string& scenario, const std::string& code) {
             return label_dict(Labeler(r).label(scenario, code));
           },
           py::arg("scenario"), py::arg("code"))
      .def("render_prompt",
           [](const Registry& r, const std::string& task, const std::string& scenario, const std::string& requirement,
              std::optional<std::string> code) {
             const auto& sc = r.scenario(scenario);
             return render_prompt(task_kind_from_string(task), sc, sc.requirement(requirement), code);
           },
           py::arg("task"), py::arg("scenario"), py::arg("requirement"), py::arg("code") = py::none())
      .def("selftest",
           [](const Registry& r, const fs::path& corpus) {
             const auto res = selftest(r, corpus);
             return py::make_tuple(res.passed(), res.cases.size());
           },
           py::arg("corpus_dir"))
      .def("to_json", [](const Registry& r) { return r.to_json().dump(); });

  m.def("gini", py::overload_cast<const std::vector<std::int64_t>&>(&gini), py::arg("counts"));
  m.def("modification_ratio",
        [](std::int64_t modified, std::int64_t valid, int decimals) {
          return Percentage{modified, valid}.format(decimals);
        },
        py::arg("modified"), py::arg("valid"), py::arg("decimals") = 2);
  m.def("welch_t", [](const std::vector<double>& a, const std::vector<double>& b) { return test_tuple(welch_t(a, b)); });
  m.def("chi_square", [](const std::vector<std::vector<std::int64_t>>& t) {
    return test_tuple(chi_square_independence(t));
  });
  m.def("spearman", [](const std::vector<double>& a, const std::vector<double>& b) { return test_tuple(spearman(a, b)); });

  m.def("inject_bug", [](const std::string& seed, std::uint64_t rng_seed) { return inject_bug(seed, rng_seed).mutant; },
        py::arg("seed"), py::arg("rng_seed"));
  m.def("inject_dead_code",
        [](const std::string& seed, std::uint64_t rng_seed) { return inject_dead_code(seed, rng_seed).mutant; },
        py::arg("seed"), py::arg("rng_seed"));

  m.def("plan",
        [](const Registry& reg, const fs::path& config, std::optional<fs::path> mock) {
          const auto c = config_with_mock(config, mock);
          std::string out;
          py::gil_scoped_release release;
          for (const auto& pc : plan(reg, c, seed_files(c)).cases) out += to_json(pc).dump() + "\n";
          return out;
        },
        py::arg("registry"), py::arg("config"), py::arg("mock") = py::none());
  m.def("run",
        [](const Registry& reg, const fs::path& config, const fs::path& run_dir, std::optional<fs::path> mock) {
          const auto c = config_with_mock(config, mock);
          RunOutcome o;
          {
            py::gil_scoped_release release;
            o = plan_and_run(reg, c, run_dir);
          }
          py::dict d;
          d["complete"] = o.complete;
          d["expected"] = o.expected;
          d["present_before"] = o.present_before;
          d["received"] = o.received;
          d["spent"] = o.spent;
          d["errors"] = o.errors;
          return d;
        },
        py::arg("registry"), py::arg("config"), py::arg("run_dir"), py::arg("mock") = py::none());
  m.def("analyze",
        [](const fs::path& run_dir) {
          py::gil_scoped_release release;
          return analyze(run_dir).dump();
        },
        py::arg("run_dir"));
  m.def("report",
        [](const std::string& analysis_json, const fs::path& out_dir, std::vector<std::string> formats) {
          return report(nlohmann::json::parse(analysis_json), out_dir, formats);
        },
        py::arg("analysis"), py::arg("out_dir"), py::arg("formats") = std::vector<std::string>{"csv", "json", "md"});
}
