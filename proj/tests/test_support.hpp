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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "provaudit/registry.hpp"
#include "provaudit/util.hpp"

namespace testsupport {

inline std::filesystem::path source_dir() { return PROVAUDIT_SOURCE_DIR; }
inline std::filesystem::path test_data() { return PROVAUDIT_TEST_DATA; }

inline const provaudit::Registry& bundled_registry() {
  static const provaudit::Registry reg = provaudit::load_registry(source_dir() / "data" / "registry.json");
  return reg;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("provaudit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Mean absolute difference form: sum_i sum_j |x_i - x_j| / (2 n sum x).
/// Deliberately unrelated to the sorted formula in the library.
inline double gini_oracle(const std::vector<std::int64_t>& x) {
  long double num = 0, sum = 0;
  for (auto a : x) {
    sum += a;
    for (auto b : x) num += std::fabs(static_cast<long double>(a - b));
  }
  return static_cast<double>(num / (2.0L * x.size() * sum));
}

}  // namespace testsupport
