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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace provaudit {

/// One removed or inserted line. For deletions `line` indexes the seed; for
/// insertions it indexes the mutant.
struct LineEdit {
  std::size_t line = 0;
  std::string text;

  friend bool operator==(const LineEdit&, const LineEdit&) = default;
};

struct MutationResult {
  std::string kind;  // "bug" or "dead_code"
  std::string mutant;
  std::vector<LineEdit> log;
  std::uint64_t rng_seed = 0;

  nlohmann::json to_json() const;
};

struct BugOptions {
  std::size_t max_deletions = 3;
  /// One deletion per this many statement lines, rounded up.
  std::size_t lines_per_deletion = 5;
  /// Relative sampling weight of lines that define an identifier used later.
  double def_use_weight = 4.0;
  std::string language_tag = "python";
};

/// Removes k = min(max_deletions, ceil(statements / lines_per_deletion))
/// statement lines. Import lines, block headers and comments are never
/// removed, so the service fingerprint survives. Throws SeedTooSmall below
/// three statement lines.
MutationResult inject_bug(std::string_view seed, std::uint64_t rng_seed, const BugOptions& options = {});

enum class DeadCodeShape { NoOpLoop, UnreachableBranch, UnusedAssignment };

struct DeadCodeOptions {
  std::size_t blocks = 1;
  /// Forces one shape for every block; drawn at random when unset.
  std::optional<DeadCodeShape> shape;
  /// Forces the insertion site, given as the before_line of a dead_code_sites() entry.
  std::optional<std::size_t> site;
  std::string language_tag = "python";
};

/// Line indices before which a statement block may be inserted, each paired
/// with the indentation it must use. `lines.size()` denotes the end.
struct InsertionSite {
  std::size_t before_line = 0;
  std::string indent;
};

std::vector<InsertionSite> dead_code_sites(std::string_view seed, std::string_view language_tag = "python");

/// Inserts blocks that reference only fresh identifiers. Every seed line is
/// kept, in order.
MutationResult inject_dead_code(std::string_view seed, std::uint64_t rng_seed, const DeadCodeOptions& options = {});

/// Identifier tokens of a snippet (used to keep generated names fresh).
std::vector<std::string> identifiers_in(std::string_view code);

}  // namespace provaudit
