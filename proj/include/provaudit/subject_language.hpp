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

#include <string>
#include <vector>

namespace provaudit {

/// The programming language of the audited snippets, as opposed to the
/// language this harness is written in.
struct SubjectLanguage {
  std::string tag;                  // "python"
  std::string display_name;         // "Python"
  std::string fence_info;           // info string used when embedding code
  std::string translation_target;   // display name of the Translation target
  std::string translation_target_tag;
  std::vector<std::string> default_markers;

  static SubjectLanguage python();
  static SubjectLanguage java();
  /// Looks up a known tag; throws ValidationError for anything else.
  static SubjectLanguage from_tag(const std::string& tag);
};

}  // namespace provaudit
