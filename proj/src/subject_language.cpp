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

#include "provaudit/subject_language.hpp"

#include "provaudit/errors.hpp"
#include "provaudit/util.hpp"

namespace provaudit {

SubjectLanguage SubjectLanguage::python() {
  return {"python", "Python", "python", "Java", "java", {"def", "return", "import"}};
}

SubjectLanguage SubjectLanguage::java() {
  return {"java", "Java", "java", "Python", "python", {"class", "return", "import"}};
}

SubjectLanguage SubjectLanguage::from_tag(const std::string& tag) {
  const auto t = to_lower(tag);
  if (t == "python") return python();
  if (t == "java") return java();
  throw ValidationError("unsupported subject language '" + tag + "'");
}

}  // namespace provaudit
