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

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "provaudit/analyzer.hpp"
#include "provaudit/errors.hpp"
#include "provaudit/matcher.hpp"
#include "test_support.hpp"

using namespace provaudit;

namespace {

const std::vector<std::string> kMarkers = {"def", "return", "import"};
const Registry& reg() { return testsupport::bundled_registry(); }

}  // namespace

TEST(Extract, FencedBlocksWin) {
  const auto e = extract_code("Intro\n```python\nimport a\n```\ntext\n```\ndef f(): return 1\n```\n", kMarkers);
  EXPECT_EQ(e.method, ExtractionMethod::FencedBlock);
  ASSERT_EQ(e.blocks.size(), 2u);
  EXPECT_EQ(e.blocks[0], "import a\n");
}

TEST(Extract, UnterminatedFenceRunsToEnd) {
  const auto e = extract_code("```python\nimport a\nx = 1", kMarkers);
  ASSERT_EQ(e.blocks.size(), 1u);
  EXPECT_NE(e.blocks[0].find("x = 1"), std::string::npos);
}

TEST(Extract, IndentedRunsWithoutFences) {
  const auto e = extract_code("Try this:\n\n    import whisper\n    model = whisper.load_model('base')\n\nDone.", kMarkers);
  EXPECT_EQ(e.method, ExtractionMethod::HeuristicIndent);
  ASSERT_EQ(e.blocks.size(), 1u);
  EXPECT_NE(e.blocks[0].find("load_model"), std::string::npos);
}

TEST(Extract, WholeBodyOrNothing) {
  EXPECT_EQ(extract_code("import os\nprint(os.getcwd())\n", kMarkers).method, ExtractionMethod::WholeBody);
  EXPECT_TRUE(extract_code("No code here at all.", kMarkers).blocks.empty());
}

TEST(Validity, Reasons) {
  const auto code = extract_code("```python\nimport os\n```", kMarkers);
  EXPECT_TRUE(validity(code, kMarkers).valid);
  const auto no_marker = extract_code("```\nprint(1)\n```", kMarkers);
  EXPECT_EQ(validity(no_marker, kMarkers).reason, ValidityReason::Other);
  const std::string refusal = "I'm sorry, but I can't help with that.";
  EXPECT_EQ(validity(extract_code(refusal, kMarkers), kMarkers, refusal).reason, ValidityReason::RefusalText);
  EXPECT_EQ(validity(extract_code("Sure.", kMarkers), kMarkers, "Sure.").reason, ValidityReason::NoCode);
  EXPECT_THROW(validity(code, {}), EmptyMarkerSet);
  // Markers match whole words only.
  EXPECT_FALSE(validity(extract_code("```\nredefine(x)\n```", kMarkers), kMarkers).valid);
}

TEST(Label, FingerprintAndSentinels) {
  const Labeler l(reg());
  auto x = l.label("speech_recognition", "from dragonfly import Grammar\n");
  EXPECT_EQ(x.provider, "Nuance");
  EXPECT_EQ(x.source, LabelSource::Fingerprint);
  EXPECT_EQ(l.label("speech_recognition", "import wave\n").provider, "None");
  EXPECT_EQ(l.label("speech_recognition", "import pyaudio\n").provider, "Python Library");
  EXPECT_THROW(l.label("speech_recognition", "import whisper\nimport vosk\n"), AmbiguousLabel);
  EXPECT_THROW(l.label("nope", "import x\n"), UnknownScenario);
}

TEST(Label, FallbackLearnsAndPersists) {
  testsupport::TempDir dir("learned");
  const auto store_path = dir.path() / "learned.jsonl";
  int calls = 0;
  {
    LearnedStore store(store_path);
    LabelerOptions o;
    o.learned = &store;
    o.fallback = [&](const std::string& prompt) {
      ++calls;
      EXPECT_NE(prompt.find("Please tell me which service from which company"), std::string::npos);
      return std::string("This code uses Speechmatics from the company Speechmatics. Service: Speechmatics API");
    };
    const Labeler l(reg(), o);
    const auto x = l.label("speech_recognition", "import speechmatics\nspeechmatics.client.run()\n");
    EXPECT_EQ(x.provider, "Speechmatics");
    EXPECT_EQ(x.source, LabelSource::LLMFallback);
    EXPECT_TRUE(x.quarantined);
    // A second snippet with the same import is answered from the store.
    EXPECT_EQ(l.label("speech_recognition", "import speechmatics\n").provider, "Speechmatics");
    EXPECT_EQ(calls, 1);
    // Code without third-party references never reaches the fallback.
    EXPECT_EQ(l.label("speech_recognition", "import json\n").provider, "None");
    EXPECT_EQ(calls, 1);
  }
  LearnedStore reloaded(store_path);
  ASSERT_EQ(reloaded.entries().size(), 1u);
  EXPECT_EQ(reloaded.quarantine().size(), 1u);
}

TEST(Label, FallbackKnownProviderIsNotQuarantined) {
  LabelerOptions o;
  o.fallback = [](const std::string&) { return std::string("It uses Google's speech service."); };
  const Labeler l(reg(), o);
  const auto x = l.label("speech_recognition", "import mystery_client\n");
  EXPECT_EQ(x.provider, "Google");
  EXPECT_FALSE(x.quarantined);
}

TEST(Label, FallbackReplyParsing) {
  const auto& sc = reg().scenario("speech_recognition");
  const auto all = reg().all_providers();
  EXPECT_EQ(parse_fallback_reply("Probably IBM, not Google.", sc, all)->provider, "IBM");
  const auto novel = parse_fallback_reply("Company: Rev.ai\nService: Rev API", sc, all);
  ASSERT_TRUE(novel);
  EXPECT_FALSE(novel->known);
  EXPECT_EQ(novel->service_name, "Rev API");
  EXPECT_FALSE(parse_fallback_reply("I cannot tell.", sc, all));
}

TEST(Label, ResponsePipelinePerBlock) {
  const Labeler l(reg());
  const std::string text =
      "Option one:\n```python\nimport whisper\n```\nOption two:\n```python\nfrom dragonfly import Grammar\n```\n";
  const auto joined = l.label_response("speech_recognition", "c", 0, text, kMarkers, false);
  ASSERT_EQ(joined.size(), 1u);
  EXPECT_TRUE(joined[0].error.has_value());  // two providers in one unit
  EXPECT_FALSE(joined[0].label);
  const auto blocks = l.label_response("speech_recognition", "c", 0, text, kMarkers, true);
  ASSERT_EQ(blocks.size(), 2u);
  EXPECT_EQ(blocks[0].label->provider, "OpenAI");
  EXPECT_EQ(blocks[1].label->provider, "Nuance");
  EXPECT_EQ(blocks[1].block, 1);
  const auto invalid = l.label_response("speech_recognition", "c", 0, "I cannot do that.", kMarkers, false);
  ASSERT_EQ(invalid.size(), 1u);
  EXPECT_FALSE(invalid[0].verdict.valid);
  EXPECT_FALSE(invalid[0].label);
}

TEST(Label, LabeledResponseRoundTrip) {
  const Labeler l(reg());
  const auto r = l.label_response("speech_recognition", "case", 3, "```python\nimport vosk\n```", kMarkers, false)[0];
  const auto back = LabeledResponse::from_json(r.to_json());
  EXPECT_EQ(back.to_json(), r.to_json());
  EXPECT_EQ(back.label->provider, "Alpha Cephei");
}

TEST(Modification, Categories) {
  LabeledResponse r;
  r.verdict = {true, ValidityReason::Valid};
  r.label = Label{"Google", "Google Speech Recognition", LabelSource::Fingerprint, {}, false};
  auto v = detect_modification(r, "Nuance");
  EXPECT_TRUE(v.is_modification);
  EXPECT_EQ(v.category, ModificationCategory::ProviderSwapped);
  EXPECT_EQ(v.target_provider, "Google");
  EXPECT_EQ(detect_modification(r, "Google").category, ModificationCategory::SameProvider);
  r.label->provider = "None";
  v = detect_modification(r, "Nuance");
  EXPECT_EQ(v.category, ModificationCategory::ServiceDropped);
  EXPECT_FALSE(v.is_modification);
  r.verdict = {false, ValidityReason::NoCode};
  r.label.reset();
  EXPECT_EQ(detect_modification(r, "Nuance").category, ModificationCategory::Invalid);
  EXPECT_THROW(detect_modification(r, ""), MissingSource);
}

TEST(Corpus, SelftestCoversAllKinds) {
  const auto dir = testsupport::source_dir() / "data" / "golden_corpus";
  std::set<std::string> kinds;
  int none = 0, library = 0, ambiguous = 0, total = 0;
  const Labeler l(reg());
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".py") continue;
    ++total;
    const auto side = nlohmann::json::parse(read_file(e.path().parent_path() / (e.path().stem().string() + ".expected.json")));
    if (side.contains("error")) {
      ++ambiguous;
      continue;
    }
    const auto x = l.label(side["scenario"].get<std::string>(), read_file(e.path()));
    if (x.provider == "None") ++none;
    if (x.provider == "Python Library") ++library;
    if (!x.matched.empty()) kinds.insert(std::string(to_string(x.matched.front().kind)));
  }
  EXPECT_GE(total, 30);
  EXPECT_EQ(kinds.size(), 3u);
  EXPECT_GE(none, 1);
  EXPECT_GE(library, 1);
  EXPECT_GE(ambiguous, 1);
}
