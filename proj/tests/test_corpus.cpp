/*
 * Copyright 2026 The AuscultaBase Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <set>

#include "ausculta/binary_io.hpp"
#include "ausculta/corpus.hpp"
#include "ausculta/error.hpp"
#include "test_util.hpp"

using namespace ausculta;

namespace {

std::string Line(const std::string& id, const std::string& ds = "ICBHI2017",
                 const std::string& split = "train", const std::string& labels = "") {
  return R"({"v":1,"record_id":")" + id + R"(","dataset_id":")" + ds +
         R"(","sound_type":"L","audio_path":")" + id + R"(.wav","split":")" + split + "\"" +
         (labels.empty() ? "" : ",\"labels\":" + labels) + "}\n";
}

Errc CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::kInvalidArgument;
}

}  // namespace

TEST(Manifest, ParsesAndRoundTrips) {
  const std::string text = Line("a") + Line("b", "SPRSound", "validation", R"({"T1":2})");
  const Corpus c = ParseManifest(text, "/data");
  ASSERT_EQ(c.records.size(), 2u);
  EXPECT_EQ(c.records[1].split, Split::kValidation);
  EXPECT_EQ(std::get<std::int64_t>(c.records[1].labels.at("T1")), 2);
  EXPECT_EQ(c.AudioPath(c.records[0]), std::filesystem::path("/data/a.wav"));
  const Corpus back = ParseManifest(SerializeManifest(c), "/data");
  EXPECT_EQ(SerializeManifest(back), SerializeManifest(c));
}

TEST(Manifest, RejectsDuplicatesUnknownDatasetsAndBadLabels) {
  EXPECT_EQ(CodeOf([] { ParseManifest(Line("a") + Line("a"), "."); }), Errc::kDuplicateRecordId);
  EXPECT_EQ(CodeOf([] { ParseManifest(Line("a", "Nowhere"), "."); }), Errc::kUnknownDatasetId);
  EXPECT_EQ(CodeOf([] { ParseManifest(Line("a", "BowelSound", "train", R"({"T16":44})"), "."); }),
            Errc::kLabelOutOfRange);
  EXPECT_EQ(CodeOf([] { ParseManifest(Line("a", "BowelSound", "train", R"({"T16":4.5})"), "."); }),
            Errc::kNonIntegerCount);
}

TEST(Manifest, SchemaErrorNamesTheLine) {
  try {
    ParseManifest(Line("a") + "{not json\n", ".");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSchemaError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Manifest, StrictRequiresAudio) {
  EXPECT_EQ(CodeOf([] { ParseManifest(Line("missing"), "/nonexistent", {true}); }),
            Errc::kMissingAudioFile);
}

TEST(SplitValidation, TenPercentPerDatasetWithoutPredefinedSplit) {
  std::string text;
  for (int i = 0; i < 20; ++i) text += Line("i" + std::to_string(i));
  for (int i = 0; i < 5; ++i) text += Line("s" + std::to_string(i), "SPRSound");
  text += Line("sv", "SPRSound", "validation");
  const Corpus c = SplitValidation(ParseManifest(text, "."), 0.1, 7);
  EXPECT_EQ(c.Select("ICBHI2017", Split::kValidation).size(), 2u);
  EXPECT_EQ(c.Select("SPRSound", Split::kValidation).size(), 1u);
  const Corpus again = SplitValidation(ParseManifest(text, "."), 0.1, 7);
  EXPECT_EQ(SerializeManifest(c), SerializeManifest(again));
}

TEST(BatchPlan, SingleDatasetBatchesWithoutRepeats) {
  std::string text;
  for (int i = 0; i < 10; ++i) text += Line("i" + std::to_string(i));
  for (int i = 0; i < 9; ++i) text += Line("k" + std::to_string(i), "Korean");
  const Corpus c = ParseManifest(text, ".");
  const BatchPlan p = PlanBatches(c, 4, CropTable{}, 1);
  EXPECT_EQ(p.batches.size(), 4u);  // 2 + 2, remainders dropped
  std::set<std::string> seen;
  for (const Batch& b : p.batches) {
    EXPECT_EQ(b.record_ids.size(), 4u);
    EXPECT_EQ(b.crop_ms, b.dataset_id == "Korean" ? 320 : 640);
    for (const auto& id : b.record_ids) {
      EXPECT_TRUE(seen.insert(id).second);
      EXPECT_EQ(c.Find(id)->dataset_id, b.dataset_id);
    }
  }
  EXPECT_EQ(CodeOf([&] { PlanBatches(c, 1, CropTable{}, 1); }), Errc::kBatchSizeTooSmall);
}

TEST(Fixture, WritesDecodableAudioAndManifest) {
  const auto dir = ScratchDir("fixture");
  FixtureSpec spec;
  spec.n_records = 4;
  spec.n_validation = 2;
  const Corpus c = WriteFixture(spec, dir);
  EXPECT_EQ(c.records.size(), 6u);
  const Corpus loaded = LoadManifest(dir / "manifest.jsonl", {true});
  EXPECT_EQ(SerializeManifest(loaded), SerializeManifest(c));
  const AudioClip clip = DecodeWavFile(loaded.AudioPath(loaded.records[0]));
  EXPECT_EQ(clip.sample_rate, 16000);
  EXPECT_NEAR(clip.duration_s(), 2.0, 1e-3);
}
