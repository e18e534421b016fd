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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ausculta/augment.hpp"
#include "ausculta/tasks.hpp"

namespace ausculta {

enum class Split { kTrain, kValidation, kTest };

std::string_view SplitName(Split s);
Split ParseSplit(std::string_view s);

struct RecordEntry {
  std::string record_id;
  std::string dataset_id;
  SoundType sound = SoundType::kLung;
  std::string audio_path;  // as written in the manifest
  std::map<std::string, LabelValue> labels;
  Split split = Split::kTrain;
};

struct Corpus {
  std::vector<RecordEntry> records;
  std::filesystem::path base_dir;  // relative audio paths resolve here

  const RecordEntry* Find(std::string_view record_id) const;
  std::filesystem::path AudioPath(const RecordEntry& rec) const;
  std::vector<std::string> DatasetIds() const;  // sorted
  std::vector<const RecordEntry*> Select(std::string_view dataset_id, Split split) const;
};

struct ManifestOptions {
  bool strict = false;  // require every audio file to exist
};

// JSON Lines, one record per line, schema version "v":1. Throws
// SchemaError (with line number), DuplicateRecordId, UnknownDatasetId,
// LabelOutOfRange / NonIntegerCount, and MissingAudioFile in strict mode.
Corpus ParseManifest(std::string_view text, const std::filesystem::path& base_dir,
                     const ManifestOptions& opt = {});
Corpus LoadManifest(const std::filesystem::path& path, const ManifestOptions& opt = {});
std::string SerializeManifest(const Corpus& corpus);

// Moves ceil(fraction * n_train) train records to validation, per dataset,
// for datasets with no predefined validation records.
Corpus SplitValidation(Corpus corpus, double fraction, std::uint64_t seed);

struct Batch {
  std::string dataset_id;
  std::vector<std::string> record_ids;
  int crop_ms = 640;
};

struct BatchPlan {
  std::vector<Batch> batches;
};

// Per dataset: shuffle train records, cut full batches (remainder dropped);
// then interleave all batches with a seeded shuffle. Throws BatchSizeTooSmall.
BatchPlan PlanBatches(const Corpus& corpus, int batch_size, const CropTable& crops,
                      std::uint64_t seed);

struct FixtureSpec {
  int n_datasets = 1;
  int n_records = 16;     // train records per dataset
  int n_validation = 0;   // predefined validation records per dataset
  int n_test = 0;         // test records per dataset
  std::vector<double> class_base_hz = {200.0, 900.0};
  std::string task_id = "T13";  // label key; empty for unlabeled
  double duration_s = 2.0;
  int sample_rate = kCanonicalRate;
  std::uint64_t seed = 0;
};

// Writes audio/<record_id>.wav and manifest.jsonl under out_dir.
Corpus WriteFixture(const FixtureSpec& spec, const std::filesystem::path& out_dir);

// One fixture waveform: class tone family with per-record frequency jitter,
// a random-strength harmonic and amplitude-modulated noise.
AudioClip SynthesizeRecord(const FixtureSpec& spec, int class_index, Rng& rng);

}  // namespace ausculta
