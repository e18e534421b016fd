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

// Corpus-level glue: canonicalize and featurize every record, and resolve
// cached features for the trainers.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ausculta/audio.hpp"
#include "ausculta/corpus.hpp"
#include "ausculta/features.hpp"

namespace ausculta {

struct PreprocessOptions {
  bool strict = false;
  int jobs = 1;
  IngestOptions ingest;
  FeatureConfig features;
};

struct PreprocessReport {
  std::size_t n_written = 0;
  std::vector<std::pair<std::string, std::string>> skipped;  // record_id, reason
};

// Writes out_dir/audio/<id>.abau, out_dir/features/<id>.abft and a
// manifest.jsonl pointing at the canonical audio. Records that fail (or
// trim to nothing) are skipped unless strict, where the first failure is
// rethrown with its record id.
PreprocessReport Preprocess(const Corpus& corpus, const std::filesystem::path& out_dir,
                            const PreprocessOptions& opt = {});

std::filesystem::path FeatureCachePath(const Corpus& corpus, const RecordEntry& rec);

// Cached features when present next to the manifest, else computed from audio.
LogMelSpectrogram LoadFeatures(const Corpus& corpus, const RecordEntry& rec,
                               const Featurizer& featurizer, const IngestOptions& ingest = {});

}  // namespace ausculta
