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

#include "ausculta/pipeline.hpp"

#include <atomic>
#include <exception>
#include <iostream>
#include <thread>

#include "ausculta/binary_io.hpp"
#include "ausculta/error.hpp"

namespace ausculta {
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool ok = false;
  std::string reason;
  std::exception_ptr error;
};

Outcome ProcessOne(const Corpus& corpus, const RecordEntry& rec, const Featurizer& featurizer,
                   const PreprocessOptions& opt, const fs::path& out_dir) {
  Outcome o;
  try {
    AudioClip clip = LoadCanonicalAudio(corpus.AudioPath(rec), opt.ingest);
    clip.source_id = rec.record_id;
    if (clip.samples.empty()) Fail(Errc::kEmptyAudio, "silent after trimming");
    LogMelSpectrogram spec = featurizer(clip);
    io::WriteFileAtomic(out_dir / "audio" / (rec.record_id + ".abau"), EncodeCanonical(clip));
    io::WriteFileAtomic(out_dir / "features" / (rec.record_id + ".abft"),
                        EncodeFeatureCache(spec));
    o.ok = true;
  } catch (const Error& e) {
    o.reason = std::string(ErrcName(e.code())) + ": " + e.what();
    o.error = std::current_exception();
  }
  return o;
}

}  // namespace

PreprocessReport Preprocess(const Corpus& corpus, const fs::path& out_dir,
                            const PreprocessOptions& opt) {
  fs::create_directories(out_dir / "audio");
  fs::create_directories(out_dir / "features");
  const Featurizer featurizer(opt.features, opt.ingest.target_rate);

  const std::size_t n = corpus.records.size();
  std::vector<Outcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      outcomes[i] = ProcessOne(corpus, corpus.records[i], featurizer, opt, out_dir);
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(n)));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  PreprocessReport report;
  Corpus kept;
  kept.base_dir = out_dir;
  for (std::size_t i = 0; i < n; ++i) {
    const RecordEntry& rec = corpus.records[i];
    if (!outcomes[i].ok) {
      if (opt.strict) {
        try {
          std::rethrow_exception(outcomes[i].error);
        } catch (const Error& e) {
          Fail(e.code(), "record " + rec.record_id + ": " + e.what());
        }
      }
      std::cerr << "skip " << rec.record_id << ": " << outcomes[i].reason << "\n";
      report.skipped.emplace_back(rec.record_id, outcomes[i].reason);
      continue;
    }
    RecordEntry out = rec;
    out.audio_path = "audio/" + rec.record_id + ".abau";
    kept.records.push_back(std::move(out));
    ++report.n_written;
  }
  const std::string manifest = SerializeManifest(kept);
  io::WriteFileAtomic(out_dir / "manifest.jsonl", {manifest.data(), manifest.size()});
  return report;
}

fs::path FeatureCachePath(const Corpus& corpus, const RecordEntry& rec) {
  return corpus.base_dir / "features" / (rec.record_id + ".abft");
}

LogMelSpectrogram LoadFeatures(const Corpus& corpus, const RecordEntry& rec,
                               const Featurizer& featurizer, const IngestOptions& ingest) {
  const fs::path cached = FeatureCachePath(corpus, rec);
  if (fs::exists(cached)) return DecodeFeatureCache(io::ReadFile(cached), rec.record_id);
  AudioClip clip = LoadCanonicalAudio(corpus.AudioPath(rec), ingest);
  clip.source_id = rec.record_id;
  if (clip.samples.empty()) Fail(Errc::kEmptyAudio, rec.record_id + ": silent after trimming");
  return featurizer(clip);
}

}  // namespace ausculta
