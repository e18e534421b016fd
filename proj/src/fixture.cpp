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

#include <cmath>
#include <cstdio>

#include "ausculta/binary_io.hpp"
#include "ausculta/corpus.hpp"
#include "ausculta/error.hpp"

namespace ausculta {

AudioClip SynthesizeRecord(const FixtureSpec& spec, int class_index, Rng& rng) {
  const double base = spec.class_base_hz.at(class_index);
  // Half-octave spread around the class frequency keeps recordings of one
  // class distinct from each other.
  const double f0 = base * std::exp2(rng.Uniform(-0.5, 0.5));
  const double phase0 = rng.Uniform(0.0, 2.0 * M_PI);
  const double harmonic_ratio = rng.Uniform(1.8, 3.2);
  const double harmonic_gain = rng.Uniform(0.1, 0.35);
  const double phase1 = rng.Uniform(0.0, 2.0 * M_PI);
  const double am_hz = rng.Uniform(1.0, 6.0);
  const double am_phase = rng.Uniform(0.0, 2.0 * M_PI);
  const double noise_gain = rng.Uniform(0.01, 0.04);

  AudioClip clip;
  clip.sample_rate = spec.sample_rate;
  clip.channels = 1;
  const auto n = static_cast<std::size_t>(std::lround(spec.duration_s * spec.sample_rate));
  clip.samples.resize(n);
  const double sr = spec.sample_rate;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / sr;
    const double env = 0.6 + 0.4 * std::sin(2.0 * M_PI * am_hz * t + am_phase);
    double v = 0.45 * env * std::sin(2.0 * M_PI * f0 * t + phase0);
    v += harmonic_gain * 0.45 * std::sin(2.0 * M_PI * f0 * harmonic_ratio * t + phase1);
    v += noise_gain * (1.0 - env) * rng.Normal();
    clip.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return clip;
}

Corpus WriteFixture(const FixtureSpec& spec, const std::filesystem::path& out_dir) {
  const int n_classes = static_cast<int>(spec.class_base_hz.size());
  if (n_classes < 1) Fail(Errc::kInvalidArgument, "fixture needs at least one class");
  const TaskSpec* task = spec.task_id.empty() ? nullptr : &FindTask(spec.task_id);
  if (task && task->type != TaskType::kRegression && task->n_classes() != n_classes) {
    Fail(Errc::kInvalidArgument, spec.task_id + " has " + std::to_string(task->n_classes()) +
                                     " classes; fixture generates " + std::to_string(n_classes));
  }
  std::filesystem::create_directories(out_dir / "audio");
  Corpus corpus;
  corpus.base_dir = out_dir;
  for (int d = 0; d < spec.n_datasets; ++d) {
    const std::string dataset = "synth_" + std::to_string(d);
    const int total = spec.n_records + spec.n_validation + spec.n_test;
    for (int i = 0; i < total; ++i) {
      char id[64];
      std::snprintf(id, sizeof id, "%s_r%04d", dataset.c_str(), i);
      RecordEntry rec;
      rec.record_id = id;
      rec.dataset_id = dataset;
      rec.sound = SoundType::kHeart;
      rec.audio_path = "audio/" + rec.record_id + ".wav";
      rec.split = i < spec.n_records                      ? Split::kTrain
                  : i < spec.n_records + spec.n_validation ? Split::kValidation
                                                           : Split::kTest;
      const int cls = i % n_classes;
      if (task) rec.labels.emplace(task->id, static_cast<std::int64_t>(cls));
      Rng rng = Rng::Stream(spec.seed, rec.record_id);
      AudioClip clip = SynthesizeRecord(spec, cls, rng);
      io::WriteFileAtomic(corpus.AudioPath(rec), EncodeWavPcm16(clip));
      corpus.records.push_back(std::move(rec));
    }
  }
  const std::string manifest = SerializeManifest(corpus);
  io::WriteFileAtomic(out_dir / "manifest.jsonl", manifest);
  return corpus;
}

}  // namespace ausculta
