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

#include "ausculta/augment.hpp"

#include <algorithm>
#include <cmath>

#include "ausculta/error.hpp"
#include "ausculta/simd/kernels.hpp"

namespace ausculta {

int CropFrames(int crop_ms, double hop_ms) {
  if (crop_ms <= 0) Fail(Errc::kInvalidArgument, "crop_ms must be positive");
  return std::max(1, static_cast<int>(std::lround(crop_ms / hop_ms)));
}

LogMelSpectrogram CropAt(const LogMelSpectrogram& spec, std::size_t crop_frames,
                         std::size_t offset) {
  LogMelSpectrogram out;
  out.n_frames = crop_frames;
  out.n_mels = spec.n_mels;
  out.hop_ms = spec.hop_ms;
  out.source_id = spec.source_id;
  out.values.assign(crop_frames * spec.n_mels, 0.0f);
  const std::size_t avail = offset < spec.n_frames ? spec.n_frames - offset : 0;
  const std::size_t take = std::min(crop_frames, avail);
  std::copy_n(spec.values.begin() + offset * spec.n_mels, take * spec.n_mels,
              out.values.begin());
  return out;
}

LogMelSpectrogram RandomCrop(const LogMelSpectrogram& spec, int crop_ms, Rng& rng,
                             std::size_t* offset) {
  const std::size_t frames = CropFrames(crop_ms, spec.hop_ms);
  std::size_t start = 0;
  if (spec.n_frames > frames) {
    start = static_cast<std::size_t>(rng.UniformInt(0, static_cast<std::int64_t>(spec.n_frames - frames)));
  }
  if (offset) *offset = start;
  return CropAt(spec, frames, start);
}

AudioClip LoudnessScale(const AudioClip& clip, Rng& rng, double lo, double hi, double* factor) {
  if (!(lo > 0.0 && lo <= hi)) Fail(Errc::kInvalidArgument, "loudness bounds need 0 < lo <= hi");
  const double u = lo == hi ? lo : rng.Uniform(lo, hi);
  if (factor) *factor = u;
  AudioClip out = clip;
  simd::Active().scale_f32(static_cast<float>(u), out.samples.data(), out.samples.size());
  return out;
}

LogMelSpectrogram SpecAugment(LogMelSpectrogram spec, const SpecAugmentConfig& cfg, Rng& rng,
                              std::vector<MaskSpan>* applied) {
  if (spec.values.empty()) return spec;
  double sum = 0.0;
  for (float v : spec.values) sum += v;
  const float fill = static_cast<float>(sum / spec.values.size());

  const int n_frames = static_cast<int>(spec.n_frames);
  auto draw = [&](int max_width, int dim) {
    const int w = static_cast<int>(rng.UniformInt(0, std::min(max_width, dim)));
    const int s = static_cast<int>(rng.UniformInt(0, dim - w));
    return std::pair{s, w};
  };
  for (int i = 0; i < cfg.n_time_masks; ++i) {
    auto [s, w] = draw(cfg.max_time_frames, n_frames);
    for (int t = s; t < s + w; ++t)
      for (int m = 0; m < spec.n_mels; ++m) spec.at(t, m) = fill;
    if (applied) applied->push_back({true, s, w});
  }
  for (int i = 0; i < cfg.n_freq_masks; ++i) {
    auto [s, w] = draw(cfg.max_freq_bands, spec.n_mels);
    for (int t = 0; t < n_frames; ++t)
      for (int m = s; m < s + w; ++m) spec.at(t, m) = fill;
    if (applied) applied->push_back({false, s, w});
  }
  return spec;
}

}  // namespace ausculta
