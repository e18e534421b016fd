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

#include <map>
#include <string>
#include <vector>

#include "ausculta/audio.hpp"
#include "ausculta/features.hpp"
#include "ausculta/rng.hpp"

namespace ausculta {

// Crop length per dataset; short-clip datasets use 320 ms, the rest 640 ms.
struct CropTable {
  int default_ms = 640;
  std::map<std::string, int> by_dataset = {{"Korean", 320}, {"BowelSound", 320}};

  int For(const std::string& dataset_id) const {
    auto it = by_dataset.find(dataset_id);
    return it == by_dataset.end() ? default_ms : it->second;
  }
};

int CropFrames(int crop_ms, double hop_ms = 32.0);

struct SpecAugmentConfig {
  int n_time_masks = 2;
  int max_time_frames = 2;  // 10% of a 20-frame crop
  int n_freq_masks = 2;
  int max_freq_bands = 8;
};

struct AugmentConfig {
  CropTable crops;
  double loudness_lo = 0.9;
  double loudness_hi = 1.1;
  bool loudness = true;
  bool spec_augment = true;
  SpecAugmentConfig spec_aug;
};

// Contiguous crop_frames window with a uniform start; inputs shorter than
// the crop are zero-padded on the right first.
LogMelSpectrogram RandomCrop(const LogMelSpectrogram& spec, int crop_ms, Rng& rng,
                             std::size_t* offset = nullptr);
LogMelSpectrogram CropAt(const LogMelSpectrogram& spec, std::size_t crop_frames,
                         std::size_t offset);

// samples *= u, u ~ U[lo, hi].
AudioClip LoudnessScale(const AudioClip& clip, Rng& rng, double lo = 0.9, double hi = 1.1,
                        double* factor = nullptr);

struct MaskSpan {
  bool time = true;
  int start = 0;
  int width = 0;
};

// Time and frequency spans replaced by the pre-mask spectrogram mean.
LogMelSpectrogram SpecAugment(LogMelSpectrogram spec, const SpecAugmentConfig& cfg, Rng& rng,
                              std::vector<MaskSpan>* applied = nullptr);

}  // namespace ausculta
