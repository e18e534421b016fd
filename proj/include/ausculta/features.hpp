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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ausculta/audio.hpp"

namespace ausculta {

enum class MelScale { kHtk, kSlaney };
enum class NormScope { kWhole, kPerBand };

double HzToMel(double hz, MelScale scale = MelScale::kHtk);
double MelToHz(double mel, MelScale scale = MelScale::kHtk);

// Triangular filters, row-major n_mels x (n_fft/2 + 1), peak weight 1.
struct MelFilterBank {
  int n_mels = 0;
  int n_fft = 0;
  int sample_rate = 0;
  std::vector<double> weights;

  int n_bins() const { return n_fft / 2 + 1; }
  std::span<const double> row(int m) const {
    return {weights.data() + static_cast<std::size_t>(m) * n_bins(),
            static_cast<std::size_t>(n_bins())};
  }
};

// Throws InvalidFrequencyRange unless 0 <= f_min < f_max <= sample_rate/2,
// or when a filter falls between FFT bins and would be empty.
MelFilterBank BuildFilterBank(int n_mels, int n_fft, int sample_rate, double f_min,
                              double f_max, MelScale scale = MelScale::kHtk);

struct PowerSpectrogram {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t t) const {
    return {values.data() + t * n_bins, n_bins};
  }
};

// |FFT|^2 of periodic-Hann-windowed frames; frame count
// 1 + floor((n - win_len) / hop_len). Throws ClipTooShort when n < win_len.
PowerSpectrogram PowerStft(const AudioClip& clip, int win_len, int hop_len, int n_fft);

struct LogMelSpectrogram {
  std::size_t n_frames = 0;
  int n_mels = 0;
  double hop_ms = 32.0;
  std::vector<float> values;  // row-major n_frames x n_mels
  std::string source_id;

  float at(std::size_t t, int m) const { return values[t * n_mels + m]; }
  float& at(std::size_t t, int m) { return values[t * n_mels + m]; }
};

struct FeatureConfig {
  int win_len = 1024;  // 64 ms at 16 kHz
  int hop_len = 512;   // 32 ms
  int n_fft = 1024;
  int n_mels = 64;
  double f_min = 0.0;
  double f_max = 8000.0;
  MelScale mel_scale = MelScale::kHtk;
  double log_floor = 1e-10;
  NormScope norm = NormScope::kWhole;
};

LogMelSpectrogram ApplyLogMel(const PowerSpectrogram& power, const MelFilterBank& fb,
                              double log_floor = 1e-10);
LogMelSpectrogram LogMel(const AudioClip& clip, const MelFilterBank& fb,
                         const FeatureConfig& cfg = {});

// (v - min) / (max - min); a constant input maps to all zeros.
LogMelSpectrogram MinMaxNormalize(LogMelSpectrogram spec, NormScope scope = NormScope::kWhole);

// Filterbank built once, shared read-only.
class Featurizer {
 public:
  explicit Featurizer(FeatureConfig cfg = {}, int sample_rate = kCanonicalRate);

  LogMelSpectrogram operator()(const AudioClip& clip) const;
  const FeatureConfig& config() const { return cfg_; }
  const MelFilterBank& filterbank() const { return fb_; }

 private:
  FeatureConfig cfg_;
  MelFilterBank fb_;
};

std::vector<char> EncodeFeatureCache(const LogMelSpectrogram& spec);
LogMelSpectrogram DecodeFeatureCache(std::span<const char> bytes, std::string source_id = {});

}  // namespace ausculta
