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
#include <span>
#include <string>
#include <vector>

namespace ausculta {

inline constexpr int kCanonicalRate = 16000;

// Interleaved PCM, amplitudes in [-1, 1].
struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 0;
  int channels = 1;
  std::string source_id;

  std::size_t frames() const { return channels > 0 ? samples.size() / channels : 0; }
  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0;
  }
};

// RIFF/WAVE: PCM 8/16/24/32-bit integer or 32-bit IEEE float, 1-2 channels.
// Throws MalformedContainer, UnsupportedEncoding or EmptyAudio.
AudioClip DecodeWav(std::span<const char> bytes, std::string source_id = {});
AudioClip DecodeWavFile(const std::filesystem::path& path);

std::vector<char> EncodeWavPcm16(const AudioClip& clip);

AudioClip DownmixMono(const AudioClip& clip);

struct ResamplerOptions {
  int taps_per_phase = 64;
  double kaiser_beta = 8.6;
};

// Polyphase windowed-sinc (Kaiser). Output length round(n * target / native);
// identity when the rates match. Mono input only.
AudioClip Resample(const AudioClip& clip, int target_rate,
                   const ResamplerOptions& opt = {});

// Drops leading and trailing non-overlapping frames whose RMS is below
// threshold_db (dBFS). An all-silent clip yields zero samples.
AudioClip TrimSilence(const AudioClip& clip, double threshold_db = -60.0,
                      double frame_ms = 25.0);

struct IngestOptions {
  int target_rate = kCanonicalRate;
  double silence_db = -60.0;
  double silence_frame_ms = 25.0;
  bool trim = true;
};

// decode -> downmix -> resample -> trim. The result may be empty after trim.
AudioClip IngestToCanonical(const AudioClip& decoded, const IngestOptions& opt = {});

// Canonical "ABAU" container: magic, version, sample_rate, n_samples, f32 LE.
std::vector<char> EncodeCanonical(const AudioClip& clip);
AudioClip DecodeCanonical(std::span<const char> bytes, std::string source_id = {});

// Reads either a canonical .abau file or a WAV and runs it through ingest.
AudioClip LoadCanonicalAudio(const std::filesystem::path& path,
                             const IngestOptions& opt = {});

}  // namespace ausculta
