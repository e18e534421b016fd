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

#include "ausculta/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "ausculta/binary_io.hpp"
#include "ausculta/error.hpp"
#include "ausculta/simd/kernels.hpp"

namespace ausculta {
namespace {

constexpr double kSlaneyMinLogHz = 1000.0;
constexpr double kSlaneyLinStep = 200.0 / 3.0;
const double kSlaneyLogStep = std::log(6.4) / 27.0;

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

// The FFTW planner is not thread-safe; plans are created once per size under
// a lock and executed with the new-array interface.
fftw_plan PlanFor(int n_fft) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n_fft);
  if (it != plans.end()) return it->second;
  FftwBuffer<double> in(static_cast<double*>(fftw_malloc(sizeof(double) * n_fft)));
  FftwBuffer<fftw_complex> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n_fft / 2 + 1))));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n_fft, in.get(), out.get(), FFTW_ESTIMATE);
  plans.emplace(n_fft, plan);
  return plan;
}

}  // namespace

double HzToMel(double hz, MelScale scale) {
  if (scale == MelScale::kHtk) return 2595.0 * std::log10(1.0 + hz / 700.0);
  if (hz < kSlaneyMinLogHz) return hz / kSlaneyLinStep;
  return kSlaneyMinLogHz / kSlaneyLinStep + std::log(hz / kSlaneyMinLogHz) / kSlaneyLogStep;
}

double MelToHz(double mel, MelScale scale) {
  if (scale == MelScale::kHtk) return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
  const double min_log_mel = kSlaneyMinLogHz / kSlaneyLinStep;
  if (mel < min_log_mel) return mel * kSlaneyLinStep;
  return kSlaneyMinLogHz * std::exp(kSlaneyLogStep * (mel - min_log_mel));
}

MelFilterBank BuildFilterBank(int n_mels, int n_fft, int sample_rate, double f_min,
                              double f_max, MelScale scale) {
  if (n_mels < 1 || n_fft < 2 || sample_rate <= 0) {
    Fail(Errc::kInvalidArgument, "filterbank needs n_mels >= 1, n_fft >= 2, sample_rate > 0");
  }
  if (!(f_min >= 0.0 && f_min < f_max && f_max <= sample_rate / 2.0)) {
    Fail(Errc::kInvalidFrequencyRange,
         "need 0 <= f_min < f_max <= sample_rate/2, got [" + std::to_string(f_min) + ", " +
             std::to_string(f_max) + "]");
  }
  MelFilterBank fb;
  fb.n_mels = n_mels;
  fb.n_fft = n_fft;
  fb.sample_rate = sample_rate;
  const int n_bins = fb.n_bins();
  fb.weights.assign(static_cast<std::size_t>(n_mels) * n_bins, 0.0);

  const double mel_lo = HzToMel(f_min, scale);
  const double mel_hi = HzToMel(f_max, scale);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1), scale);
  }
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    bool any = false;
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      const double w = std::max(0.0, std::min(rise, fall));
      fb.weights[static_cast<std::size_t>(m) * n_bins + k] = w;
      any = any || w > 0.0;
    }
    if (!any) {
      Fail(Errc::kInvalidFrequencyRange,
           "mel filter " + std::to_string(m) + " covers no FFT bin; raise n_fft or lower n_mels");
    }
  }
  return fb;
}

PowerSpectrogram PowerStft(const AudioClip& clip, int win_len, int hop_len, int n_fft) {
  if (hop_len <= 0 || win_len <= 0 || win_len > n_fft) {
    Fail(Errc::kInvalidArgument, "need hop_len > 0 and 0 < win_len <= n_fft");
  }
  if (clip.channels != 1) Fail(Errc::kInvalidArgument, "power_stft expects mono audio");
  const std::size_t n = clip.samples.size();
  if (n < static_cast<std::size_t>(win_len)) {
    Fail(Errc::kClipTooShort, clip.source_id + ": " + std::to_string(n) + " samples < window " +
                                  std::to_string(win_len));
  }
  PowerSpectrogram out;
  out.n_frames = 1 + (n - win_len) / hop_len;
  out.n_bins = static_cast<std::size_t>(n_fft / 2 + 1);
  out.values.resize(out.n_frames * out.n_bins);

  std::vector<double> window(win_len);
  for (int i = 0; i < win_len; ++i) window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / win_len);

  fftw_plan plan = PlanFor(n_fft);
  FftwBuffer<double> frame(static_cast<double*>(fftw_malloc(sizeof(double) * n_fft)));
  FftwBuffer<fftw_complex> spectrum(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * out.n_bins)));
  const auto& kernels = simd::Active();
  for (std::size_t t = 0; t < out.n_frames; ++t) {
    const float* src = clip.samples.data() + t * hop_len;
    for (int i = 0; i < win_len; ++i) frame[i] = window[i] * src[i];
    std::fill(frame.get() + win_len, frame.get() + n_fft, 0.0);
    fftw_execute_dft_r2c(plan, frame.get(), spectrum.get());
    kernels.abs2(reinterpret_cast<const double*>(spectrum.get()),
                 out.values.data() + t * out.n_bins, out.n_bins);
  }
  return out;
}

LogMelSpectrogram ApplyLogMel(const PowerSpectrogram& power, const MelFilterBank& fb,
                              double log_floor) {
  if (power.n_bins != static_cast<std::size_t>(fb.n_bins())) {
    Fail(Errc::kDimMismatch, "power spectrum bins do not match filterbank");
  }
  LogMelSpectrogram spec;
  spec.n_frames = power.n_frames;
  spec.n_mels = fb.n_mels;
  spec.values.resize(spec.n_frames * spec.n_mels);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    const auto row = power.row(t);
    for (int m = 0; m < fb.n_mels; ++m) {
      spec.at(t, m) = static_cast<float>(std::log(simd::Dot(fb.row(m), row) + log_floor));
    }
  }
  return spec;
}

LogMelSpectrogram LogMel(const AudioClip& clip, const MelFilterBank& fb,
                         const FeatureConfig& cfg) {
  if (clip.sample_rate != fb.sample_rate) {
    Fail(Errc::kInvalidArgument, "clip sample rate " + std::to_string(clip.sample_rate) +
                                     " != filterbank rate " + std::to_string(fb.sample_rate));
  }
  auto spec = ApplyLogMel(PowerStft(clip, cfg.win_len, cfg.hop_len, fb.n_fft), fb,
                          cfg.log_floor);
  spec.hop_ms = 1000.0 * cfg.hop_len / clip.sample_rate;
  spec.source_id = clip.source_id;
  return spec;
}

LogMelSpectrogram MinMaxNormalize(LogMelSpectrogram spec, NormScope scope) {
  if (spec.values.empty()) return spec;
  auto rescale = [](float& v, float lo, float hi) {
    v = hi > lo ? static_cast<float>((double(v) - lo) / (double(hi) - lo)) : 0.0f;
  };
  if (scope == NormScope::kWhole) {
    float lo = 0, hi = 0;
    simd::Active().minmax_f32(spec.values.data(), spec.values.size(), &lo, &hi);
    for (float& v : spec.values) rescale(v, lo, hi);
    return spec;
  }
  for (int m = 0; m < spec.n_mels; ++m) {
    float lo = spec.at(0, m), hi = lo;
    for (std::size_t t = 1; t < spec.n_frames; ++t) {
      lo = std::min(lo, spec.at(t, m));
      hi = std::max(hi, spec.at(t, m));
    }
    for (std::size_t t = 0; t < spec.n_frames; ++t) rescale(spec.at(t, m), lo, hi);
  }
  return spec;
}

Featurizer::Featurizer(FeatureConfig cfg, int sample_rate)
    : cfg_(cfg),
      fb_(BuildFilterBank(cfg.n_mels, cfg.n_fft, sample_rate, cfg.f_min,
                          std::min(cfg.f_max, sample_rate / 2.0), cfg.mel_scale)) {}

LogMelSpectrogram Featurizer::operator()(const AudioClip& clip) const {
  return MinMaxNormalize(LogMel(clip, fb_, cfg_), cfg_.norm);
}

std::vector<char> EncodeFeatureCache(const LogMelSpectrogram& spec) {
  io::ByteWriter w;
  w.bytes("ABFT");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(spec.n_frames));
  w.u32(static_cast<std::uint32_t>(spec.n_mels));
  w.f32s(spec.values);
  return w.data();
}

LogMelSpectrogram DecodeFeatureCache(std::span<const char> bytes, std::string source_id) {
  io::ByteReader r(bytes, "abft");
  if (r.bytes(4) != "ABFT") Fail(Errc::kMalformedContainer, "bad ABFT magic");
  if (r.u32() != 1) Fail(Errc::kUnsupportedEncoding, "unknown ABFT version");
  LogMelSpectrogram spec;
  spec.n_frames = r.u32();
  spec.n_mels = static_cast<int>(r.u32());
  spec.values = r.f32s(spec.n_frames * spec.n_mels);
  spec.source_id = std::move(source_id);
  return spec;
}

}  // namespace ausculta
