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

#include "ausculta/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "ausculta/binary_io.hpp"
#include "ausculta/error.hpp"

namespace ausculta {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t LoadU16(const char* p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}
std::uint32_t LoadU32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

struct WavFormat {
  std::uint16_t format = 0;
  int channels = 0;
  int sample_rate = 0;
  int bits = 0;
  int block_align = 0;
};

float DecodeSample(const unsigned char* p, const WavFormat& fmt) {
  switch (fmt.bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0f;
    case 16: {
      std::int16_t v;
      std::memcpy(&v, p, 2);
      return static_cast<float>(v / 32768.0);
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;
      return static_cast<float>(v / 8388608.0);
    }
    case 32: {
      if (fmt.format == kFormatFloat) {
        float f;
        std::memcpy(&f, p, 4);
        if (!std::isfinite(f)) Fail(Errc::kMalformedContainer, "non-finite float sample");
        return std::clamp(f, -1.0f, 1.0f);
      }
      std::int32_t v;
      std::memcpy(&v, p, 4);
      return static_cast<float>(v / 2147483648.0);
    }
  }
  return 0.0f;
}

double KaiserWindow(double x, double beta) {
  if (std::abs(x) > 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - x * x)) /
         std::cyl_bessel_i(0.0, beta);
}

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

AudioClip DecodeWav(std::span<const char> bytes, std::string source_id) {
  const std::string what = source_id.empty() ? "wav" : source_id;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    Fail(Errc::kMalformedContainer, what + ": missing RIFF/WAVE header");
  }
  WavFormat fmt;
  bool have_fmt = false;
  const char* data = nullptr;
  std::size_t data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* chunk = bytes.data() + pos;
    const std::uint32_t size = LoadU32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) Fail(Errc::kMalformedContainer, what + ": short fmt chunk");
      const char* f = bytes.data() + body;
      fmt.format = LoadU16(f);
      fmt.channels = LoadU16(f + 2);
      fmt.sample_rate = static_cast<int>(LoadU32(f + 4));
      fmt.block_align = LoadU16(f + 12);
      fmt.bits = LoadU16(f + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40 || avail < 40) Fail(Errc::kMalformedContainer, what + ": short extensible fmt");
        fmt.format = LoadU16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, avail);
      have_data = true;
      break;
    }
    if (size > avail) break;
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) Fail(Errc::kMalformedContainer, what + ": no fmt chunk");
  if (!have_data) Fail(Errc::kMalformedContainer, what + ": no data chunk");

  const bool int_ok = fmt.format == kFormatPcm &&
                      (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
  const bool float_ok = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!int_ok && !float_ok) {
    Fail(Errc::kUnsupportedEncoding, what + ": format " + std::to_string(fmt.format) +
                                         " with " + std::to_string(fmt.bits) + " bits");
  }
  if (fmt.channels < 1 || fmt.channels > 2) {
    Fail(Errc::kUnsupportedEncoding, what + ": " + std::to_string(fmt.channels) + " channels");
  }
  if (fmt.sample_rate <= 0) Fail(Errc::kMalformedContainer, what + ": zero sample rate");
  const int bytes_per_sample = fmt.bits / 8;
  if (fmt.block_align != bytes_per_sample * fmt.channels) {
    Fail(Errc::kMalformedContainer, what + ": inconsistent block_align");
  }

  const std::size_t n_frames = data_size / fmt.block_align;
  if (n_frames == 0) Fail(Errc::kEmptyAudio, what + ": zero-length data chunk");

  AudioClip clip;
  clip.sample_rate = fmt.sample_rate;
  clip.channels = fmt.channels;
  clip.source_id = std::move(source_id);
  clip.samples.resize(n_frames * fmt.channels);
  const auto* raw = reinterpret_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = DecodeSample(raw + i * bytes_per_sample, fmt);
  }
  return clip;
}

AudioClip DecodeWavFile(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    Fail(Errc::kMissingAudioFile, path.string());
  }
  const auto bytes = io::ReadFile(path);
  return DecodeWav(bytes, path.stem().string());
}

std::vector<char> EncodeWavPcm16(const AudioClip& clip) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  io::ByteWriter w;
  auto u16 = [&w](std::uint16_t v) { w.bytes(std::string_view(reinterpret_cast<char*>(&v), 2)); };
  w.bytes("RIFF");
  w.u32(36 + data_bytes);
  w.bytes("WAVE");
  w.bytes("fmt ");
  w.u32(16);
  u16(kFormatPcm);
  u16(static_cast<std::uint16_t>(clip.channels));
  w.u32(static_cast<std::uint32_t>(clip.sample_rate));
  w.u32(static_cast<std::uint32_t>(clip.sample_rate * clip.channels * 2));
  u16(static_cast<std::uint16_t>(clip.channels * 2));
  u16(16);
  w.bytes("data");
  w.u32(data_bytes);
  for (float s : clip.samples) {
    const double scaled = std::round(std::clamp(static_cast<double>(s), -1.0, 1.0) * 32767.0);
    u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return w.data();
}

AudioClip DownmixMono(const AudioClip& clip) {
  if (clip.channels == 1) return clip;
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.channels = 1;
  out.source_id = clip.source_id;
  const std::size_t n = clip.frames();
  out.samples.resize(n);
  const int c = clip.channels;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int ch = 0; ch < c; ++ch) acc += clip.samples[i * c + ch];
    out.samples[i] = static_cast<float>(acc / c);
  }
  return out;
}

AudioClip Resample(const AudioClip& clip, int target_rate, const ResamplerOptions& opt) {
  if (clip.sample_rate <= 0 || target_rate <= 0) {
    Fail(Errc::kInvalidArgument, "sample rates must be positive");
  }
  if (clip.sample_rate == target_rate) return clip;

  const std::int64_t g = std::gcd(clip.sample_rate, target_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = clip.sample_rate / g;
  const int taps = opt.taps_per_phase;
  const int half = taps / 2;
  const double cutoff = std::min(1.0, static_cast<double>(up) / static_cast<double>(down));

  // One normalized tap set per output phase.
  std::vector<double> bank(static_cast<std::size_t>(up) * taps);
  for (std::int64_t phase = 0; phase < up; ++phase) {
    const double frac = static_cast<double>(phase) / static_cast<double>(up);
    double* h = bank.data() + phase * taps;
    double sum = 0.0;
    for (int j = 0; j < taps; ++j) {
      const double dist = (j - (half - 1)) - frac;
      h[j] = cutoff * Sinc(cutoff * dist) * KaiserWindow(dist / half, opt.kaiser_beta);
      sum += h[j];
    }
    for (int j = 0; j < taps; ++j) h[j] /= sum;
  }

  const int c = clip.channels;
  const std::int64_t n_in = static_cast<std::int64_t>(clip.frames());
  const std::int64_t n_out = (n_in * up + down / 2) / down;

  AudioClip out;
  out.sample_rate = target_rate;
  out.channels = c;
  out.source_id = clip.source_id;
  out.samples.assign(static_cast<std::size_t>(n_out) * c, 0.0f);
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t pos = n * down;
    const std::int64_t base = pos / up;
    const std::int64_t phase = pos % up;
    const double* h = bank.data() + phase * taps;
    const std::int64_t first = base - (half - 1);
    const int j0 = static_cast<int>(std::max<std::int64_t>(0, -first));
    const int j1 = static_cast<int>(std::min<std::int64_t>(taps, n_in - first));
    for (int ch = 0; ch < c; ++ch) {
      double acc = 0.0;
      for (int j = j0; j < j1; ++j) acc += h[j] * clip.samples[(first + j) * c + ch];
      out.samples[n * c + ch] = static_cast<float>(std::clamp(acc, -1.0, 1.0));
    }
  }
  return out;
}

AudioClip TrimSilence(const AudioClip& clip, double threshold_db, double frame_ms) {
  if (threshold_db >= 0.0 || frame_ms <= 0.0) {
    Fail(Errc::kInvalidArgument, "trim_silence needs threshold_db < 0 and frame_ms > 0");
  }
  const std::size_t frame_len = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(frame_ms * clip.sample_rate / 1000.0)));
  const std::size_t n = clip.frames();
  const int c = clip.channels;
  const double threshold = std::pow(10.0, threshold_db / 20.0);
  const std::size_t n_frames = (n + frame_len - 1) / frame_len;

  auto loud = [&](std::size_t f) {
    const std::size_t a = f * frame_len;
    const std::size_t b = std::min(n, a + frame_len);
    double energy = 0.0;
    for (std::size_t i = a * c; i < b * c; ++i) energy += double(clip.samples[i]) * clip.samples[i];
    const double rms = std::sqrt(energy / static_cast<double>((b - a) * c));
    return rms >= threshold;
  };

  std::size_t first = 0;
  while (first < n_frames && !loud(first)) ++first;
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.channels = c;
  out.source_id = clip.source_id;
  if (first == n_frames) return out;
  std::size_t last = n_frames - 1;
  while (last > first && !loud(last)) --last;
  const std::size_t a = first * frame_len;
  const std::size_t b = std::min(n, (last + 1) * frame_len);
  out.samples.assign(clip.samples.begin() + a * c, clip.samples.begin() + b * c);
  return out;
}

AudioClip IngestToCanonical(const AudioClip& decoded, const IngestOptions& opt) {
  AudioClip clip = Resample(DownmixMono(decoded), opt.target_rate);
  if (opt.trim) clip = TrimSilence(clip, opt.silence_db, opt.silence_frame_ms);
  return clip;
}

std::vector<char> EncodeCanonical(const AudioClip& clip) {
  if (clip.channels != 1) Fail(Errc::kInvalidArgument, "canonical audio must be mono");
  io::ByteWriter w;
  w.bytes("ABAU");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(clip.sample_rate));
  w.u32(static_cast<std::uint32_t>(clip.samples.size()));
  w.f32s(clip.samples);
  return w.data();
}

AudioClip DecodeCanonical(std::span<const char> bytes, std::string source_id) {
  io::ByteReader r(bytes, "abau");
  if (r.bytes(4) != "ABAU") Fail(Errc::kMalformedContainer, "bad ABAU magic");
  if (r.u32() != 1) Fail(Errc::kUnsupportedEncoding, "unknown ABAU version");
  AudioClip clip;
  clip.sample_rate = static_cast<int>(r.u32());
  clip.channels = 1;
  clip.samples = r.f32s(r.u32());
  clip.source_id = std::move(source_id);
  return clip;
}

AudioClip LoadCanonicalAudio(const std::filesystem::path& path, const IngestOptions& opt) {
  if (path.extension() == ".abau") {
    if (!std::filesystem::exists(path)) Fail(Errc::kMissingAudioFile, path.string());
    return DecodeCanonical(io::ReadFile(path), path.stem().string());
  }
  return IngestToCanonical(DecodeWavFile(path), opt);
}

}  // namespace ausculta
