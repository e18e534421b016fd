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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ausculta/error.hpp"
#include "ausculta/features.hpp"

using namespace ausculta;

namespace {

AudioClip Noise(std::size_t n, unsigned seed, int rate = 16000) {
  std::mt19937 g(seed);
  std::uniform_real_distribution<float> u(-0.5f, 0.5f);
  AudioClip c;
  c.sample_rate = rate;
  for (std::size_t i = 0; i < n; ++i) c.samples.push_back(u(g));
  return c;
}

// Direct O(N^2) DFT of one periodic-Hann-windowed frame.
std::vector<double> NaivePower(const AudioClip& c, std::size_t start, int win, int n_fft) {
  std::vector<double> out(n_fft / 2 + 1);
  for (int k = 0; k <= n_fft / 2; ++k) {
    double re = 0, im = 0;
    for (int n = 0; n < win; ++n) {
      const double w = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * n / win);
      const double x = w * c.samples[start + n];
      re += x * std::cos(2 * std::numbers::pi * k * n / n_fft);
      im -= x * std::sin(2 * std::numbers::pi * k * n / n_fft);
    }
    out[k] = re * re + im * im;
  }
  return out;
}

}  // namespace

TEST(MelScale, HtkRoundTripAndAnchor) {
  EXPECT_NEAR(HzToMel(1000.0), 999.99, 0.1);
  for (double hz : {0.0, 55.0, 440.0, 3999.0, 8000.0}) {
    EXPECT_NEAR(MelToHz(HzToMel(hz)), hz, 1e-9);
    EXPECT_NEAR(MelToHz(HzToMel(hz, MelScale::kSlaney), MelScale::kSlaney), hz, 1e-9);
  }
}

TEST(FilterBank, ShapeAndPeaks) {
  const MelFilterBank fb = BuildFilterBank(64, 1024, 16000, 0, 8000);
  EXPECT_EQ(fb.n_bins(), 513);
  for (int m = 0; m < 64; ++m) {
    double mx = 0;
    for (double w : fb.row(m)) {
      EXPECT_GE(w, 0.0);
      mx = std::max(mx, w);
    }
    EXPECT_GT(mx, 0.0);
    EXPECT_LE(mx, 1.0);
  }
}

TEST(FilterBank, RejectsBadRanges) {
  auto code = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::kInvalidArgument;
  };
  EXPECT_EQ(code([] { BuildFilterBank(64, 1024, 16000, 100, 50); }), Errc::kInvalidFrequencyRange);
  EXPECT_EQ(code([] { BuildFilterBank(64, 1024, 16000, 0, 9000); }), Errc::kInvalidFrequencyRange);
  EXPECT_EQ(code([] { BuildFilterBank(256, 64, 16000, 0, 8000); }), Errc::kInvalidFrequencyRange);
}

TEST(PowerStft, FrameCountFormula) {
  const AudioClip c = Noise(16000, 1);
  const PowerSpectrogram p = PowerStft(c, 1024, 512, 1024);
  EXPECT_EQ(p.n_frames, 1u + (16000u - 1024u) / 512u);
  EXPECT_EQ(p.n_bins, 513u);
  EXPECT_THROW(PowerStft(Noise(1000, 2), 1024, 512, 1024), Error);
}

TEST(PowerStft, MatchesNaiveDft) {
  const AudioClip c = Noise(3000, 3);
  const PowerSpectrogram p = PowerStft(c, 256, 128, 256);
  for (std::size_t t : {0u, 5u, 10u}) {
    const auto ref = NaivePower(c, t * 128, 256, 256);
    for (std::size_t k = 0; k < ref.size(); ++k) {
      EXPECT_NEAR(p.row(t)[k], ref[k], 1e-9 * (1.0 + ref[k])) << "frame " << t << " bin " << k;
    }
  }
}

TEST(PowerStft, ZeroPaddedFftMatchesNaive) {
  const AudioClip c = Noise(1000, 4);
  const PowerSpectrogram p = PowerStft(c, 100, 50, 256);
  const auto ref = NaivePower(c, 50, 100, 256);
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(p.row(1)[k], ref[k], 1e-9 * (1 + ref[k]));
}

TEST(PowerStft, ParsevalPerFrame) {
  const AudioClip c = Noise(2048, 5);
  const PowerSpectrogram p = PowerStft(c, 1024, 512, 1024);
  for (std::size_t t = 0; t < p.n_frames; ++t) {
    double time = 0;
    for (int n = 0; n < 1024; ++n) {
      const double w = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * n / 1024);
      time += std::pow(w * c.samples[t * 512 + n], 2);
    }
    // One-sided spectrum: interior bins count twice.
    double freq = p.row(t)[0] + p.row(t)[512];
    for (int k = 1; k < 512; ++k) freq += 2 * p.row(t)[k];
    EXPECT_NEAR(freq / 1024, time, 1e-9 * time);
  }
}

TEST(LogMel, SineLandsInExpectedBand) {
  AudioClip c;
  c.sample_rate = 16000;
  for (int i = 0; i < 16000; ++i) c.samples.push_back(0.5f * std::sin(2 * std::numbers::pi * 1000 * i / 16000));
  const Featurizer f;
  const LogMelSpectrogram s = f(c);
  EXPECT_EQ(s.n_mels, 64);
  int best = 0;
  for (int m = 1; m < 64; ++m) {
    if (s.at(10, m) > s.at(10, best)) best = m;
  }
  // Filter centres: the band whose centre is nearest 1 kHz.
  const double step = HzToMel(8000.0) / 65;
  const int expect = static_cast<int>(std::lround(HzToMel(1000.0) / step)) - 1;
  EXPECT_NEAR(best, expect, 1);
}

TEST(LogMel, ValuesAreLogOfFloorWhenSilent) {
  AudioClip c;
  c.sample_rate = 16000;
  c.samples.assign(2048, 0.0f);
  const MelFilterBank fb = BuildFilterBank(64, 1024, 16000, 0, 8000);
  const LogMelSpectrogram s = LogMel(c, fb);
  for (float v : s.values) EXPECT_NEAR(v, std::log(1e-10), 1e-4);
  const LogMelSpectrogram n = MinMaxNormalize(s);
  for (float v : n.values) EXPECT_EQ(v, 0.0f);
}

TEST(MinMax, WholeAndPerBand) {
  LogMelSpectrogram s;
  s.n_frames = 2;
  s.n_mels = 2;
  s.values = {1, 10, 3, 20};
  const auto w = MinMaxNormalize(s);
  EXPECT_FLOAT_EQ(w.values[0], 0.0f);
  EXPECT_FLOAT_EQ(w.values[3], 1.0f);
  const auto b = MinMaxNormalize(s, NormScope::kPerBand);
  EXPECT_FLOAT_EQ(b.values[0], 0.0f);
  EXPECT_FLOAT_EQ(b.values[2], 1.0f);
  EXPECT_FLOAT_EQ(b.values[1], 0.0f);
  EXPECT_FLOAT_EQ(b.values[3], 1.0f);
}

TEST(FeatureCache, ByteExactRoundTrip) {
  const LogMelSpectrogram s = Featurizer{}(Noise(8000, 6));
  const auto bytes = EncodeFeatureCache(s);
  const auto back = DecodeFeatureCache(bytes);
  EXPECT_EQ(back.values, s.values);
  EXPECT_EQ(EncodeFeatureCache(back), bytes);
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(DecodeFeatureCache(bad), Error);
}
