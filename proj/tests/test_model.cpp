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
#include <fstream>

#include "ausculta/adam.hpp"
#include "ausculta/checkpoint.hpp"
#include "ausculta/error.hpp"
#include "ausculta/model.hpp"
#include "ausculta/rng.hpp"
#include "test_util.hpp"

namespace {

using namespace ausculta;
using namespace ausculta::nn;

LogMelSpectrogram RandomSpec(std::size_t frames, int mels, std::uint64_t seed) {
  Rng rng(seed);
  LogMelSpectrogram s;
  s.n_frames = frames;
  s.n_mels = mels;
  for (std::size_t i = 0; i < frames * mels; ++i) s.values.push_back(static_cast<float>(rng.Uniform(0, 1)));
  return s;
}

Parameter* Find(Model& m, const std::string& name) {
  for (Parameter* p : m.Parameters())
    if (p->name == name) return p;
  return nullptr;
}

TEST(Model, ParameterNamesAndShapes) {
  Model m;
  std::vector<std::string> names;
  for (const Parameter* p : static_cast<const Model&>(m).Parameters()) names.push_back(p->name);
  const std::vector<std::string> expected{"encoder.conv1.weight", "encoder.conv1.bias",
                                          "encoder.conv2.weight", "encoder.conv2.bias",
                                          "encoder.fc.weight",    "encoder.fc.bias",
                                          "projector.weight",     "projector.bias",
                                          "bilinear.W"};
  EXPECT_EQ(names, expected);
  EXPECT_EQ(m.encoder().out_dim(), 128);
  EXPECT_EQ(m.bilinear().value.shape, (std::vector<int>{32, 32}));
}

TEST(Model, ZeroWeightsGiveZeroEmbedding) {
  Model m;
  for (Parameter* p : m.EncoderParameters())
    for (double& v : p->value.data) v = 0.0;
  for (double v : Encode(m, RandomSpec(20, 64, 1))) EXPECT_EQ(v, 0.0);
}

TEST(Model, EmbeddingDimIndependentOfLength) {
  Model m(ModelDims{}, 4);
  EXPECT_EQ(Encode(m, RandomSpec(5, 64, 1)).size(), 128u);
  EXPECT_EQ(Encode(m, RandomSpec(93, 64, 2)).size(), 128u);
}

TEST(Model, WrongMelCountIsRejected) {
  Model m;
  EXPECT_THROW(Encode(m, RandomSpec(10, 32, 1)), Error);
}

TEST(Model, IdentityProjectorPassesThrough) {
  ModelDims d;
  d.d_p = d.d_e;
  Model m(d, 1);
  Parameter* w = Find(m, "projector.weight");
  ASSERT_NE(w, nullptr);
  for (std::size_t i = 0; i < w->value.size(); ++i) w->value[i] = (i % (d.d_e + 1) == 0) ? 1.0 : 0.0;
  std::vector<double> x(d.d_e);
  for (int i = 0; i < d.d_e; ++i) x[i] = 0.01 * i - 0.3;
  const std::vector<double> z = Project(m, x);
  for (int i = 0; i < d.d_e; ++i) EXPECT_NEAR(z[i], x[i], 1e-15);
}

TEST(Model, ProjectorRejectsWrongDim) {
  Model m;
  std::vector<double> x(17, 1.0);
  EXPECT_THROW(Project(m, x), Error);
}

TEST(Model, BilinearIdentityIsDotProduct) {
  Tensor eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const std::vector<double> u{1, 2, 3}, v{-1, 0.5, 2};
  EXPECT_DOUBLE_EQ(BilinearSimilarity(u, v, eye), -1 + 1 + 6);
}

TEST(Model, BilinearHandExample) {
  Tensor w({2, 2}, {0, 1, 0, 0});
  EXPECT_DOUBLE_EQ(BilinearSimilarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}, w), 1.0);
  EXPECT_DOUBLE_EQ(BilinearSimilarity(std::vector<double>{0, 1}, std::vector<double>{1, 0}, w), 0.0);
}

TEST(Model, BilinearTransposeSwapsArguments) {
  Rng rng(3);
  Tensor w({4, 4}), wt({4, 4});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      w[i * 4 + j] = rng.Uniform(-1, 1);
    }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) wt[i * 4 + j] = w[j * 4 + i];
  const std::vector<double> u{0.1, -0.4, 0.3, 0.9}, v{1.2, 0.2, -0.7, 0.05};
  EXPECT_NEAR(BilinearSimilarity(u, v, w), BilinearSimilarity(v, u, wt), 1e-14);
}

TEST(Model, SimilarityMatrixMatchesPairwiseBilinear) {
  Model m(ModelDims{}, 2);
  std::vector<LogMelSpectrogram> a{RandomSpec(20, 64, 1), RandomSpec(20, 64, 2)};
  std::vector<LogMelSpectrogram> b{RandomSpec(20, 64, 3), RandomSpec(20, 64, 4)};
  Graph g;
  Var za = m.ProjectVar(g, m.EncodeBatch(g, a, false), false);
  Var zb = m.ProjectVar(g, m.EncodeBatch(g, b, false), false);
  const Tensor s = g.value(m.Similarities(g, za, zb, false));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double ref = BilinearSimilarity(g.value(za).row(i), g.value(zb).row(j), m.bilinear().value);
      EXPECT_NEAR(s[i * 2 + j], ref, 1e-12);
    }
}

TEST(Model, InitIsDeterministicPerSeed) {
  Model a(ModelDims{}, 7), b(ModelDims{}, 7), c(ModelDims{}, 8);
  EXPECT_EQ(a.State(), b.State());
  EXPECT_NE(a.State(), c.State());
}

TEST(Model, KaimingBound) {
  const Tensor t = KaimingUniform({64, 100}, 100, 1, "k");
  const double bound = std::sqrt(6.0 / 100);
  double lo = 1, hi = -1;
  for (double v : t.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_GE(lo, -bound);
  EXPECT_LE(hi, bound);
  EXPECT_LT(lo, -0.9 * bound);
  EXPECT_GT(hi, 0.9 * bound);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Parameter p{"p", Tensor({3}, {1, 2, 3}), Tensor({3})};
  Adam opt({&p});
  opt.Step(1e-3);
  EXPECT_EQ(p.value.data, (std::vector<double>{1, 2, 3}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Parameter p{"p", Tensor({2}, {1.0, 1.0}), Tensor({2}, {0.5, -3.0})};
  Adam opt({&p});
  opt.Step(1e-3);
  EXPECT_NEAR(p.value[0], 1.0 - 1e-3, 1e-10);
  EXPECT_NEAR(p.value[1], 1.0 + 1e-3, 1e-10);
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(Adam, ZeroLearningRateIsIdentity) {
  Parameter p{"p", Tensor({2}, {1.0, -1.0}), Tensor({2}, {0.5, 0.5})};
  Adam opt({&p});
  for (int i = 0; i < 5; ++i) {
    p.grad = Tensor({2}, {0.5, 0.5});
    opt.Step(0.0);
  }
  EXPECT_EQ(p.value.data, (std::vector<double>{1.0, -1.0}));
}

TEST(Adam, NonFiniteGradientFails) {
  Parameter p{"p", Tensor({1}, {1.0}), Tensor({1}, {std::nan("")})};
  Adam opt({&p});
  try {
    opt.Step(1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNonFiniteGradient);
  }
}

TEST(Adam, LearningRateSchedule) {
  EXPECT_DOUBLE_EQ(LrForEpoch(1e-4, 0.99, 0), 1e-4);
  EXPECT_NEAR(LrForEpoch(1e-4, 0.99, 1), 9.9e-5, 1e-18);
  EXPECT_NEAR(LrForEpoch(1e-4, 0.99, 63), 5.31e-5, 1e-7);
}

TEST(Checkpoint, RoundTripIsByteExact) {
  Model m(ModelDims{}, 5);
  const auto bytes = EncodeCheckpoint(m.State());
  const NamedTensors back = DecodeCheckpoint(bytes);
  EXPECT_EQ(EncodeCheckpoint(back), bytes);
  const Model m2 = Model::FromState(back);
  EXPECT_EQ(EncodeCheckpoint(m2.State()), bytes);
}

TEST(Checkpoint, FileRoundTripAndPrefix) {
  const auto dir = ScratchDir("ckpt");
  Model m(ModelDims{}, 5);
  SaveCheckpoint(dir / "m.abcp", m.State());
  const NamedTensors back = LoadCheckpoint(dir / "m.abcp");
  EXPECT_EQ(back.size(), m.State().size());
  const NamedTensors enc = SelectPrefix(back, "encoder.");
  EXPECT_EQ(enc.size(), 6u);
}

TEST(Checkpoint, CorruptionIsDetected) {
  Model m(ModelDims{}, 5);
  auto bytes = EncodeCheckpoint(m.State());
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(DecodeCheckpoint(truncated), Error);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(DecodeCheckpoint(trailing), Error);
  bytes[0] = 'X';
  EXPECT_THROW(DecodeCheckpoint(bytes), Error);
}

}  // namespace
