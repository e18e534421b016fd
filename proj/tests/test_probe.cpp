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

#include "ausculta/checkpoint.hpp"
#include "ausculta/error.hpp"
#include "ausculta/metrics.hpp"
#include "ausculta/probe.hpp"
#include "ausculta/rng.hpp"
#include "test_util.hpp"

namespace {

using namespace ausculta;

AudioClip Silence(double seconds) {
  AudioClip c;
  c.sample_rate = 16000;
  c.samples.assign(static_cast<std::size_t>(seconds * 16000), 0.1f);
  return c;
}

std::uint64_t StateChecksum(const nn::Model& m) {
  const auto bytes = EncodeCheckpoint(m.State());
  return Fnv1a64(std::string_view(bytes.data(), bytes.size()));
}

TEST(Chunking, SegmentCounts) {
  const TaskSpec& eight = FindTask("T13");
  EXPECT_EQ(ChunkForTask(Silence(22.5), eight).size(), 3u);
  EXPECT_EQ(ChunkForTask(Silence(2.0), eight).size(), 1u);
  const TaskSpec& two = FindTask("T16");
  EXPECT_EQ(ChunkForTask(Silence(1.0), two).size(), 1u);
  EXPECT_EQ(ChunkForTask(Silence(4.0), two).size(), 2u);
}

TEST(Chunking, ShortTailIsZeroPadded) {
  const auto segs = ChunkForTask(Silence(10.0), FindTask("T13"));
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[1].samples.size(), 8u * 16000);
  EXPECT_FLOAT_EQ(segs[1].samples[2 * 16000 - 1], 0.1f);
  EXPECT_FLOAT_EQ(segs[1].samples[2 * 16000], 0.0f);
}

TEST(ProbeMode, Parse) {
  EXPECT_EQ(ParseProbeMode("linear"), ProbeMode::kLinear);
  EXPECT_EQ(ParseProbeMode("full"), ProbeMode::kFull);
  EXPECT_THROW(ParseProbeMode("frozen"), Error);
}

TEST(ProbeHead, ZeroInitAndStateRoundTrip) {
  ProbeHead h(FindTask("T2"), 16);
  EXPECT_EQ(h.n_outputs(), 5);
  for (double v : h.weight.value.data) EXPECT_EQ(v, 0.0);
  h.weight.value[3] = 1.25;
  const ProbeHead back = ProbeHead::FromState(h.State(), "T2");
  EXPECT_EQ(back.weight.value.data, h.weight.value.data);
  EXPECT_EQ(h.State().front().first, "probe.T2.weight");
}

// Two Gaussian blobs separated along a random direction.
struct Separable {
  Tensor x;
  std::vector<LabelValue> labels;
};

Separable MakeSeparable(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Separable s;
  s.x = Tensor({n, d});
  for (int i = 0; i < n; ++i) {
    const int cls = i % 2;
    for (int k = 0; k < d; ++k) s.x[i * d + k] = rng.Normal(0, 0.3);
    s.x[i * d] += cls ? 2.0 : -2.0;
    s.labels.emplace_back(static_cast<std::int64_t>(cls));
  }
  return s;
}

TEST(TrainHead, SeparableDataIsClassified) {
  const TaskSpec& task = FindTask("T13");
  const Separable train = MakeSeparable(128, 16, 1), test = MakeSeparable(64, 16, 2);
  const ProbeHead head = TrainHead(train.x, train.labels, task, ProbeConfig{});
  std::vector<std::string> ids;
  for (int i = 0; i < 64; ++i) ids.push_back("r" + std::to_string(i));
  const PredictionSet preds = AggregateLogits(task, ids, HeadLogits(head, test.x));
  std::map<std::string, LabelValue> labels;
  for (int i = 0; i < 64; ++i) labels.emplace(ids[i], test.labels[i]);
  EXPECT_GE(Evaluate(task, preds, labels).metrics.at("macro_f1"), 0.99);
}

TEST(TrainHead, DeterministicPerSeed) {
  const TaskSpec& task = FindTask("T13");
  const Separable train = MakeSeparable(70, 8, 3);
  ProbeConfig cfg;
  cfg.epochs = 3;
  const ProbeHead a = TrainHead(train.x, train.labels, task, cfg);
  const ProbeHead b = TrainHead(train.x, train.labels, task, cfg);
  EXPECT_EQ(a.weight.value.data, b.weight.value.data);
  cfg.seed = 1;
  const ProbeHead c = TrainHead(train.x, train.labels, task, cfg);
  EXPECT_NE(a.weight.value.data, c.weight.value.data);
}

TEST(TrainHead, RejectsEmptyLabels) {
  EXPECT_THROW(TrainHead(Tensor({0, 4}), {}, FindTask("T13"), ProbeConfig{}), Error);
}

TEST(Aggregate, OppositeLogitsGiveUniformProbabilities) {
  const TaskSpec& task = FindTask("T1");
  const Tensor logits({2, 3}, {1.5, -0.5, 2.0, -1.5, 0.5, -2.0});
  const PredictionSet p = AggregateLogits(task, {"r", "r"}, logits);
  ASSERT_EQ(p.records.size(), 1u);
  for (double v : p.records[0].probs) EXPECT_NEAR(v, 1.0 / 3.0, 1e-12);
}

TEST(Aggregate, MeanOfSegmentLogits) {
  const TaskSpec& task = FindTask("T10");  // multi-label: sigmoid of mean
  const int k = task.n_outputs();
  Rng rng(4);
  Tensor logits({3, k});
  for (double& v : logits.data) v = rng.Uniform(-3, 3);
  const PredictionSet p = AggregateLogits(task, {"a", "b", "a"}, logits);
  ASSERT_EQ(p.records.size(), 2u);
  EXPECT_EQ(p.records[0].record_id, "a");
  for (int c = 0; c < k; ++c) {
    const double mean = 0.5 * (logits[c] + logits[2 * k + c]);
    EXPECT_NEAR(p.records[0].probs[c], 1.0 / (1.0 + std::exp(-mean)), 1e-12);
  }
  EXPECT_EQ(p.records[0].segment_logits.size(), 2u);
}

TEST(Aggregate, RegressionClampsAtZero) {
  const TaskSpec& task = FindTask("T16");
  const PredictionSet p = AggregateLogits(task, {"a", "b"}, Tensor({2, 1}, {-3.0, 4.5}));
  EXPECT_DOUBLE_EQ(*p.records[0].count, 0.0);
  EXPECT_DOUBLE_EQ(*p.records[1].count, 4.5);
}

TEST(Predictions, JsonlRoundTripAndErrors) {
  const TaskSpec& task = FindTask("T1");
  const PredictionSet p = AggregateLogits(task, {"x", "y"}, Tensor({2, 3}, {1, 2, 3, 0, 0, 1}));
  const PredictionSet back = PredictionsFromJsonl(PredictionsToJsonl(p));
  EXPECT_EQ(back.task_id, "T1");
  ASSERT_EQ(back.records.size(), 2u);
  EXPECT_EQ(back.records[1].probs, p.records[1].probs);
  try {
    PredictionsFromJsonl(PredictionsToJsonl(p) + "{not json\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kSchemaError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(TrainProbe, LinearModeLeavesEncoderUntouched) {
  FixtureSpec fs;
  fs.n_records = 6;
  fs.seed = 2;
  const Corpus c = WriteFixture(fs, ScratchDir("probe_linear"));
  const TaskSpec& task = FindTask("T13");
  const SegmentSet train = BuildSegments(c, task, {Split::kTrain}, Featurizer{});
  ASSERT_EQ(train.specs.size(), 6u);
  nn::Model model(nn::ModelDims{}, 3);
  const std::uint64_t before = StateChecksum(model);
  ProbeConfig cfg;
  cfg.epochs = 4;
  cfg.lr = 1e-2;
  const ProbeHead head = TrainProbe(model, task, train, cfg);
  EXPECT_EQ(StateChecksum(model), before);
  double norm = 0.0;
  for (double v : head.weight.value.data) norm += v * v;
  EXPECT_GT(norm, 0.0);

  cfg.mode = ProbeMode::kFull;
  TrainProbe(model, task, train, cfg);
  EXPECT_NE(StateChecksum(model), before);
}

TEST(TrainProbe, PredictCoversEveryRecord) {
  FixtureSpec fs;
  fs.n_records = 4;
  fs.n_test = 4;
  fs.seed = 5;
  const Corpus c = WriteFixture(fs, ScratchDir("probe_predict"));
  const TaskSpec& task = FindTask("T13");
  const SegmentSet test = BuildSegments(c, task, {Split::kTest}, Featurizer{});
  nn::Model model(nn::ModelDims{}, 1);
  ProbeHead head(task, model.dims().d_e);
  const PredictionSet p = Predict(model, head, task, test);
  ASSERT_EQ(p.records.size(), 4u);
  for (const auto& r : p.records) EXPECT_NEAR(r.probs[0], 0.5, 1e-12);
}

}  // namespace
