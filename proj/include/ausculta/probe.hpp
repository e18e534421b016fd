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

// Benchmark protocol: fixed-length chunking, a single dense head trained on
// frozen (linear) or trainable (full) encoder outputs, and per-recording
// aggregation of segment logits.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ausculta/corpus.hpp"
#include "ausculta/model.hpp"

namespace ausculta {

// ceil(duration / chunk_s) consecutive segments, the last one zero-padded;
// never fewer than one.
std::vector<AudioClip> ChunkForTask(const AudioClip& clip, const TaskSpec& task);

enum class ProbeMode { kLinear, kFull };
enum class ProbeSpace { kEncoder, kProjector };
ProbeMode ParseProbeMode(std::string_view s);

struct ProbeConfig {
  ProbeMode mode = ProbeMode::kLinear;
  ProbeSpace space = ProbeSpace::kEncoder;
  int epochs = 64;
  double lr = 1e-4;
  double lr_decay = 0.99;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct ProbeHead {
  std::string task_id;
  nn::Parameter weight;  // [K, d]
  nn::Parameter bias;    // [K]

  ProbeHead() = default;
  // Zero-initialized.
  ProbeHead(const TaskSpec& task, int in_dim);
  int in_dim() const { return weight.value.dim(1); }
  int n_outputs() const { return weight.value.dim(0); }
  nn::NamedTensors State() const;  // "probe.<task>.weight|bias"
  static ProbeHead FromState(const nn::NamedTensors& state, const std::string& task_id);
};

// One row per segment; rows of one recording share its label.
struct SegmentSet {
  std::vector<std::string> record_ids;  // per segment
  std::vector<LogMelSpectrogram> specs;
  std::vector<LabelValue> labels;       // per segment
};

// Chunks and featurizes every record of the given splits that carries a
// label for the task.
SegmentSet BuildSegments(const Corpus& corpus, const TaskSpec& task,
                         const std::vector<Split>& splits, const Featurizer& featurizer,
                         const IngestOptions& ingest = {});

// Frozen-model embeddings, [n_segments, d].
Tensor EmbedSegments(const nn::Model& model, const std::vector<LogMelSpectrogram>& specs,
                     ProbeSpace space);

// Trains a zero-initialized head directly on fixed embeddings.
ProbeHead TrainHead(const Tensor& x, const std::vector<LabelValue>& labels, const TaskSpec& task,
                    const ProbeConfig& cfg);

// Linear mode leaves the model untouched; full mode updates encoder weights
// in place (the projector is never trained here). Throws NoLabeledData.
ProbeHead TrainProbe(nn::Model& model, const TaskSpec& task, const SegmentSet& train,
                     const ProbeConfig& cfg);

struct RecordPrediction {
  std::string record_id;
  std::vector<double> probs;   // BC/MC/ML
  std::optional<double> count;  // R, clamped >= 0
  std::vector<std::vector<double>> segment_logits;
};

struct PredictionSet {
  std::string task_id;
  std::vector<RecordPrediction> records;  // first-appearance order
};

// Mean of segment logits per recording, then softmax / sigmoid / identity.
PredictionSet AggregateLogits(const TaskSpec& task, const std::vector<std::string>& record_ids,
                              const Tensor& logits);
PredictionSet Predict(const nn::Model& model, const ProbeHead& head, const TaskSpec& task,
                      const SegmentSet& segments, ProbeSpace space = ProbeSpace::kEncoder);
Tensor HeadLogits(const ProbeHead& head, const Tensor& x);

std::string PredictionsToJsonl(const PredictionSet& preds);
PredictionSet PredictionsFromJsonl(std::string_view text);

}  // namespace ausculta
