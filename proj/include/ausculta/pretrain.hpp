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

// Contrastive instance discrimination: two crops of one recording are a
// positive pair, crops of other recordings in the batch are negatives.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ausculta/augment.hpp"
#include "ausculta/corpus.hpp"
#include "ausculta/model.hpp"

namespace ausculta {

struct ContrastiveBatch {
  std::string dataset_id;
  std::vector<std::string> record_ids;
  std::vector<LogMelSpectrogram> anchors;
  std::vector<LogMelSpectrogram> positives;
  std::vector<std::size_t> anchor_offsets;
  std::vector<std::size_t> positive_offsets;
};

struct PairOptions {
  bool augment = true;  // loudness + SpecAugment; validation turns this off
};

// Two independent crops of each spectrogram, each augmented independently.
ContrastiveBatch MakePairs(const std::vector<const LogMelSpectrogram*>& specs,
                           const std::vector<std::string>& record_ids,
                           const std::string& dataset_id, int crop_ms,
                           const AugmentConfig& aug, Rng& rng, const PairOptions& opt = {});

// Multiplies every value of spec by factor; the feature-domain counterpart
// of waveform gain (min-max normalization would cancel a gain applied
// before featurization).
LogMelSpectrogram ScaleSpectrogram(LogMelSpectrogram spec, double factor);

struct ContrastiveResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

// sims[i][j] = s(x_i, x_j+). Row-wise ln-sum-exp with max subtraction.
ContrastiveResult ContrastiveLoss(const Tensor& sims);

struct PretrainConfig {
  std::filesystem::path corpus;
  int batch_size = 4;
  int epochs = 20;
  double lr = 1e-4;
  double lr_decay = 0.99;
  nn::ModelDims dims;
  AugmentConfig augment;
  FeatureConfig features;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "pretrain_out";
  double val_fraction = 0.1;  // only for datasets without validation records
  int val_trials = 4;         // fixed-seed crop draws averaged per validation pass
};

// Throws SchemaError on wrong types or unknown keys. Relative paths resolve
// against base_dir.
PretrainConfig ParsePretrainConfig(const nlohmann::json& j,
                                   const std::filesystem::path& base_dir = {});
nlohmann::json PretrainConfigToJson(const PretrainConfig& cfg);

struct LogRow {
  int epoch = 0;
  std::string split;       // train | validation
  std::string dataset_id;  // or "all"
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainingLog {
  std::vector<double> step_losses;
  std::vector<LogRow> rows;
  int best_epoch = -1;
  double best_accuracy = 0.0;
  double best_loss = 0.0;

  std::string ToCsv() const;
  // Mean train loss of epoch e over all batches.
  std::vector<double> EpochTrainLoss() const;
  std::vector<double> ValidationAccuracy() const;  // "all" rows, by epoch
  std::vector<double> ValidationLoss() const;
};

struct PretrainResult {
  nn::NamedTensors best;  // best-validation state (last epoch if no validation)
  nn::NamedTensors last;
  TrainingLog log;
};

// In-memory form used by the CLI and by tests. Spectrograms are keyed by
// record id. Writes nothing.
PretrainResult TrainContrastive(const Corpus& corpus,
                                const std::map<std::string, LogMelSpectrogram>& features,
                                const PretrainConfig& cfg);

// Loads the manifest and features, trains, and writes out_dir/checkpoint.abcp
// (best), out_dir/last.abcp, out_dir/train_log.csv.
PretrainResult RunPretraining(const PretrainConfig& cfg);

struct EmbeddingRow {
  std::string record_id;
  int crop_index = 0;
  std::vector<double> z;  // projector space
};

std::vector<EmbeddingRow> ExportEmbeddings(const nn::Model& model, const Corpus& corpus,
                                           const std::map<std::string, LogMelSpectrogram>& features,
                                           const CropTable& crops, int n_crops,
                                           std::uint64_t seed);

}  // namespace ausculta
