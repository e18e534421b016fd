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

#include "ausculta/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ausculta/adam.hpp"
#include "ausculta/binary_io.hpp"
#include "ausculta/checkpoint.hpp"
#include "ausculta/error.hpp"
#include "ausculta/pipeline.hpp"
#include "ausculta/simd/kernels.hpp"

namespace ausculta {
namespace fs = std::filesystem;
using nlohmann::json;

LogMelSpectrogram ScaleSpectrogram(LogMelSpectrogram spec, double factor) {
  simd::Active().scale_f32(static_cast<float>(factor), spec.values.data(), spec.values.size());
  return spec;
}

ContrastiveBatch MakePairs(const std::vector<const LogMelSpectrogram*>& specs,
                           const std::vector<std::string>& record_ids,
                           const std::string& dataset_id, int crop_ms,
                           const AugmentConfig& aug, Rng& rng, const PairOptions& opt) {
  if (specs.size() != record_ids.size()) Fail(Errc::kDimMismatch, "specs/record_ids length");
  ContrastiveBatch b;
  b.dataset_id = dataset_id;
  b.record_ids = record_ids;
  auto view = [&](const LogMelSpectrogram& s, std::vector<LogMelSpectrogram>& dst,
                  std::vector<std::size_t>& offsets) {
    std::size_t off = 0;
    LogMelSpectrogram crop = RandomCrop(s, crop_ms, rng, &off);
    if (opt.augment && aug.loudness) {
      if (!(aug.loudness_lo > 0.0 && aug.loudness_lo <= aug.loudness_hi)) {
        Fail(Errc::kInvalidArgument, "loudness bounds need 0 < lo <= hi");
      }
      crop = ScaleSpectrogram(std::move(crop), rng.Uniform(aug.loudness_lo, aug.loudness_hi));
    }
    if (opt.augment && aug.spec_augment) crop = SpecAugment(std::move(crop), aug.spec_aug, rng);
    dst.push_back(std::move(crop));
    offsets.push_back(off);
  };
  for (const LogMelSpectrogram* s : specs) {
    view(*s, b.anchors, b.anchor_offsets);
    view(*s, b.positives, b.positive_offsets);
  }
  return b;
}

ContrastiveResult ContrastiveLoss(const Tensor& sims) {
  if (sims.rank() != 2 || sims.dim(0) != sims.dim(1) || sims.dim(0) < 2) {
    Fail(Errc::kDimMismatch, "contrastive loss needs a square N>=2 matrix, got " +
                                 ShapeString(sims.shape));
  }
  if (!sims.AllFinite()) Fail(Errc::kNonFiniteLoss, "non-finite similarities");
  const int n = sims.dim(0);
  ContrastiveResult r;
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    const auto row = sims.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    r.loss += mx + std::log(z) - row[i];
    bool strict = true;
    for (int j = 0; j < n; ++j) strict = strict && (j == i || row[j] < row[i]);
    correct += strict;
  }
  r.loss /= n;
  r.accuracy = static_cast<double>(correct) / n;
  if (!std::isfinite(r.loss)) Fail(Errc::kNonFiniteLoss, "contrastive loss is not finite");
  return r;
}

namespace {

template <typename T>
T Get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    Fail(Errc::kSchemaError, std::string("config field '") + key + "': " + e.what());
  }
}

void CheckKeys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) Fail(Errc::kSchemaError, std::string(where) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
      Fail(Errc::kSchemaError, std::string(where) + ": unknown key '" + k + "'");
    }
  }
}

}  // namespace

PretrainConfig ParsePretrainConfig(const json& j, const fs::path& base_dir) {
  CheckKeys(j,
            {"corpus", "batch_size", "epochs", "lr", "lr_decay", "dims", "crop_table", "augment",
             "features", "seed", "out_dir", "val_fraction", "val_trials"},
            "pretrain config");
  PretrainConfig c;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  if (!j.contains("corpus")) Fail(Errc::kSchemaError, "pretrain config: 'corpus' is required");
  c.corpus = resolve(Get<std::string>(j, "corpus", ""));
  c.batch_size = Get(j, "batch_size", c.batch_size);
  c.epochs = Get(j, "epochs", c.epochs);
  c.lr = Get(j, "lr", c.lr);
  c.lr_decay = Get(j, "lr_decay", c.lr_decay);
  c.seed = Get(j, "seed", c.seed);
  c.out_dir = resolve(Get<std::string>(j, "out_dir", c.out_dir.string()));
  c.val_fraction = Get(j, "val_fraction", c.val_fraction);
  c.val_trials = Get(j, "val_trials", c.val_trials);
  if (j.contains("dims")) {
    const json& d = j["dims"];
    CheckKeys(d, {"d_e", "d_p", "n_mels", "conv1_channels", "conv2_channels"}, "dims");
    c.dims.d_e = Get(d, "d_e", c.dims.d_e);
    c.dims.d_p = Get(d, "d_p", c.dims.d_p);
    c.dims.n_mels = Get(d, "n_mels", c.dims.n_mels);
    c.dims.conv1_channels = Get(d, "conv1_channels", c.dims.conv1_channels);
    c.dims.conv2_channels = Get(d, "conv2_channels", c.dims.conv2_channels);
  }
  if (j.contains("crop_table")) {
    const json& t = j["crop_table"];
    CheckKeys(t, {"default_ms", "by_dataset"}, "crop_table");
    c.augment.crops.default_ms = Get(t, "default_ms", c.augment.crops.default_ms);
    if (t.contains("by_dataset")) {
      c.augment.crops.by_dataset =
          Get<std::map<std::string, int>>(t, "by_dataset", c.augment.crops.by_dataset);
    }
  }
  if (j.contains("augment")) {
    const json& a = j["augment"];
    CheckKeys(a,
              {"loudness", "loudness_range", "spec_augment", "time_masks", "max_time_frames",
               "freq_masks", "max_freq_bands"},
              "augment");
    c.augment.loudness = Get(a, "loudness", c.augment.loudness);
    if (a.contains("loudness_range")) {
      auto r = Get<std::vector<double>>(a, "loudness_range", {});
      if (r.size() != 2) Fail(Errc::kSchemaError, "augment.loudness_range needs [lo, hi]");
      c.augment.loudness_lo = r[0];
      c.augment.loudness_hi = r[1];
    }
    c.augment.spec_augment = Get(a, "spec_augment", c.augment.spec_augment);
    auto& s = c.augment.spec_aug;
    s.n_time_masks = Get(a, "time_masks", s.n_time_masks);
    s.max_time_frames = Get(a, "max_time_frames", s.max_time_frames);
    s.n_freq_masks = Get(a, "freq_masks", s.n_freq_masks);
    s.max_freq_bands = Get(a, "max_freq_bands", s.max_freq_bands);
  }
  if (j.contains("features")) {
    const json& f = j["features"];
    CheckKeys(f, {"n_mels", "f_min", "f_max", "mel_scale"}, "features");
    c.features.n_mels = Get(f, "n_mels", c.features.n_mels);
    c.features.f_min = Get(f, "f_min", c.features.f_min);
    c.features.f_max = Get(f, "f_max", c.features.f_max);
    const std::string scale = Get<std::string>(f, "mel_scale", "htk");
    if (scale != "htk" && scale != "slaney") {
      Fail(Errc::kSchemaError, "features.mel_scale must be htk or slaney");
    }
    c.features.mel_scale = scale == "htk" ? MelScale::kHtk : MelScale::kSlaney;
    c.dims.n_mels = c.features.n_mels;
  }
  if (c.epochs < 0) Fail(Errc::kSchemaError, "epochs must be >= 0");
  if (c.lr < 0.0 || c.lr_decay <= 0.0) Fail(Errc::kSchemaError, "lr must be >= 0, lr_decay > 0");
  if (c.val_trials < 1) Fail(Errc::kSchemaError, "val_trials must be >= 1");
  if (c.batch_size < 2) {
    Fail(Errc::kBatchSizeTooSmall, "batch_size " + std::to_string(c.batch_size) + " < 2");
  }
  return c;
}

json PretrainConfigToJson(const PretrainConfig& c) {
  json j = json::object();
  j["corpus"] = c.corpus.string();
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["lr_decay"] = c.lr_decay;
  j["dims"] = {{"d_e", c.dims.d_e},
               {"d_p", c.dims.d_p},
               {"n_mels", c.dims.n_mels},
               {"conv1_channels", c.dims.conv1_channels},
               {"conv2_channels", c.dims.conv2_channels}};
  j["crop_table"] = {{"default_ms", c.augment.crops.default_ms},
                     {"by_dataset", c.augment.crops.by_dataset}};
  j["augment"] = {{"loudness", c.augment.loudness},
                  {"loudness_range", {c.augment.loudness_lo, c.augment.loudness_hi}},
                  {"spec_augment", c.augment.spec_augment},
                  {"time_masks", c.augment.spec_aug.n_time_masks},
                  {"max_time_frames", c.augment.spec_aug.max_time_frames},
                  {"freq_masks", c.augment.spec_aug.n_freq_masks},
                  {"max_freq_bands", c.augment.spec_aug.max_freq_bands}};
  j["features"] = {{"n_mels", c.features.n_mels},
                   {"f_min", c.features.f_min},
                   {"f_max", c.features.f_max},
                   {"mel_scale", c.features.mel_scale == MelScale::kHtk ? "htk" : "slaney"}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir.string();
  j["val_fraction"] = c.val_fraction;
  j["val_trials"] = c.val_trials;
  return j;
}

std::string TrainingLog::ToCsv() const {
  std::ostringstream os;
  os << "epoch,split,dataset_id,loss,accuracy\n" << std::setprecision(17);
  for (const LogRow& r : rows) {
    os << r.epoch << ',' << r.split << ',' << r.dataset_id << ',' << r.loss << ',' << r.accuracy
       << '\n';
  }
  return os.str();
}

namespace {

std::vector<double> Column(const std::vector<LogRow>& rows, const std::string& split,
                           bool accuracy) {
  std::vector<double> out;
  for (const LogRow& r : rows) {
    if (r.split == split && r.dataset_id == "all") out.push_back(accuracy ? r.accuracy : r.loss);
  }
  return out;
}

struct Accum {
  double loss = 0.0, acc = 0.0;
  std::size_t n = 0;
  void Add(const ContrastiveResult& r, std::size_t rows) {
    loss += r.loss * rows;
    acc += r.accuracy * rows;
    n += rows;
  }
};

nn::Var Forward(nn::Graph& g, const nn::Model& model, const ContrastiveBatch& b, bool train) {
  nn::Var za = model.ProjectVar(g, model.EncodeBatch(g, b.anchors, train), train);
  nn::Var zp = model.ProjectVar(g, model.EncodeBatch(g, b.positives, train), train);
  return model.Similarities(g, za, zp, train);
}

std::vector<const LogMelSpectrogram*> Lookup(
    const std::map<std::string, LogMelSpectrogram>& features,
    const std::vector<std::string>& ids) {
  std::vector<const LogMelSpectrogram*> out;
  for (const auto& id : ids) {
    auto it = features.find(id);
    if (it == features.end()) Fail(Errc::kMissingAudioFile, "no features for record " + id);
    out.push_back(&it->second);
  }
  return out;
}

// Validation batches: consecutive groups of batch_size in id order; a
// trailing singleton joins the previous group.
std::vector<std::vector<std::string>> ValidationGroups(const Corpus& corpus,
                                                       const std::string& dataset,
                                                       int batch_size) {
  std::vector<std::vector<std::string>> groups;
  for (const RecordEntry* r : corpus.Select(dataset, Split::kValidation)) {
    if (groups.empty() || groups.back().size() == static_cast<std::size_t>(batch_size)) {
      groups.emplace_back();
    }
    groups.back().push_back(r->record_id);
  }
  if (groups.size() >= 2 && groups.back().size() == 1) {
    groups[groups.size() - 2].push_back(groups.back()[0]);
    groups.pop_back();
  }
  if (!groups.empty() && groups.back().size() < 2) groups.pop_back();
  return groups;
}

}  // namespace

std::vector<double> TrainingLog::EpochTrainLoss() const { return Column(rows, "train", false); }
std::vector<double> TrainingLog::ValidationAccuracy() const {
  return Column(rows, "validation", true);
}
std::vector<double> TrainingLog::ValidationLoss() const { return Column(rows, "validation", false); }

PretrainResult TrainContrastive(const Corpus& input,
                                const std::map<std::string, LogMelSpectrogram>& features,
                                const PretrainConfig& cfg) {
  const Corpus corpus = SplitValidation(input, cfg.val_fraction, cfg.seed);
  nn::Model model(cfg.dims, cfg.seed);
  nn::Adam adam(model.Parameters());
  PretrainResult result;
  TrainingLog& log = result.log;
  const auto datasets = corpus.DatasetIds();

  auto validate = [&](int epoch) -> bool {
    Accum all;
    for (const auto& ds : datasets) {
      const auto groups = ValidationGroups(corpus, ds, cfg.batch_size);
      if (groups.empty()) continue;
      Accum acc;
      for (int trial = 0; trial < cfg.val_trials; ++trial) {
        Rng rng = Rng::Stream(cfg.seed, "val:" + ds, static_cast<std::uint64_t>(trial));
        for (const auto& ids : groups) {
          ContrastiveBatch b = MakePairs(Lookup(features, ids), ids, ds,
                                         cfg.augment.crops.For(ds), cfg.augment, rng, {false});
          nn::Graph g;
          ContrastiveResult r = ContrastiveLoss(g.value(Forward(g, model, b, false)));
          acc.Add(r, ids.size());
          all.Add(r, ids.size());
        }
      }
      log.rows.push_back({epoch, "validation", ds, acc.loss / acc.n, acc.acc / acc.n});
    }
    if (all.n == 0) return false;
    log.rows.push_back({epoch, "validation", "all", all.loss / all.n, all.acc / all.n});
    return true;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = nn::LrForEpoch(cfg.lr, cfg.lr_decay, epoch);
    const BatchPlan plan = PlanBatches(corpus, cfg.batch_size, cfg.augment.crops,
                                       SplitMix64(cfg.seed) ^ static_cast<std::uint64_t>(epoch));
    if (plan.batches.empty()) {
      Fail(Errc::kNoLabeledData, "no dataset has batch_size training records");
    }
    std::map<std::string, Accum> per_ds;
    Accum all;
    for (std::size_t bi = 0; bi < plan.batches.size(); ++bi) {
      const Batch& batch = plan.batches[bi];
      try {
        Rng rng = Rng::Stream(cfg.seed, "train:" + std::to_string(epoch), bi);
        ContrastiveBatch b = MakePairs(Lookup(features, batch.record_ids), batch.record_ids,
                                       batch.dataset_id, batch.crop_ms, cfg.augment, rng);
        nn::Graph g;
        double accuracy = 0.0;
        nn::Var loss = nn::InfoNceLoss(g, Forward(g, model, b, true), &accuracy);
        const ContrastiveResult r{g.value(loss)[0], accuracy};
        g.Backward(loss);
        adam.Step(lr);
        log.step_losses.push_back(r.loss);
        per_ds[batch.dataset_id].Add(r, batch.record_ids.size());
        all.Add(r, batch.record_ids.size());
      } catch (const Error& e) {
        Fail(e.code(), "epoch " + std::to_string(epoch) + " batch " + std::to_string(bi) + " (" +
                           batch.dataset_id + "): " + e.what());
      }
    }
    for (const auto& [ds, a] : per_ds) {
      log.rows.push_back({epoch, "train", ds, a.loss / a.n, a.acc / a.n});
    }
    log.rows.push_back({epoch, "train", "all", all.loss / all.n, all.acc / all.n});

    if (validate(epoch)) {
      const LogRow& v = log.rows.back();
      const bool better = log.best_epoch < 0 || v.accuracy > log.best_accuracy ||
                          (v.accuracy == log.best_accuracy && v.loss < log.best_loss);
      if (better) {
        log.best_epoch = epoch;
        log.best_accuracy = v.accuracy;
        log.best_loss = v.loss;
        result.best = model.State();
      }
    }
  }
  result.last = model.State();
  if (result.best.empty()) result.best = result.last;
  return result;
}

namespace {

std::map<std::string, LogMelSpectrogram> LoadAllFeatures(const Corpus& corpus,
                                                         const FeatureConfig& fc) {
  const Featurizer featurizer(fc);
  std::map<std::string, LogMelSpectrogram> out;
  for (const RecordEntry& r : corpus.records) {
    out.emplace(r.record_id, LoadFeatures(corpus, r, featurizer));
  }
  return out;
}

}  // namespace

PretrainResult RunPretraining(const PretrainConfig& cfg) {
  const Corpus corpus = LoadManifest(cfg.corpus);
  const auto features = LoadAllFeatures(corpus, cfg.features);
  PretrainResult result = TrainContrastive(corpus, features, cfg);
  fs::create_directories(cfg.out_dir);
  SaveCheckpoint(cfg.out_dir / "checkpoint.abcp", result.best);
  SaveCheckpoint(cfg.out_dir / "last.abcp", result.last);
  const std::string csv = result.log.ToCsv();
  io::WriteFileAtomic(cfg.out_dir / "train_log.csv", {csv.data(), csv.size()});
  return result;
}

std::vector<EmbeddingRow> ExportEmbeddings(const nn::Model& model, const Corpus& corpus,
                                           const std::map<std::string, LogMelSpectrogram>& features,
                                           const CropTable& crops, int n_crops,
                                           std::uint64_t seed) {
  std::vector<EmbeddingRow> rows;
  for (const RecordEntry& rec : corpus.records) {
    auto it = features.find(rec.record_id);
    if (it == features.end()) continue;
    Rng rng = Rng::Stream(seed, "embed:" + rec.record_id);
    std::vector<LogMelSpectrogram> views;
    for (int k = 0; k < n_crops; ++k) {
      views.push_back(RandomCrop(it->second, crops.For(rec.dataset_id), rng));
    }
    nn::Graph g;
    const Tensor& z = g.value(model.ProjectVar(g, model.EncodeBatch(g, views, false), false));
    for (int k = 0; k < n_crops; ++k) {
      const auto r = z.row(k);
      rows.push_back({rec.record_id, k, {r.begin(), r.end()}});
    }
  }
  return rows;
}

}  // namespace ausculta
