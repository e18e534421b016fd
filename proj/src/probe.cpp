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

#include "ausculta/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ausculta/adam.hpp"
#include "ausculta/error.hpp"
#include "ausculta/rng.hpp"

namespace ausculta {
using nlohmann::json;

std::vector<AudioClip> ChunkForTask(const AudioClip& clip, const TaskSpec& task) {
  const AudioClip mono = clip.channels == 1 ? clip : DownmixMono(clip);
  const std::size_t len = static_cast<std::size_t>(std::llround(task.chunk_s * mono.sample_rate));
  if (len == 0) Fail(Errc::kInvalidArgument, task.id + ": chunk length is zero");
  const std::size_t n = mono.samples.size();
  const std::size_t count = std::max<std::size_t>(1, (n + len - 1) / len);
  std::vector<AudioClip> out;
  for (std::size_t k = 0; k < count; ++k) {
    AudioClip seg;
    seg.sample_rate = mono.sample_rate;
    seg.source_id = mono.source_id;
    seg.samples.assign(len, 0.0f);
    const std::size_t begin = k * len;
    const std::size_t end = std::min(n, begin + len);
    if (begin < end) std::copy(mono.samples.begin() + begin, mono.samples.begin() + end,
                               seg.samples.begin());
    out.push_back(std::move(seg));
  }
  return out;
}

ProbeMode ParseProbeMode(std::string_view s) {
  if (s == "linear") return ProbeMode::kLinear;
  if (s == "full") return ProbeMode::kFull;
  Fail(Errc::kInvalidArgument, "probe mode must be linear or full, got '" + std::string(s) + "'");
}

ProbeHead::ProbeHead(const TaskSpec& task, int in_dim) : task_id(task.id) {
  weight = {"probe." + task.id + ".weight", Tensor({task.n_outputs(), in_dim}), {}};
  bias = {"probe." + task.id + ".bias", Tensor({task.n_outputs()}), {}};
  weight.ZeroGrad();
  bias.ZeroGrad();
}

nn::NamedTensors ProbeHead::State() const {
  return {{weight.name, weight.value}, {bias.name, bias.value}};
}

ProbeHead ProbeHead::FromState(const nn::NamedTensors& state, const std::string& task_id) {
  ProbeHead h;
  h.task_id = task_id;
  const std::string w = "probe." + task_id + ".weight";
  const std::string b = "probe." + task_id + ".bias";
  for (const auto& [name, t] : state) {
    if (name == w) h.weight = {name, t, {}};
    if (name == b) h.bias = {name, t, {}};
  }
  if (h.weight.value.rank() != 2 || h.bias.value.size() != static_cast<std::size_t>(h.weight.value.dim(0))) {
    Fail(Errc::kMalformedContainer, "no usable probe head for " + task_id);
  }
  h.weight.ZeroGrad();
  h.bias.ZeroGrad();
  return h;
}

SegmentSet BuildSegments(const Corpus& corpus, const TaskSpec& task,
                         const std::vector<Split>& splits, const Featurizer& featurizer,
                         const IngestOptions& ingest) {
  SegmentSet out;
  for (const RecordEntry& rec : corpus.records) {
    if (std::find(splits.begin(), splits.end(), rec.split) == splits.end()) continue;
    auto it = rec.labels.find(task.id);
    if (it == rec.labels.end()) continue;
    CheckLabel(task, it->second);
    AudioClip clip = LoadCanonicalAudio(corpus.AudioPath(rec), ingest);
    clip.source_id = rec.record_id;
    for (AudioClip& seg : ChunkForTask(clip, task)) {
      out.record_ids.push_back(rec.record_id);
      out.specs.push_back(featurizer(seg));
      out.labels.push_back(it->second);
    }
  }
  return out;
}

Tensor EmbedSegments(const nn::Model& model, const std::vector<LogMelSpectrogram>& specs,
                     ProbeSpace space) {
  const int d = space == ProbeSpace::kEncoder ? model.dims().d_e : model.dims().d_p;
  Tensor out({static_cast<int>(specs.size()), d});
  for (std::size_t i = 0; i < specs.size(); ++i) {
    nn::Graph g;
    nn::Var e = model.EncodeBatch(g, std::span(&specs[i], 1), false);
    if (space == ProbeSpace::kProjector) e = model.ProjectVar(g, e, false);
    std::copy(g.value(e).data.begin(), g.value(e).data.end(), out.row(i).begin());
  }
  return out;
}

namespace {

nn::Var TaskLoss(nn::Graph& g, nn::Var logits, const TaskSpec& task,
                 const std::vector<LabelValue>& labels, std::span<const std::size_t> idx) {
  switch (task.type) {
    case TaskType::kBinary:
    case TaskType::kMultiClass: {
      std::vector<int> y;
      for (std::size_t i : idx) y.push_back(static_cast<int>(std::get<std::int64_t>(labels[i])));
      return nn::SoftmaxCrossEntropy(g, logits, y);
    }
    case TaskType::kMultiLabel: {
      const int k = task.n_outputs();
      Tensor t({static_cast<int>(idx.size()), k});
      for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& v = std::get<std::vector<int>>(labels[idx[r]]);
        for (int j = 0; j < k; ++j) t[r * k + j] = v[j];
      }
      return nn::SigmoidCrossEntropy(g, logits, t);
    }
    case TaskType::kRegression: {
      std::vector<double> y;
      for (std::size_t i : idx) y.push_back(static_cast<double>(std::get<std::int64_t>(labels[i])));
      return nn::MeanSquaredError(g, logits, y);
    }
  }
  Fail(Errc::kInvalidArgument, "unknown task type");
}

Tensor Gather(const Tensor& x, std::span<const std::size_t> idx) {
  const int d = x.dim(1);
  Tensor out({static_cast<int>(idx.size()), d});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy(x.row(idx[r]).begin(), x.row(idx[r]).end(), out.row(r).begin());
  }
  return out;
}

// Epoch-wise seeded permutation cut into minibatches; calls step(batch, lr).
template <typename StepFn>
void RunEpochs(std::size_t n, const ProbeConfig& cfg, const std::string& key, StepFn step) {
  if (cfg.batch_size < 1) Fail(Errc::kInvalidArgument, "probe batch_size must be >= 1");
  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::Stream(cfg.seed, key, static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng.engine());
    const double lr = nn::LrForEpoch(cfg.lr, cfg.lr_decay, epoch);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      step(std::span<const std::size_t>(order.data() + start, end - start), lr);
    }
  }
}

}  // namespace

ProbeHead TrainHead(const Tensor& x, const std::vector<LabelValue>& labels, const TaskSpec& task,
                    const ProbeConfig& cfg) {
  if (labels.empty()) Fail(Errc::kNoLabeledData, task.id + ": no labeled training segments");
  if (x.rank() != 2 || static_cast<std::size_t>(x.dim(0)) != labels.size()) {
    Fail(Errc::kDimMismatch, "embeddings " + ShapeString(x.shape) + " vs " +
                                 std::to_string(labels.size()) + " labels");
  }
  ProbeHead head(task, x.dim(1));
  nn::Adam adam({&head.weight, &head.bias});
  RunEpochs(labels.size(), cfg, "probe-head:" + task.id,
            [&](std::span<const std::size_t> idx, double lr) {
              nn::Graph g;
              nn::Var in = g.Constant(Gather(x, idx));
              nn::Var logits = nn::Linear(g, in, g.Param(head.weight), g.Param(head.bias));
              g.Backward(TaskLoss(g, logits, task, labels, idx));
              adam.Step(lr);
            });
  return head;
}

ProbeHead TrainProbe(nn::Model& model, const TaskSpec& task, const SegmentSet& train,
                     const ProbeConfig& cfg) {
  if (train.specs.empty()) Fail(Errc::kNoLabeledData, task.id + ": no labeled training records");
  if (cfg.mode == ProbeMode::kLinear) {
    return TrainHead(EmbedSegments(model, train.specs, cfg.space), train.labels, task, cfg);
  }
  const int d = cfg.space == ProbeSpace::kEncoder ? model.dims().d_e : model.dims().d_p;
  ProbeHead head(task, d);
  std::vector<nn::Parameter*> params = model.EncoderParameters();
  params.push_back(&head.weight);
  params.push_back(&head.bias);
  nn::Adam adam(params);
  RunEpochs(train.specs.size(), cfg, "probe-full:" + task.id,
            [&](std::span<const std::size_t> idx, double lr) {
              std::vector<LogMelSpectrogram> batch;
              for (std::size_t i : idx) batch.push_back(train.specs[i]);
              nn::Graph g;
              nn::Var e = model.EncodeBatch(g, batch, true);
              if (cfg.space == ProbeSpace::kProjector) e = model.ProjectVar(g, e, false);
              nn::Var logits = nn::Linear(g, e, g.Param(head.weight), g.Param(head.bias));
              g.Backward(TaskLoss(g, logits, task, train.labels, idx));
              adam.Step(lr);
            });
  return head;
}

Tensor HeadLogits(const ProbeHead& head, const Tensor& x) {
  if (x.rank() != 2 || x.dim(1) != head.in_dim()) {
    Fail(Errc::kDimMismatch, "head expects width " + std::to_string(head.in_dim()) + ", got " +
                                 ShapeString(x.shape));
  }
  nn::Graph g;
  nn::Var out = nn::Linear(g, g.Constant(x), g.Constant(head.weight.value),
                           g.Constant(head.bias.value));
  return g.value(out);
}

PredictionSet AggregateLogits(const TaskSpec& task, const std::vector<std::string>& record_ids,
                              const Tensor& logits) {
  if (logits.rank() != 2 || static_cast<std::size_t>(logits.dim(0)) != record_ids.size() ||
      logits.dim(1) != task.n_outputs()) {
    Fail(Errc::kDimMismatch, task.id + ": logits " + ShapeString(logits.shape) + " for " +
                                 std::to_string(record_ids.size()) + " segments, " +
                                 std::to_string(task.n_outputs()) + " outputs");
  }
  PredictionSet out;
  out.task_id = task.id;
  std::map<std::string, std::size_t> slot;
  for (std::size_t s = 0; s < record_ids.size(); ++s) {
    auto [it, fresh] = slot.emplace(record_ids[s], out.records.size());
    if (fresh) out.records.push_back({record_ids[s], {}, std::nullopt, {}});
    const auto row = logits.row(s);
    out.records[it->second].segment_logits.emplace_back(row.begin(), row.end());
  }
  const int k = task.n_outputs();
  for (RecordPrediction& rp : out.records) {
    std::vector<double> mean(k, 0.0);
    for (const auto& l : rp.segment_logits)
      for (int j = 0; j < k; ++j) mean[j] += l[j];
    for (double& v : mean) v /= static_cast<double>(rp.segment_logits.size());
    switch (task.type) {
      case TaskType::kBinary:
      case TaskType::kMultiClass: {
        const double mx = *std::max_element(mean.begin(), mean.end());
        double z = 0.0;
        for (double v : mean) z += std::exp(v - mx);
        for (double v : mean) rp.probs.push_back(std::exp(v - mx) / z);
        break;
      }
      case TaskType::kMultiLabel:
        for (double v : mean) rp.probs.push_back(1.0 / (1.0 + std::exp(-v)));
        break;
      case TaskType::kRegression:
        rp.count = std::max(0.0, mean[0]);
        break;
    }
  }
  return out;
}

PredictionSet Predict(const nn::Model& model, const ProbeHead& head, const TaskSpec& task,
                      const SegmentSet& segments, ProbeSpace space) {
  if (head.task_id != task.id || head.n_outputs() != task.n_outputs()) {
    Fail(Errc::kDimMismatch, "head for " + head.task_id + " does not match task " + task.id);
  }
  return AggregateLogits(task, segments.record_ids,
                         HeadLogits(head, EmbedSegments(model, segments.specs, space)));
}

std::string PredictionsToJsonl(const PredictionSet& preds) {
  std::ostringstream os;
  for (const RecordPrediction& r : preds.records) {
    nlohmann::ordered_json j;
    j["record_id"] = r.record_id;
    j["task"] = preds.task_id;
    if (r.count) {
      j["count"] = *r.count;
    } else {
      j["probs"] = r.probs;
    }
    os << j.dump() << '\n';
  }
  return os.str();
}

PredictionSet PredictionsFromJsonl(std::string_view text) {
  PredictionSet out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      RecordPrediction r;
      r.record_id = j.at("record_id").get<std::string>();
      const std::string task = j.at("task").get<std::string>();
      if (out.task_id.empty()) out.task_id = task;
      if (task != out.task_id) Fail(Errc::kSchemaError, "mixed tasks in one prediction file");
      if (j.contains("count")) {
        r.count = j.at("count").get<double>();
      } else {
        r.probs = j.at("probs").get<std::vector<double>>();
      }
      out.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      Fail(Errc::kSchemaError, "predictions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ausculta
