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

#include "ausculta/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ausculta/binary_io.hpp"
#include "ausculta/error.hpp"

namespace ausculta {

using nlohmann::json;

std::string_view SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  Fail(Errc::kSchemaError, "split must be train|validation|test, got '" + std::string(s) + "'");
}

const RecordEntry* Corpus::Find(std::string_view record_id) const {
  for (const auto& r : records) {
    if (r.record_id == record_id) return &r;
  }
  return nullptr;
}

std::filesystem::path Corpus::AudioPath(const RecordEntry& rec) const {
  std::filesystem::path p(rec.audio_path);
  return p.is_absolute() ? p : base_dir / p;
}

std::vector<std::string> Corpus::DatasetIds() const {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.dataset_id);
  return {ids.begin(), ids.end()};
}

std::vector<const RecordEntry*> Corpus::Select(std::string_view dataset_id, Split split) const {
  std::vector<const RecordEntry*> out;
  for (const auto& r : records) {
    if (r.dataset_id == dataset_id && r.split == split) out.push_back(&r);
  }
  std::sort(out.begin(), out.end(),
            [](const RecordEntry* a, const RecordEntry* b) { return a->record_id < b->record_id; });
  return out;
}

Corpus ParseManifest(std::string_view text, const std::filesystem::path& base_dir,
                     const ManifestOptions& opt) {
  Corpus corpus;
  corpus.base_dir = base_dir;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "manifest line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      Fail(Errc::kSchemaError, where + ": " + e.what());
    }
    try {
      if (j.value("v", 0) != 1) Fail(Errc::kSchemaError, where + ": expected \"v\":1");
      RecordEntry rec;
      rec.record_id = j.at("record_id").get<std::string>();
      rec.dataset_id = j.at("dataset_id").get<std::string>();
      rec.sound = ParseSoundType(j.at("sound_type").get<std::string>());
      rec.audio_path = j.at("audio_path").get<std::string>();
      rec.split = ParseSplit(j.at("split").get<std::string>());
      if (j.contains("labels")) {
        for (const auto& [key, value] : j.at("labels").items()) {
          const TaskSpec* task = TryFindTask(key);
          if (!task) Fail(Errc::kSchemaError, where + ": unknown task key '" + key + "'");
          rec.labels.emplace(key, ParseLabel(*task, value));
        }
      }
      if (!IsKnownDataset(rec.dataset_id)) {
        Fail(Errc::kUnknownDatasetId, where + ": '" + rec.dataset_id + "'");
      }
      if (!seen.insert(rec.record_id).second) {
        Fail(Errc::kDuplicateRecordId, where + ": '" + rec.record_id + "'");
      }
      if (opt.strict && !std::filesystem::exists(corpus.AudioPath(rec))) {
        Fail(Errc::kMissingAudioFile, where + ": " + corpus.AudioPath(rec).string());
      }
      corpus.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      Fail(Errc::kSchemaError, where + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == Errc::kLabelOutOfRange || e.code() == Errc::kNonIntegerCount) {
        throw Error(e.code(), where + ": " + e.what());
      }
      throw;
    }
  }
  return corpus;
}

Corpus LoadManifest(const std::filesystem::path& path, const ManifestOptions& opt) {
  const auto bytes = io::ReadFile(path);
  return ParseManifest(std::string_view(bytes.data(), bytes.size()),
                       path.has_parent_path() ? path.parent_path() : ".", opt);
}

std::string SerializeManifest(const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus.records) {
    nlohmann::ordered_json j;
    j["v"] = 1;
    j["record_id"] = r.record_id;
    j["dataset_id"] = r.dataset_id;
    j["sound_type"] = std::string(1, SoundTypeCode(r.sound));
    j["audio_path"] = r.audio_path;
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.labels) labels[k] = LabelToJson(v);
    j["labels"] = std::move(labels);
    j["split"] = SplitName(r.split);
    out += j.dump();
    out += '\n';
  }
  return out;
}

Corpus SplitValidation(Corpus corpus, double fraction, std::uint64_t seed) {
  for (const auto& dataset : corpus.DatasetIds()) {
    std::vector<std::size_t> train;
    bool has_validation = false;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
      const auto& r = corpus.records[i];
      if (r.dataset_id != dataset) continue;
      if (r.split == Split::kValidation) has_validation = true;
      if (r.split == Split::kTrain) train.push_back(i);
    }
    if (has_validation || train.empty()) continue;
    std::sort(train.begin(), train.end(), [&](std::size_t a, std::size_t b) {
      return corpus.records[a].record_id < corpus.records[b].record_id;
    });
    Rng rng = Rng::Stream(seed, "split:" + dataset);
    std::shuffle(train.begin(), train.end(), rng.engine());
    const auto n_val = static_cast<std::size_t>(std::ceil(fraction * train.size() - 1e-9));
    for (std::size_t k = 0; k < n_val && k < train.size(); ++k) {
      corpus.records[train[k]].split = Split::kValidation;
    }
  }
  return corpus;
}

BatchPlan PlanBatches(const Corpus& corpus, int batch_size, const CropTable& crops,
                      std::uint64_t seed) {
  if (batch_size < 2) {
    Fail(Errc::kBatchSizeTooSmall, "batch_size " + std::to_string(batch_size) +
                                       " leaves no negatives; need >= 2");
  }
  BatchPlan plan;
  for (const auto& dataset : corpus.DatasetIds()) {
    auto train = corpus.Select(dataset, Split::kTrain);
    Rng rng = Rng::Stream(seed, "plan:" + dataset);
    std::shuffle(train.begin(), train.end(), rng.engine());
    const std::size_t bs = static_cast<std::size_t>(batch_size);
    for (std::size_t start = 0; start + bs <= train.size(); start += bs) {
      Batch b;
      b.dataset_id = dataset;
      b.crop_ms = crops.For(dataset);
      for (std::size_t k = start; k < start + bs; ++k) b.record_ids.push_back(train[k]->record_id);
      plan.batches.push_back(std::move(b));
    }
  }
  Rng order = Rng::Stream(seed, "plan:interleave");
  std::shuffle(plan.batches.begin(), plan.batches.end(), order.engine());
  return plan;
}

}  // namespace ausculta
