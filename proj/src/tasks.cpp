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

#include "ausculta/tasks.hpp"

#include <cmath>

#include "ausculta/corpus.hpp"
#include "ausculta/error.hpp"

namespace ausculta {
namespace {

constexpr auto L = SoundType::kLung;
constexpr auto H = SoundType::kHeart;
constexpr auto B = SoundType::kBowel;
constexpr auto BC = TaskType::kBinary;
constexpr auto MC = TaskType::kMultiClass;
constexpr auto ML = TaskType::kMultiLabel;
constexpr auto R = TaskType::kRegression;
constexpr auto kAbn = FunctionGroup::kAbnormalityDetection;
constexpr auto kDis = FunctionGroup::kDiseaseDiagnosis;
constexpr auto kAct = FunctionGroup::kActivityDetection;

std::vector<TaskSpec> MakeRegistry() {
  std::vector<TaskSpec> r;
  auto add = [&r](std::string id, std::string ds, SoundType s, TaskType t,
                  std::vector<std::string> names, std::vector<int> counts, FunctionGroup g,
                  double chunk_s = 8.0) {
    TaskSpec spec;
    spec.id = std::move(id);
    spec.dataset_id = std::move(ds);
    spec.sound = s;
    spec.type = t;
    spec.class_names = std::move(names);
    spec.class_counts = std::move(counts);
    spec.group = g;
    spec.chunk_s = chunk_s;
    r.push_back(std::move(spec));
  };
  add("T1", "SPRSound", L, MC, {"Normal", "Adventitious", "Poor Quality"}, {2324, 1000, 230}, kAbn);
  add("T2", "SPRSound", L, MC, {"Normal", "CAS", "DAS", "CAS&DAS", "Poor Quality"},
      {2324, 368, 480, 152, 230}, kAbn);
  add("T3", "HFLung", L, BC, {"Normal", "Abnormal"}, {52444, 29489}, kAbn);
  add("T4", "HFLung", L, MC, {"Inhalation", "Exhalation", "CAS", "DAS"},
      {34095, 18349, 13883, 15606}, kAbn);
  add("T5", "HFLung", L, MC,
      {"Inhalation", "Exhalation", "Wheeze", "Stridor", "Rhonchi", "Crackle"},
      {34095, 18349, 8457, 686, 4740, 15606}, kAbn);
  add("T6", "ICBHI2017", L, MC, {"Normal", "Crackle", "Wheeze", "Crackle&Wheeze"},
      {3642, 1864, 886, 506}, kAbn);
  add("T7", "LungSound", L, MC,
      {"Normal", "Crepitation", "Wheeze", "Crackle", "Bronchi", "Wheeze&Crackle",
       "Bronchi&Crackle"},
      {105, 69, 123, 24, 3, 6, 6}, kAbn);
  add("T8", "Circor2022", H, MC, {"Present", "Absent", "Unknown"}, {363, 2391, 156}, kAbn);
  add("T9", "ICBHI2017", L, MC,
      {"Healthy", "Bronchiectasis", "Bronchiolitis", "COPD", "Pneumonia", "URTI"},
      {35, 16, 13, 793, 37, 23}, kDis);
  add("T10", "LungSound", L, ML,
      {"Normal", "Asthma", "Pneumonia", "COPD", "BRON", "Heart failure", "Lung fibrosis",
       "Pleural effusion"},
      {105, 99, 15, 33, 9, 63, 18, 6}, kDis);
  add("T11", "RDTR", L, MC, {"COPD0", "COPD1", "COPD2", "COPD3", "COPD4"},
      {72, 60, 84, 84, 204}, kDis);
  add("T12", "Korean", H, MC,
      {"Normal", "Aortic Stenosis", "Mitral Regurgitation", "Mitral Stenosis",
       "Murmur in Systole"},
      {200, 200, 200, 200, 200}, kDis, 4.0);
  add("T13", "Cinc2016", H, BC, {"Normal", "Abnormal"}, {2575, 665}, kDis);
  add("T14", "Circor2022", H, BC, {"Normal", "Abnormal"}, {1632, 1531}, kDis);
  add("T15", "HSDReport", H, BC, {"Normal", "Abnormal"}, {247, 2028}, kDis);
  add("T16", "BowelSound", B, R, {}, {}, kAct, 2.0);
  r.back().count_min = 0;
  r.back().count_max = 43;
  return r;
}

}  // namespace

char SoundTypeCode(SoundType s) {
  switch (s) {
    case SoundType::kLung: return 'L';
    case SoundType::kHeart: return 'H';
    case SoundType::kBowel: return 'B';
  }
  return '?';
}

SoundType ParseSoundType(std::string_view code) {
  if (code == "L") return SoundType::kLung;
  if (code == "H") return SoundType::kHeart;
  if (code == "B") return SoundType::kBowel;
  Fail(Errc::kSchemaError, "sound_type must be L, H or B, got '" + std::string(code) + "'");
}

std::string_view TaskTypeCode(TaskType t) {
  switch (t) {
    case TaskType::kBinary: return "BC";
    case TaskType::kMultiClass: return "MC";
    case TaskType::kMultiLabel: return "ML";
    case TaskType::kRegression: return "R";
  }
  return "?";
}

std::string_view FunctionGroupName(FunctionGroup g) {
  switch (g) {
    case FunctionGroup::kAbnormalityDetection: return "abnormality_detection";
    case FunctionGroup::kDiseaseDiagnosis: return "disease_diagnosis";
    case FunctionGroup::kActivityDetection: return "activity_detection";
  }
  return "?";
}

const std::vector<DatasetInfo>& KnownDatasets() {
  static const std::vector<DatasetInfo> datasets = {
      {"SPRSound", "SPRSound", L},
      {"HFLung", "HF Lung", L},
      {"ICBHI2017", "ICBHI 2017", L},
      {"LungSound", "Lung Sound", L},
      {"RDTR", "Respiratory Database@TR", L},
      {"Korean", "Korean", H},
      {"Cinc2016", "Cinc 2016", H},
      {"Circor2022", "Circor 2022", H},
      {"HSDReport", "HSDReport", H},
      {"XHheartSound", "XHheartSound", H},
      {"BowelSound", "Bowel Sound", B},
  };
  return datasets;
}

bool IsKnownDataset(std::string_view id) {
  if (id.starts_with("synth")) return true;
  for (const auto& d : KnownDatasets()) {
    if (d.id == id) return true;
  }
  return false;
}

const std::vector<TaskSpec>& BuiltinRegistry() {
  static const std::vector<TaskSpec> registry = MakeRegistry();
  return registry;
}

const TaskSpec* TryFindTask(std::string_view id) {
  for (const auto& t : BuiltinRegistry()) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

const TaskSpec& FindTask(std::string_view id) {
  if (const TaskSpec* t = TryFindTask(id)) return *t;
  Fail(Errc::kInvalidArgument,
       "unknown task '" + std::string(id) + "'; expected one of T1..T16");
}

LabelValue ParseLabel(const TaskSpec& task, const nlohmann::json& value) {
  LabelValue out;
  if (task.type == TaskType::kMultiLabel) {
    if (!value.is_array()) {
      Fail(Errc::kLabelOutOfRange, task.id + ": multi-label target must be a 0/1 array");
    }
    std::vector<int> bits;
    for (const auto& v : value) {
      if (!v.is_number_integer()) Fail(Errc::kLabelOutOfRange, task.id + ": non-integer indicator");
      bits.push_back(v.get<int>());
    }
    out = std::move(bits);
  } else if (task.type == TaskType::kRegression) {
    if (!value.is_number()) Fail(Errc::kNonIntegerCount, task.id + ": count must be a number");
    if (value.is_number_float()) {
      const double d = value.get<double>();
      if (d != std::floor(d)) {
        Fail(Errc::kNonIntegerCount, task.id + ": count " + value.dump() + " is not an integer");
      }
      out = static_cast<std::int64_t>(d);
    } else {
      out = value.get<std::int64_t>();
    }
  } else {
    if (!value.is_number_integer()) {
      Fail(Errc::kLabelOutOfRange, task.id + ": class label must be an integer index");
    }
    out = value.get<std::int64_t>();
  }
  CheckLabel(task, out);
  return out;
}

void CheckLabel(const TaskSpec& task, const LabelValue& value) {
  if (task.type == TaskType::kMultiLabel) {
    const auto* bits = std::get_if<std::vector<int>>(&value);
    if (!bits || static_cast<int>(bits->size()) != task.n_classes()) {
      Fail(Errc::kLabelOutOfRange, task.id + ": expected " + std::to_string(task.n_classes()) +
                                       " indicators");
    }
    for (int b : *bits) {
      if (b != 0 && b != 1) Fail(Errc::kLabelOutOfRange, task.id + ": indicators must be 0/1");
    }
    return;
  }
  const auto* v = std::get_if<std::int64_t>(&value);
  if (!v) Fail(Errc::kLabelOutOfRange, task.id + ": expected a scalar label");
  if (task.type == TaskType::kRegression) {
    if (*v < task.count_min || *v > task.count_max) {
      Fail(Errc::kLabelOutOfRange, task.id + ": count " + std::to_string(*v) + " outside [" +
                                       std::to_string(task.count_min) + ", " +
                                       std::to_string(task.count_max) + "]");
    }
    return;
  }
  if (*v < 0 || *v >= task.n_classes()) {
    Fail(Errc::kLabelOutOfRange, task.id + ": class " + std::to_string(*v) + " outside [0, " +
                                     std::to_string(task.n_classes()) + ")");
  }
}

nlohmann::json LabelToJson(const LabelValue& value) {
  if (const auto* v = std::get_if<std::int64_t>(&value)) return *v;
  return std::get<std::vector<int>>(value);
}

nlohmann::json RegistryToJson() {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : BuiltinRegistry()) {
    nlohmann::json j;
    j["task_id"] = t.id;
    j["dataset_id"] = t.dataset_id;
    j["sound_type"] = std::string(1, SoundTypeCode(t.sound));
    j["task_type"] = TaskTypeCode(t.type);
    j["class_names"] = t.class_names;
    j["class_counts"] = t.class_counts;
    if (t.type == TaskType::kRegression) j["count_range"] = {t.count_min, t.count_max};
    j["chunk_s"] = t.chunk_s;
    j["function_group"] = FunctionGroupName(t.group);
    tasks.push_back(std::move(j));
  }
  return tasks;
}

LabelReport ValidateLabels(const TaskSpec& task, const Corpus& corpus) {
  LabelReport report;
  report.task_id = task.id;
  if (task.type != TaskType::kRegression) report.class_counts.assign(task.n_classes(), 0);
  for (const auto& rec : corpus.records) {
    auto it = rec.labels.find(task.id);
    if (it == rec.labels.end()) continue;
    CheckLabel(task, it->second);
    ++report.n_labeled;
    if (task.type == TaskType::kRegression) {
      ++report.count_histogram[std::get<std::int64_t>(it->second)];
    } else if (task.type == TaskType::kMultiLabel) {
      const auto& bits = std::get<std::vector<int>>(it->second);
      for (int k = 0; k < task.n_classes(); ++k) report.class_counts[k] += bits[k];
    } else {
      ++report.class_counts[std::get<std::int64_t>(it->second)];
    }
  }
  return report;
}

}  // namespace ausculta
