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

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ausculta {

enum class SoundType { kLung, kHeart, kBowel };
enum class TaskType { kBinary, kMultiClass, kMultiLabel, kRegression };
enum class FunctionGroup { kAbnormalityDetection, kDiseaseDiagnosis, kActivityDetection };

char SoundTypeCode(SoundType s);                 // L / H / B
SoundType ParseSoundType(std::string_view code);
std::string_view TaskTypeCode(TaskType t);       // BC / MC / ML / R
std::string_view FunctionGroupName(FunctionGroup g);

struct DatasetInfo {
  std::string id;
  std::string display_name;
  SoundType sound = SoundType::kLung;
};

// The eleven pretraining sources. Ids starting with "synth" are also
// accepted (generated fixtures).
const std::vector<DatasetInfo>& KnownDatasets();
bool IsKnownDataset(std::string_view id);

struct TaskSpec {
  std::string id;
  std::string dataset_id;
  SoundType sound = SoundType::kLung;
  TaskType type = TaskType::kMultiClass;
  std::vector<std::string> class_names;  // empty for regression
  // Documentation only: per-class sample counts of the source dataset.
  std::vector<int> class_counts;
  int count_min = 0;  // regression target range
  int count_max = 0;
  double chunk_s = 8.0;
  FunctionGroup group = FunctionGroup::kAbnormalityDetection;

  int n_classes() const { return static_cast<int>(class_names.size()); }
  // Width of a probe head for this task.
  int n_outputs() const { return type == TaskType::kRegression ? 1 : n_classes(); }
};

// T1-T16, in order. Immutable.
const std::vector<TaskSpec>& BuiltinRegistry();
const TaskSpec* TryFindTask(std::string_view id);
// Throws InvalidArgument naming T1-T16 for unknown ids.
const TaskSpec& FindTask(std::string_view id);

// Class index (BC/MC), 0/1 indicator vector (ML) or count (R).
using LabelValue = std::variant<std::int64_t, std::vector<int>>;

// Throws LabelOutOfRange or NonIntegerCount.
LabelValue ParseLabel(const TaskSpec& task, const nlohmann::json& value);
void CheckLabel(const TaskSpec& task, const LabelValue& value);
nlohmann::json LabelToJson(const LabelValue& value);

nlohmann::json RegistryToJson();

struct Corpus;

struct LabelReport {
  std::string task_id;
  std::size_t n_labeled = 0;
  std::vector<std::size_t> class_counts;   // BC/MC: per class; ML: per label positives
  std::map<std::int64_t, std::size_t> count_histogram;  // R
};

LabelReport ValidateLabels(const TaskSpec& task, const Corpus& corpus);

}  // namespace ausculta
