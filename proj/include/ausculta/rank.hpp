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

// Cross-model rank aggregation: per-task reciprocal ranks, MRR over task
// groups, and Borda points.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ausculta/tasks.hpp"

namespace ausculta {

struct ScoreTable {
  std::string metric;
  std::vector<std::string> models;
  std::vector<std::string> tasks;  // registry order
  // values[model][task]
  std::map<std::string, std::map<std::string, double>> values;
  // Strict within-tie order per task (best first), used only between
  // models with exactly equal scores.
  std::map<std::string, std::vector<std::string>> tiebreak;

  std::optional<double> Get(const std::string& model, const std::string& task) const;
};

// Reads {model: {task: {metric: value}}}; "_meta" may carry "model_order"
// and "tiebreak": {metric: {task: [models]}}. Regression tasks are read
// under "accuracy" whatever metric is asked for. Throws SchemaError.
ScoreTable ScoreTableFromJson(const nlohmann::ordered_json& doc, const std::string& metric);
std::string MetricForTask(const TaskSpec& task, const std::string& metric);

// Competition ranks (1 + number of strictly better models), refined by the
// table's tiebreak when one is given for the task. Throws IncompleteColumn.
std::vector<int> TaskRanks(const ScoreTable& table, const std::string& task);
std::vector<double> ReciprocalRanks(const ScoreTable& table, const std::string& task);

// Per-model mean RR over the tasks. Throws EmptyGroup.
std::vector<double> Mrr(const ScoreTable& table, const std::vector<std::string>& tasks);
// Per-model sum over tasks of (m - rank). Throws EmptyGroup.
std::vector<double> Borda(const ScoreTable& table, const std::vector<std::string>& tasks);

enum class Grouping { kFunction, kSound, kTaskType };
Grouping ParseGrouping(std::string_view s);

struct GroupScore {
  std::string name;
  std::vector<std::string> tasks;
  std::vector<double> values;  // per model
};

struct RankReport {
  std::string grouping;
  std::string metric;
  std::string aggregate;  // mrr | borda
  std::vector<std::string> models;
  std::vector<GroupScore> groups;

  nlohmann::ordered_json ToJson() const;
  std::string ToCsv() const;
  const GroupScore* Find(std::string_view name) const;
};

// function -> MRR per function group plus "overall" over the classification
// tasks; sound / tasktype -> Borda per sound type / task type. Groups with
// no task in the table are omitted.
RankReport Aggregate(const ScoreTable& table, Grouping grouping);

}  // namespace ausculta
