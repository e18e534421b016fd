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

#include "ausculta/rank.hpp"

#include <algorithm>
#include <iomanip>
#include <set>
#include <sstream>

#include "ausculta/error.hpp"

namespace ausculta {
using nlohmann::ordered_json;

std::optional<double> ScoreTable::Get(const std::string& model, const std::string& task) const {
  auto m = values.find(model);
  if (m == values.end()) return std::nullopt;
  auto t = m->second.find(task);
  if (t == m->second.end()) return std::nullopt;
  return t->second;
}

std::string MetricForTask(const TaskSpec& task, const std::string& metric) {
  return task.type == TaskType::kRegression ? "accuracy" : metric;
}

ScoreTable ScoreTableFromJson(const ordered_json& doc, const std::string& metric) {
  if (!doc.is_object()) Fail(Errc::kSchemaError, "scores: top level must be an object");
  ScoreTable t;
  t.metric = metric;
  const ordered_json* meta = doc.contains("_meta") ? &doc.at("_meta") : nullptr;
  try {
    if (meta && meta->contains("model_order")) {
      t.models = meta->at("model_order").get<std::vector<std::string>>();
    } else {
      for (const auto& [name, v] : doc.items()) {
        if (name != "_meta") t.models.push_back(name);
      }
    }
    std::set<std::string> seen_tasks;
    for (const std::string& model : t.models) {
      if (!doc.contains(model)) Fail(Errc::kSchemaError, "scores: no entry for model " + model);
      const ordered_json& per_task = doc.at(model);
      if (!per_task.is_object()) Fail(Errc::kSchemaError, "scores: " + model + " must be an object");
      for (const auto& [task_id, metrics] : per_task.items()) {
        const TaskSpec* task = TryFindTask(task_id);
        if (!task) Fail(Errc::kSchemaError, "scores: unknown task " + task_id + " for " + model);
        const std::string key = MetricForTask(*task, metric);
        if (!metrics.is_object()) {
          Fail(Errc::kSchemaError, "scores: " + model + "/" + task_id + " must map metric -> value");
        }
        if (!metrics.contains(key)) continue;
        const ordered_json& v = metrics.at(key);
        if (!v.is_number()) {
          Fail(Errc::kSchemaError, "scores: " + model + "/" + task_id + "/" + key + " is not a number");
        }
        t.values[model][task_id] = v.get<double>();
        seen_tasks.insert(task_id);
      }
    }
    for (const TaskSpec& task : BuiltinRegistry()) {
      if (seen_tasks.count(task.id)) t.tasks.push_back(task.id);
    }
    if (meta && meta->contains("tiebreak")) {
      const ordered_json& tb = meta->at("tiebreak");
      for (const std::string& key : {metric, std::string("accuracy")}) {
        if (!tb.contains(key)) continue;
        for (const auto& [task_id, order] : tb.at(key).items()) {
          const TaskSpec* task = TryFindTask(task_id);
          if (task && MetricForTask(*task, metric) == key) {
            t.tiebreak[task_id] = order.get<std::vector<std::string>>();
          }
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kSchemaError, std::string("scores: ") + e.what());
  }
  return t;
}

std::vector<int> TaskRanks(const ScoreTable& table, const std::string& task) {
  const std::size_t m = table.models.size();
  if (m < 2) Fail(Errc::kInvalidArgument, "ranking needs >= 2 models");
  std::vector<double> s(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto v = table.Get(table.models[i], task);
    if (!v) Fail(Errc::kIncompleteColumn, task + ": no " + table.metric + " score for " + table.models[i]);
    s[i] = *v;
  }
  const std::vector<std::string>* order = nullptr;
  if (auto it = table.tiebreak.find(task); it != table.tiebreak.end()) order = &it->second;
  auto position = [&](std::size_t i) -> std::optional<std::size_t> {
    if (!order) return std::nullopt;
    auto it = std::find(order->begin(), order->end(), table.models[i]);
    if (it == order->end()) return std::nullopt;
    return static_cast<std::size_t>(it - order->begin());
  };
  std::vector<int> rank(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      if (s[j] > s[i]) {
        ++rank[i];
      } else if (s[j] == s[i]) {
        auto pi = position(i), pj = position(j);
        if (pi && pj && *pj < *pi) ++rank[i];
      }
    }
  }
  return rank;
}

std::vector<double> ReciprocalRanks(const ScoreTable& table, const std::string& task) {
  std::vector<double> rr;
  for (int r : TaskRanks(table, task)) rr.push_back(1.0 / r);
  return rr;
}

std::vector<double> Mrr(const ScoreTable& table, const std::vector<std::string>& tasks) {
  if (tasks.empty()) Fail(Errc::kEmptyGroup, "MRR over an empty task group");
  std::vector<double> sum(table.models.size(), 0.0);
  for (const auto& task : tasks) {
    const auto rr = ReciprocalRanks(table, task);
    for (std::size_t i = 0; i < rr.size(); ++i) sum[i] += rr[i];
  }
  for (double& v : sum) v /= static_cast<double>(tasks.size());
  return sum;
}

std::vector<double> Borda(const ScoreTable& table, const std::vector<std::string>& tasks) {
  if (tasks.empty()) Fail(Errc::kEmptyGroup, "Borda over an empty task group");
  const int m = static_cast<int>(table.models.size());
  std::vector<double> points(m, 0.0);
  for (const auto& task : tasks) {
    const auto ranks = TaskRanks(table, task);
    for (int i = 0; i < m; ++i) points[i] += m - ranks[i];
  }
  return points;
}

Grouping ParseGrouping(std::string_view s) {
  if (s == "function") return Grouping::kFunction;
  if (s == "sound") return Grouping::kSound;
  if (s == "tasktype") return Grouping::kTaskType;
  Fail(Errc::kInvalidArgument, "--group must be function, sound or tasktype");
}

RankReport Aggregate(const ScoreTable& table, Grouping grouping) {
  RankReport r;
  r.metric = table.metric;
  r.models = table.models;
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  auto add = [&](const std::string& name, auto pred) {
    std::vector<std::string> ids;
    for (const auto& id : table.tasks) {
      if (pred(FindTask(id))) ids.push_back(id);
    }
    if (!ids.empty()) groups.emplace_back(name, std::move(ids));
  };
  switch (grouping) {
    case Grouping::kFunction:
      r.grouping = "function";
      r.aggregate = "mrr";
      for (FunctionGroup g : {FunctionGroup::kAbnormalityDetection, FunctionGroup::kDiseaseDiagnosis}) {
        add(std::string(FunctionGroupName(g)), [g](const TaskSpec& t) { return t.group == g; });
      }
      add("overall", [](const TaskSpec& t) { return t.type != TaskType::kRegression; });
      add(std::string(FunctionGroupName(FunctionGroup::kActivityDetection)),
          [](const TaskSpec& t) { return t.group == FunctionGroup::kActivityDetection; });
      break;
    case Grouping::kSound:
      r.grouping = "sound";
      r.aggregate = "borda";
      for (SoundType s : {SoundType::kLung, SoundType::kHeart, SoundType::kBowel}) {
        add(std::string(1, SoundTypeCode(s)), [s](const TaskSpec& t) { return t.sound == s; });
      }
      break;
    case Grouping::kTaskType:
      r.grouping = "tasktype";
      r.aggregate = "borda";
      for (TaskType k : {TaskType::kBinary, TaskType::kMultiClass, TaskType::kMultiLabel,
                         TaskType::kRegression}) {
        add(std::string(TaskTypeCode(k)), [k](const TaskSpec& t) { return t.type == k; });
      }
      break;
  }
  if (groups.empty()) Fail(Errc::kEmptyGroup, "no scored task falls in any group");
  for (auto& [name, ids] : groups) {
    GroupScore gs{name, ids, r.aggregate == "mrr" ? Mrr(table, ids) : Borda(table, ids)};
    r.groups.push_back(std::move(gs));
  }
  return r;
}

const GroupScore* RankReport::Find(std::string_view name) const {
  for (const auto& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

ordered_json RankReport::ToJson() const {
  ordered_json j;
  j["grouping"] = grouping;
  j["metric"] = metric;
  j["aggregate"] = aggregate;
  j["models"] = models;
  j["groups"] = ordered_json::array();
  for (const auto& g : groups) {
    ordered_json row;
    row["name"] = g.name;
    row["tasks"] = g.tasks;
    for (std::size_t i = 0; i < models.size(); ++i) row["values"][models[i]] = g.values[i];
    j["groups"].push_back(std::move(row));
  }
  return j;
}

std::string RankReport::ToCsv() const {
  std::ostringstream os;
  os << "grouping,metric,aggregate,group";
  for (const auto& m : models) os << ',' << m;
  os << '\n' << std::setprecision(17);
  for (const auto& g : groups) {
    os << grouping << ',' << metric << ',' << aggregate << ',' << g.name;
    for (double v : g.values) os << ',' << v;
    os << '\n';
  }
  return os.str();
}

}  // namespace ausculta
