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

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ausculta/probe.hpp"
#include "ausculta/tasks.hpp"

namespace ausculta {

struct F1Result {
  double macro = 0.0;
  double micro = 0.0;
  std::vector<double> per_class;
  // False for classes with no true and no predicted instance; those are
  // left out of the macro mean.
  std::vector<bool> in_macro;
};

// One-vs-rest F1 per class (0 when precision + recall = 0), macro over the
// classes that occur in labels or predictions, micro from pooled counts.
// Throws EmptyEvaluation, ShapeMismatch, LabelOutOfRange.
F1Result F1Scores(std::span<const int> preds, std::span<const int> labels, int n_classes);

// Row-major [n, n_labels] 0/1 matrices, thresholded upstream.
F1Result MultilabelF1(std::span<const int> preds, std::span<const int> labels, int n_labels);

// Mann-Whitney U / (n_pos * n_neg) with midranks. Throws SingleClassOnly.
double Auroc(std::span<const double> scores, std::span<const int> labels);

// Share of |pred - label| <= tolerance. Throws EmptyEvaluation.
double RegressionAccuracy(std::span<const long> preds, std::span<const long> labels,
                          long tolerance = 0);

// Per column: (v - min) / (max - min), constant columns -> 0. Rows are models.
std::vector<std::vector<double>> NormalizeClasswise(const std::vector<std::vector<double>>& m);

struct EvalResult {
  std::string task_id;
  std::map<std::string, double> metrics;  // macro_f1, micro_f1, auroc, accuracy, accuracy_pm1
  std::vector<double> per_class_f1;
  std::size_t n_eval = 0;
};

// Scores predictions against the labels in labels_by_record. MC/BC take the
// argmax, ML thresholds at 0.5, R rounds and clamps to the task range.
EvalResult Evaluate(const TaskSpec& task, const PredictionSet& preds,
                    const std::map<std::string, LabelValue>& labels_by_record);

// {model: {task: {metric: value}}}; merges into an existing document.
void AppendScores(nlohmann::ordered_json& doc, const std::string& model, const EvalResult& r);

}  // namespace ausculta
