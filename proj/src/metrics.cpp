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

#include "ausculta/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ausculta/error.hpp"

namespace ausculta {
namespace {

struct Counts {
  long tp = 0, fp = 0, fn = 0;
};

double F1(const Counts& c) {
  const long denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : 2.0 * c.tp / denom;
}

F1Result Summarize(const std::vector<Counts>& per) {
  F1Result r;
  Counts pooled;
  double sum = 0.0;
  int counted = 0;
  for (const Counts& c : per) {
    r.per_class.push_back(F1(c));
    const bool present = c.tp + c.fp + c.fn > 0;
    r.in_macro.push_back(present);
    if (present) {
      sum += r.per_class.back();
      ++counted;
    }
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
  }
  r.macro = counted == 0 ? 0.0 : sum / counted;
  r.micro = F1(pooled);
  return r;
}

}  // namespace

F1Result F1Scores(std::span<const int> preds, std::span<const int> labels, int n_classes) {
  if (preds.size() != labels.size()) Fail(Errc::kShapeMismatch, "preds and labels differ in length");
  if (preds.empty()) Fail(Errc::kEmptyEvaluation, "no predictions to score");
  if (n_classes < 1) Fail(Errc::kInvalidArgument, "n_classes must be >= 1");
  std::vector<Counts> per(n_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], y = labels[i];
    if (p < 0 || p >= n_classes || y < 0 || y >= n_classes) {
      Fail(Errc::kLabelOutOfRange, "class index outside [0, " + std::to_string(n_classes) + ")");
    }
    if (p == y) {
      ++per[y].tp;
    } else {
      ++per[p].fp;
      ++per[y].fn;
    }
  }
  return Summarize(per);
}

F1Result MultilabelF1(std::span<const int> preds, std::span<const int> labels, int n_labels) {
  if (preds.size() != labels.size() || n_labels < 1 || preds.size() % n_labels != 0) {
    Fail(Errc::kShapeMismatch, "multilabel matrices differ in shape");
  }
  if (preds.empty()) Fail(Errc::kEmptyEvaluation, "no predictions to score");
  std::vector<Counts> per(n_labels);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    Counts& c = per[i % n_labels];
    const bool p = preds[i] != 0, y = labels[i] != 0;
    c.tp += p && y;
    c.fp += p && !y;
    c.fn += !p && y;
  }
  return Summarize(per);
}

double Auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) Fail(Errc::kShapeMismatch, "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Midranks (1-based) over tie blocks.
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0) {
      pos_rank_sum += rank[i];
      n_pos += 1.0;
    }
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) Fail(Errc::kSingleClassOnly, "AUROC needs both classes");
  return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double RegressionAccuracy(std::span<const long> preds, std::span<const long> labels,
                          long tolerance) {
  if (preds.size() != labels.size()) Fail(Errc::kShapeMismatch, "preds and labels differ in length");
  if (preds.empty()) Fail(Errc::kEmptyEvaluation, "no predictions to score");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hit += std::labs(preds[i] - labels[i]) <= tolerance;
  return static_cast<double>(hit) / static_cast<double>(preds.size());
}

std::vector<std::vector<double>> NormalizeClasswise(const std::vector<std::vector<double>>& m) {
  if (m.size() < 2) Fail(Errc::kInvalidArgument, "class-wise normalization needs >= 2 models");
  const std::size_t k = m[0].size();
  for (const auto& row : m) {
    if (row.size() != k) Fail(Errc::kShapeMismatch, "ragged model x class matrix");
  }
  std::vector<std::vector<double>> out(m.size(), std::vector<double>(k, 0.0));
  for (std::size_t c = 0; c < k; ++c) {
    double lo = m[0][c], hi = m[0][c];
    for (const auto& row : m) {
      lo = std::min(lo, row[c]);
      hi = std::max(hi, row[c]);
    }
    if (hi == lo) continue;
    for (std::size_t r = 0; r < m.size(); ++r) out[r][c] = (m[r][c] - lo) / (hi - lo);
  }
  return out;
}

EvalResult Evaluate(const TaskSpec& task, const PredictionSet& preds,
                    const std::map<std::string, LabelValue>& labels_by_record) {
  if (preds.task_id != task.id) {
    Fail(Errc::kInvalidArgument, "predictions are for " + preds.task_id + ", not " + task.id);
  }
  EvalResult r;
  r.task_id = task.id;
  std::vector<int> p, y;
  std::vector<double> pos_scores;
  std::vector<long> pc, yc;
  const int k = task.n_outputs();
  for (const RecordPrediction& rp : preds.records) {
    auto it = labels_by_record.find(rp.record_id);
    if (it == labels_by_record.end()) continue;
    CheckLabel(task, it->second);
    ++r.n_eval;
    switch (task.type) {
      case TaskType::kBinary:
      case TaskType::kMultiClass: {
        if (rp.probs.size() != static_cast<std::size_t>(k)) {
          Fail(Errc::kDimMismatch, rp.record_id + ": expected " + std::to_string(k) + " probabilities");
        }
        p.push_back(static_cast<int>(std::max_element(rp.probs.begin(), rp.probs.end()) -
                                     rp.probs.begin()));
        y.push_back(static_cast<int>(std::get<std::int64_t>(it->second)));
        if (task.type == TaskType::kBinary) pos_scores.push_back(rp.probs[1]);
        break;
      }
      case TaskType::kMultiLabel: {
        if (rp.probs.size() != static_cast<std::size_t>(k)) {
          Fail(Errc::kDimMismatch, rp.record_id + ": expected " + std::to_string(k) + " probabilities");
        }
        const auto& v = std::get<std::vector<int>>(it->second);
        for (int j = 0; j < k; ++j) {
          p.push_back(rp.probs[j] >= 0.5 ? 1 : 0);
          y.push_back(v[j]);
        }
        break;
      }
      case TaskType::kRegression: {
        if (!rp.count) Fail(Errc::kDimMismatch, rp.record_id + ": missing count");
        const long rounded = std::lround(*rp.count);
        pc.push_back(std::clamp<long>(rounded, task.count_min, task.count_max));
        yc.push_back(static_cast<long>(std::get<std::int64_t>(it->second)));
        break;
      }
    }
  }
  if (r.n_eval == 0) Fail(Errc::kEmptyEvaluation, task.id + ": no labeled predictions");
  if (task.type == TaskType::kRegression) {
    r.metrics["accuracy"] = RegressionAccuracy(pc, yc, 0);
    r.metrics["accuracy_pm1"] = RegressionAccuracy(pc, yc, 1);
    return r;
  }
  const F1Result f = task.type == TaskType::kMultiLabel ? MultilabelF1(p, y, k)
                                                        : F1Scores(p, y, k);
  r.metrics["macro_f1"] = f.macro;
  r.metrics["micro_f1"] = f.micro;
  r.per_class_f1 = f.per_class;
  if (task.type == TaskType::kBinary) {
    const bool both = std::find(y.begin(), y.end(), 0) != y.end() &&
                      std::find(y.begin(), y.end(), 1) != y.end();
    if (both) r.metrics["auroc"] = Auroc(pos_scores, y);
  }
  return r;
}

void AppendScores(nlohmann::ordered_json& doc, const std::string& model, const EvalResult& r) {
  if (!doc.is_object()) doc = nlohmann::ordered_json::object();
  for (const auto& [name, value] : r.metrics) doc[model][r.task_id][name] = value;
}

}  // namespace ausculta
