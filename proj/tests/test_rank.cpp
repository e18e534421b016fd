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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "ausculta/error.hpp"
#include "ausculta/json_util.hpp"
#include "ausculta/rank.hpp"

namespace {

using namespace ausculta;
using nlohmann::ordered_json;

ordered_json LoadFixture() {
  std::ifstream in(std::string(AUSCULTA_FIXTURE_DIR) + "/reference_scores.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseJsonDocument(ss.str(), "fixture");
}

// Models A..E with one task column per entry of `columns`.
ordered_json Toy(const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
  ordered_json doc;
  const std::vector<std::string> models{"A", "B", "C", "D", "E"};
  for (std::size_t m = 0; m < models.size(); ++m) {
    ordered_json per = ordered_json::object();
    for (const auto& [task, vals] : columns) per[task]["macro_f1"] = vals[m];
    doc[models[m]] = per;
  }
  return doc;
}

TEST(Rank, ReciprocalRanksForFirstTask) {
  const ScoreTable t = ScoreTableFromJson(LoadFixture(), "macro_f1");
  ASSERT_EQ(t.models.front(), "OPERA-CT");
  const std::vector<double> rr = ReciprocalRanks(t, "T1");
  // {45.41, 38.19, 48.05, 26.01, 48.36}
  EXPECT_DOUBLE_EQ(rr[4], 1.0);
  EXPECT_DOUBLE_EQ(rr[2], 0.5);
  EXPECT_DOUBLE_EQ(rr[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(rr[1], 0.25);
  EXPECT_DOUBLE_EQ(rr[3], 0.2);
}

TEST(Rank, DistinctScoresGiveHarmonicRanks) {
  const ScoreTable t = ScoreTableFromJson(Toy({{"T1", {5, 4, 3, 2, 1}}}), "macro_f1");
  EXPECT_EQ(TaskRanks(t, "T1"), (std::vector<int>{1, 2, 3, 4, 5}));
  EXPECT_EQ(Borda(t, {"T1"}), (std::vector<double>{4, 3, 2, 1, 0}));
}

TEST(Rank, TiesShareMinimumRank) {
  const ScoreTable t = ScoreTableFromJson(Toy({{"T1", {9, 9, 3, 3, 1}}}), "macro_f1");
  EXPECT_EQ(TaskRanks(t, "T1"), (std::vector<int>{1, 1, 3, 3, 5}));
  const std::vector<double> rr = ReciprocalRanks(t, "T1");
  EXPECT_DOUBLE_EQ(rr[0], 1.0);
  EXPECT_DOUBLE_EQ(rr[1], 1.0);
  EXPECT_EQ(Borda(t, {"T1"}), (std::vector<double>{4, 4, 2, 2, 0}));
}

TEST(Rank, TiebreakOrdersOnlyEqualScores) {
  ordered_json doc = Toy({{"T1", {9, 9, 3, 3, 1}}});
  doc["_meta"]["tiebreak"]["macro_f1"]["T1"] = {"B", "A", "D", "C"};
  const ScoreTable t = ScoreTableFromJson(doc, "macro_f1");
  EXPECT_EQ(TaskRanks(t, "T1"), (std::vector<int>{2, 1, 4, 3, 5}));
}

TEST(Rank, MrrOfFixtureGroups) {
  const ScoreTable t = ScoreTableFromJson(LoadFixture(), "macro_f1");
  const std::vector<std::string> abn{"T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8"};
  const std::vector<double> mrr = Mrr(t, abn);
  EXPECT_NEAR(mrr[4], 0.6875, 1e-12);
  EXPECT_NEAR(mrr[0], 0.46875, 1e-12);
}

TEST(Rank, BestEverywhereGivesOne) {
  const ScoreTable t =
      ScoreTableFromJson(Toy({{"T1", {1, 2, 3, 4, 5}}, {"T2", {0, 0.1, 0.2, 0.3, 0.9}}}), "macro_f1");
  const std::vector<double> mrr = Mrr(t, {"T1", "T2"});
  EXPECT_DOUBLE_EQ(mrr[4], 1.0);
  for (double v : mrr) {
    EXPECT_GE(v, 0.2);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Rank, MonotoneTransformInvariance) {
  const std::vector<double> a{0.3, 0.7, 0.1, 0.5, 0.65}, b{12, 3, 40, 7, 7};
  auto f = [](const std::vector<double>& v, double scale, double shift) {
    std::vector<double> out;
    for (double x : v) out.push_back(std::exp(scale * x) + shift);
    return out;
  };
  const ScoreTable t1 = ScoreTableFromJson(Toy({{"T1", a}, {"T2", b}}), "macro_f1");
  const ScoreTable t2 = ScoreTableFromJson(Toy({{"T1", f(a, 2, -5)}, {"T2", f(b, 0.1, 100)}}), "macro_f1");
  EXPECT_EQ(Mrr(t1, {"T1", "T2"}), Mrr(t2, {"T1", "T2"}));
  EXPECT_EQ(Borda(t1, {"T1", "T2"}), Borda(t2, {"T1", "T2"}));
}

TEST(Rank, ModelOrderPermutationKeepsScoresAttached) {
  ordered_json doc = Toy({{"T1", {5, 4, 3, 2, 1}}});
  doc["_meta"]["model_order"] = {"E", "D", "C", "B", "A"};
  const ScoreTable t = ScoreTableFromJson(doc, "macro_f1");
  EXPECT_EQ(Borda(t, {"T1"}), (std::vector<double>{0, 1, 2, 3, 4}));
}

TEST(Rank, ErrorsOnEmptyGroupAndMissingColumn) {
  const ScoreTable t = ScoreTableFromJson(Toy({{"T1", {5, 4, 3, 2, 1}}}), "macro_f1");
  EXPECT_THROW(Mrr(t, {}), Error);
  EXPECT_THROW(Borda(t, {"T2"}), Error);
  ordered_json doc = Toy({{"T1", {5, 4, 3, 2, 1}}});
  doc["C"].erase("T1");
  const ScoreTable partial = ScoreTableFromJson(doc, "macro_f1");
  EXPECT_THROW(ReciprocalRanks(partial, "T1"), Error);
}

TEST(Rank, RegressionReadsAccuracy) {
  EXPECT_EQ(MetricForTask(FindTask("T16"), "macro_f1"), "accuracy");
  EXPECT_EQ(MetricForTask(FindTask("T3"), "micro_f1"), "micro_f1");
}

TEST(Rank, AggregateGroupings) {
  const ScoreTable t = ScoreTableFromJson(LoadFixture(), "macro_f1");
  const RankReport fn = Aggregate(t, Grouping::kFunction);
  EXPECT_EQ(fn.aggregate, "mrr");
  ASSERT_NE(fn.Find("activity_detection"), nullptr);
  EXPECT_DOUBLE_EQ(fn.Find("activity_detection")->values[4], 1.0);
  EXPECT_EQ(fn.Find("overall")->tasks.size(), 15u);
  const RankReport sound = Aggregate(t, Grouping::kSound);
  EXPECT_EQ(sound.aggregate, "borda");
  EXPECT_EQ(sound.Find("B")->tasks, (std::vector<std::string>{"T16"}));
  const RankReport type = Aggregate(t, Grouping::kTaskType);
  EXPECT_NE(type.Find("ML"), nullptr);
  EXPECT_NE(fn.ToCsv().find("overall"), std::string::npos);
  EXPECT_EQ(ParseGrouping("tasktype"), Grouping::kTaskType);
  EXPECT_THROW(ParseGrouping("nope"), Error);
}

TEST(Rank, SchemaErrors) {
  EXPECT_THROW(ScoreTableFromJson(ordered_json::array(), "macro_f1"), Error);
  ordered_json doc = Toy({{"T1", {5, 4, 3, 2, 1}}});
  doc["A"]["T99"]["macro_f1"] = 1.0;
  EXPECT_THROW(ScoreTableFromJson(doc, "macro_f1"), Error);
  ordered_json doc2 = Toy({{"T1", {5, 4, 3, 2, 1}}});
  doc2["A"]["T1"]["macro_f1"] = "high";
  EXPECT_THROW(ScoreTableFromJson(doc2, "macro_f1"), Error);
}

}  // namespace
