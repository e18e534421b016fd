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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "../cli_util.hpp"
#include "../gradcheck.hpp"
#include "../metric_oracles.hpp"
#include "../test_util.hpp"
#include "ausculta/checkpoint.hpp"
#include "ausculta/error.hpp"
#include "ausculta/metrics.hpp"
#include "ausculta/pipeline.hpp"
#include "ausculta/pretrain.hpp"
#include "ausculta/probe.hpp"

namespace {

using namespace ausculta;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---- 1: rank aggregation over the reference per-task scores ----------------

Outcome RankReproduction() {
  const fs::path dir = ScratchDir("acc_rank");
  const auto t0 = Clock::now();
  std::fflush(stdout);
  testing_quiet:;
  const int rc = RunAusculta({"rank", "--scores", std::string(AUSCULTA_FIXTURE_DIR) + "/reference_scores.json",
                              "--group", "function", "--metric", "all", "--out", (dir / "out").string()});
  const double elapsed = Seconds(t0);
  if (rc != 0) return {false, "rank exited " + std::to_string(rc)};
  const auto reports = nlohmann::json::parse(Slurp(dir / "out/rank_report.json"));
  const std::vector<std::string> models{"OPERA-CT", "AudioMAE", "CLAP", "PANN", "AuscultaBase"};
  using Row = std::vector<double>;
  const std::map<std::string, std::map<std::string, Row>> expected = {
      {"macro_f1",
       {{"abnormality_detection", {0.4688, 0.2854, 0.6042, 0.2375, 0.6875}},
        {"disease_diagnosis", {0.3571, 0.2571, 0.4381, 0.3024, 0.9286}},
        {"overall", {0.4167, 0.2722, 0.5267, 0.2678, 0.8000}},
        {"activity_detection", {0.3333, 0.2000, 0.2500, 0.5000, 1.0000}}}},
      {"micro_f1",
       {{"abnormality_detection", {0.4583, 0.2854, 0.4292, 0.3396, 0.7708}},
        {"disease_diagnosis", {0.3426, 0.4500, 0.3262, 0.3071, 0.8571}},
        {"overall", {0.4044, 0.3622, 0.3811, 0.3244, 0.8111}},
        {"activity_detection", {0.3333, 0.2000, 0.2500, 0.5000, 1.0000}}}}};
  int checked = 0;
  std::string misses;
  for (const auto& rep : reports) {
    const std::string metric = rep["metric"];
    for (const auto& g : rep["groups"]) {
      const Row& want = expected.at(metric).at(g["name"]);
      for (std::size_t i = 0; i < models.size(); ++i) {
        const double got = g["values"][models[i]];
        ++checked;
        if (std::abs(got - want[i]) > 5e-5) {
          char buf[160];
          std::snprintf(buf, sizeof buf, " %s/%s/%s got %.6f want %.4f;", metric.c_str(),
                        g["name"].get<std::string>().c_str(), models[i].c_str(), got, want[i]);
          misses += buf;
        }
      }
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d entries checked, %.3fs", checked, elapsed);
  const bool ok = misses.empty() && checked == 40 && elapsed < 1.0;
  return {ok, std::string(buf) + (misses.empty() ? "" : "; mismatches:" + misses)};
}

// ---- 2: contrastive loss ---------------------------------------------------

Outcome ContrastiveLossCorrectness() {
  double worst_ln = 0.0, worst_oracle = 0.0;
  for (int n : {2, 4, 16}) {
    for (double c : {0.0, -2.5, 7.0}) {
      worst_ln = std::max(worst_ln, std::abs(ContrastiveLoss(Tensor({n, n}, c)).loss - std::log(n)));
    }
  }
  Rng rng(2024);
  for (int n = 3; n <= 8; ++n) {
    for (int trial = 0; trial < 20; ++trial) {
      Tensor s({n, n});
      for (double& v : s.data) v = rng.Uniform(-4, 4);
      double naive = 0.0;
      for (int i = 0; i < n; ++i) {
        double denom = 0.0;
        for (int j = 0; j < n; ++j) denom += std::exp(s[i * n + j]);
        naive -= std::log(std::exp(s[i * n + i]) / denom);
      }
      naive /= n;
      worst_oracle = std::max(worst_oracle, std::abs(ContrastiveLoss(s).loss - naive));
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "max |loss - ln N| %.2e, max |loss - naive| %.2e", worst_ln, worst_oracle);
  return {worst_ln < 1e-9 && worst_oracle < 1e-12, buf};
}

// ---- 3: finite-difference gradients ----------------------------------------

Outcome GradientFidelity() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t checked = 0, kinks = 0, uncovered = 0;
  std::string where;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const gradcheck::Result r = gradcheck::Check(seed);
    checked += r.n_checked;
    kinks += r.n_kink;
    uncovered += r.uncovered.size();
    if (r.max_rel_err > worst) {
      worst = r.max_rel_err;
      where = "seed " + std::to_string(seed) + " " + r.worst;
    }
  }
  const double elapsed = Seconds(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "5 seeds, %zu entries (%zu kink-crossing probes skipped, %zu tensors uncovered), "
                "max rel err %.2e, %.1fs",
                checked, kinks, uncovered, worst, elapsed);
  return {worst < 1e-4 && uncovered == 0 && elapsed < 30.0, std::string(buf) + " (" + where + ")"};
}

// ---- 4: learning signal on the synthetic fixture ---------------------------

Outcome LearningSignal() {
  const auto t0 = Clock::now();
  int reached = 0;
  bool monotone = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    FixtureSpec fs;
    fs.n_records = 16;
    fs.n_validation = 4;
    fs.seed = seed;
    const Corpus corpus = WriteFixture(fs, ScratchDir("acc_learn_" + std::to_string(seed)));
    const Featurizer featurizer;
    std::map<std::string, LogMelSpectrogram> feats;
    for (const RecordEntry& r : corpus.records) feats.emplace(r.record_id, LoadFeatures(corpus, r, featurizer));
    PretrainConfig cfg;
    cfg.batch_size = 4;
    cfg.epochs = 60;
    cfg.lr = 1e-3;
    cfg.seed = seed;
    const PretrainResult res = TrainContrastive(corpus, feats, cfg);
    reached += res.log.best_accuracy >= 0.9;
    // EMA (alpha 0.5) over per-epoch mean training loss.
    const std::vector<double> tl = res.log.EpochTrainLoss();
    double ema = tl.at(0), prev = ema;
    bool seed_mono = true;
    for (int e = 1; e < 5; ++e) {
      ema = 0.5 * ema + 0.5 * tl.at(e);
      seed_mono = seed_mono && ema < prev;
      prev = ema;
    }
    monotone = monotone && seed_mono;
    char buf[96];
    std::snprintf(buf, sizeof buf, "seed %llu acc %.2f%s; ", static_cast<unsigned long long>(seed),
                  res.log.best_accuracy, seed_mono ? "" : " (non-monotone)");
    detail += buf;
  }
  const double elapsed = Seconds(t0);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fs", elapsed);
  return {reached >= 2 && monotone && elapsed < 120.0, detail + buf};
}

// ---- 5: metric oracles -----------------------------------------------------

Outcome MetricOracles() {
  std::size_t cases = 0;
  double worst = 0.0;
  for (int k = 2; k <= 3; ++k) {
    for (int n = 1; n <= 6; ++n) {
      int total = 1;
      for (int i = 0; i < 2 * n; ++i) total *= k;
      std::vector<int> p(n), y(n);
      for (int code = 0; code < total; ++code) {
        int c = code;
        for (int i = 0; i < n; ++i, c /= k) p[i] = c % k;
        for (int i = 0; i < n; ++i, c /= k) y[i] = c % k;
        const F1Result r = F1Scores(p, y, k);
        const oracle::F1 o = oracle::SingleLabelF1(p, y);
        worst = std::max({worst, std::abs(r.macro - o.macro), std::abs(r.micro - o.micro)});
        ++cases;
      }
    }
  }
  for (int n = 2; n <= 6; ++n) {
    int n_scores = 1;
    for (int i = 0; i < n; ++i) n_scores *= n;  // every rank pattern with ties
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (int sc = 0; sc < n_scores; ++sc) {
      for (int i = 0, c = sc; i < n; ++i, c /= n) s[i] = 0.1 * (c % n);
      for (int lc = 1; lc < (1 << n) - 1; ++lc) {
        for (int i = 0; i < n; ++i) y[i] = (lc >> i) & 1;
        worst = std::max(worst, std::abs(Auroc(s, y) - oracle::PairwiseAuroc(s, y)));
        ++cases;
      }
    }
  }
  const double worked = Auroc(std::vector<double>{0.1, 0.2, 0.3, 0.4}, std::vector<int>{0, 1, 0, 1});
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu cases, max deviation %.2e, worked example AUROC %.17g", cases, worst,
                worked);
  return {worst < 1e-12 && worked == 0.75, buf};
}

// ---- 6: probe protocol -----------------------------------------------------

std::uint64_t Checksum(const nn::NamedTensors& state) {
  const auto bytes = EncodeCheckpoint(state);
  return Fnv1a64(std::string_view(bytes.data(), bytes.size()));
}

Outcome ProbeContract() {
  FixtureSpec fs;
  fs.n_records = 8;
  fs.seed = 4;
  const Corpus corpus = WriteFixture(fs, ScratchDir("acc_probe"));
  const TaskSpec& task = FindTask("T13");
  const SegmentSet train = BuildSegments(corpus, task, {Split::kTrain}, Featurizer{});
  nn::Model model(nn::ModelDims{}, 1);
  nn::NamedTensors encoder_before;
  for (const auto& kv : model.State())
    if (kv.first.starts_with("encoder.")) encoder_before.push_back(kv);
  ProbeConfig cfg;  // 64 epochs
  TrainProbe(model, task, train, cfg);
  const bool unchanged = Checksum(encoder_before) == Checksum(SelectPrefix(model.State(), "encoder."));

  // Two well-separated clusters in a 32-d embedding space.
  Rng rng(17);
  const int n_train = 256, n_test = 128, d = 32;
  auto make = [&](int n, Tensor& x, std::vector<LabelValue>& labels) {
    x = Tensor({n, d});
    for (int i = 0; i < n; ++i) {
      const int cls = i % 2;
      for (int k = 0; k < d; ++k) x[i * d + k] = rng.Normal(0, 0.5) + (cls ? 1.0 : -1.0) * (k < 4);
      labels.emplace_back(static_cast<std::int64_t>(cls));
    }
  };
  Tensor xtr, xte;
  std::vector<LabelValue> ytr, yte;
  make(n_train, xtr, ytr);
  make(n_test, xte, yte);
  const ProbeHead head = TrainHead(xtr, ytr, task, cfg);
  std::vector<std::string> ids;
  std::map<std::string, LabelValue> truth;
  for (int i = 0; i < n_test; ++i) {
    ids.push_back("s" + std::to_string(i));
    truth.emplace(ids.back(), yte[i]);
  }
  const double f1 = Evaluate(task, AggregateLogits(task, ids, HeadLogits(head, xte)), truth).metrics.at("macro_f1");
  char buf[128];
  std::snprintf(buf, sizeof buf, "encoder checksum %s after 64 epochs, separable Macro-F1 %.4f",
                unchanged ? "unchanged" : "CHANGED", f1);
  return {unchanged && f1 >= 0.99, buf};
}

// ---- 7: pipeline determinism -----------------------------------------------

struct PipelineRun {
  std::map<std::string, std::string> features;
  std::string checkpoint, last;
};

PipelineRun RunPipeline(const fs::path& root) {
  PipelineRun out;
  if (RunAusculta({"fixture", "--out", (root / "raw").string(), "--records", "8", "--validation", "4",
                   "--seed", "3", "--epochs", "3"}) != 0 ||
      RunAusculta({"preprocess", "--manifest", (root / "raw/manifest.jsonl").string(), "--out",
                   (root / "pp").string(), "--jobs", "2"}) != 0) {
    return out;
  }
  auto cfg = nlohmann::json::parse(Slurp(root / "raw/pretrain.json"));
  cfg["corpus"] = (root / "pp/manifest.jsonl").string();
  cfg["out_dir"] = (root / "pt").string();
  Spit(root / "pretrain.json", cfg.dump(2));
  if (RunAusculta({"pretrain", "--config", (root / "pretrain.json").string()}) != 0) return out;
  for (const auto& e : fs::directory_iterator(root / "pp/features")) {
    out.features[e.path().filename().string()] = Slurp(e.path());
  }
  out.checkpoint = Slurp(root / "pt/checkpoint.abcp");
  out.last = Slurp(root / "pt/last.abcp");
  return out;
}

Outcome PipelineDeterminism() {
  const PipelineRun a = RunPipeline(ScratchDir("acc_det_a"));
  const PipelineRun b = RunPipeline(ScratchDir("acc_det_b"));
  if (a.checkpoint.empty() || b.checkpoint.empty()) return {false, "pipeline command failed"};
  const bool same = a.features == b.features && a.checkpoint == b.checkpoint && a.last == b.last;
  return {same && a.features.size() == 12, std::to_string(a.features.size()) + " feature caches and 2 checkpoints " +
                                               (same ? "byte-identical" : "DIFFER")};
}

// ---- 8: format round trips and manifest validation -------------------------

Errc CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::kInvalidArgument;
}

Outcome FormatRoundTrips() {
  const fs::path dir = ScratchDir("acc_formats");
  nn::Model model(nn::ModelDims{}, 12);
  SaveCheckpoint(dir / "a.abcp", model.State());
  SaveCheckpoint(dir / "b.abcp", LoadCheckpoint(dir / "a.abcp"));
  const bool ckpt = Slurp(dir / "a.abcp") == Slurp(dir / "b.abcp");

  AudioClip clip;
  clip.sample_rate = kCanonicalRate;
  Rng rng(3);
  for (int i = 0; i < kCanonicalRate; ++i) clip.samples.push_back(static_cast<float>(rng.Uniform(-0.5, 0.5)));
  const auto first = EncodeFeatureCache(Featurizer{}(clip));
  const auto second = EncodeFeatureCache(DecodeFeatureCache(first));
  const bool cache = first == second;

  auto line = [](const std::string& id, const std::string& labels) {
    return R"({"v":1,"record_id":")" + id +
           R"(","dataset_id":"BowelSound","sound_type":"B","audio_path":"x.wav","split":"train","labels":)" +
           labels + "}\n";
  };
  const bool rejects44 = CodeOf([&] { ParseManifest(line("a", R"({"T16":44})"), "."); }) == Errc::kLabelOutOfRange;
  const bool accepts43 = CodeOf([&] { ParseManifest(line("a", R"({"T16":43})"), "."); }) == Errc::kInvalidArgument;
  const bool rejects_dup =
      CodeOf([&] { ParseManifest(line("a", R"({"T16":1})") + line("a", R"({"T16":2})"), "."); }) ==
      Errc::kDuplicateRecordId;
  std::string detail = std::string("checkpoint ") + (ckpt ? "ok" : "DIFFERS") + ", feature cache " +
                       (cache ? "ok" : "DIFFERS") + ", T16=44 " + (rejects44 ? "rejected" : "ACCEPTED") +
                       ", T16=43 " + (accepts43 ? "accepted" : "REJECTED") + ", duplicate id " +
                       (rejects_dup ? "rejected" : "ACCEPTED");
  return {ckpt && cache && rejects44 && accepts43 && rejects_dup, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 rank aggregation matches reference MRR values", RankReproduction},
      {"2 contrastive loss ln N and naive oracle", ContrastiveLossCorrectness},
      {"3 full-stack finite-difference gradients", GradientFidelity},
      {"4 desk-scale learning signal", LearningSignal},
      {"5 metric oracle equivalence", MetricOracles},
      {"6 probe protocol contract", ProbeContract},
      {"7 pipeline determinism", PipelineDeterminism},
      {"8 format round trips and manifest validation", FormatRoundTrips},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      // CLI commands print progress; keep it out of the criterion lines.
      std::fflush(stdout);
      const int saved = dup(STDOUT_FILENO);
      const int null_fd = open("/dev/null", O_WRONLY);
      dup2(null_fd, STDOUT_FILENO);
      try {
        o = fn();
      } catch (...) {
        std::fflush(stdout);
        dup2(saved, STDOUT_FILENO);
        close(saved);
        close(null_fd);
        throw;
      }
      std::fflush(stdout);
      dup2(saved, STDOUT_FILENO);
      close(saved);
      close(null_fd);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
