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

#include "ausculta/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ausculta/binary_io.hpp"
#include "ausculta/checkpoint.hpp"
#include "ausculta/error.hpp"
#include "ausculta/json_util.hpp"
#include "ausculta/metrics.hpp"
#include "ausculta/pipeline.hpp"
#include "ausculta/pretrain.hpp"
#include "ausculta/probe.hpp"
#include "ausculta/rank.hpp"
#include "ausculta/run_manifest.hpp"
#include "ausculta/svg.hpp"

namespace ausculta {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::WriteFileAtomic(path, {text.data(), text.size()});
}

std::string ReadText(const fs::path& path) {
  const auto bytes = io::ReadFile(path);
  return {bytes.begin(), bytes.end()};
}

// --seed beats AUSCULTA_SEED beats the config value.
std::uint64_t ResolveSeed(std::optional<std::uint64_t> flag, std::uint64_t config_seed) {
  if (flag) return *flag;
  if (const char* env = std::getenv("AUSCULTA_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') Fail(Errc::kInvalidArgument, "AUSCULTA_SEED must be an unsigned integer");
    return v;
  }
  return config_seed;
}

// ---- fixture ---------------------------------------------------------------

struct FixtureArgs {
  std::string out;
  FixtureSpec spec;
  int epochs = 60;
  double lr = 1e-3;
};

int CmdFixture(const FixtureArgs& a) {
  const Corpus corpus = WriteFixture(a.spec, a.out);
  PretrainConfig cfg;
  cfg.corpus = "manifest.jsonl";
  cfg.epochs = a.epochs;
  cfg.lr = a.lr;
  cfg.seed = a.spec.seed;
  cfg.out_dir = "pretrain";
  WriteText(fs::path(a.out) / "pretrain.json", PretrainConfigToJson(cfg).dump(2) + "\n");
  std::cout << "wrote " << corpus.records.size() << " records to " << a.out << "\n";
  return 0;
}

// ---- preprocess ------------------------------------------------------------

struct PreprocessArgs {
  std::string manifest, out;
  bool strict = false;
  int jobs = 1;
};

int CmdPreprocess(const PreprocessArgs& a) {
  const auto t0 = Clock::now();
  const Corpus corpus = LoadManifest(a.manifest, {a.strict});
  PreprocessOptions opt;
  opt.strict = a.strict;
  opt.jobs = a.jobs;
  const PreprocessReport rep = Preprocess(corpus, a.out, opt);
  RunManifest m;
  m.command = "preprocess";
  m.config_hash = ConfigHash(json{{"strict", a.strict}, {"features", "default"}});
  m.inputs = {a.manifest};
  m.outputs = {"manifest.jsonl", "audio/", "features/"};
  m.wall_clock_s = Since(t0);
  WriteRunManifest(a.out, m);
  std::cout << "featurized " << rep.n_written << " records, skipped " << rep.skipped.size() << "\n";
  return 0;
}

// ---- pretrain --------------------------------------------------------------

struct PretrainArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  int export_records = 0;
};

int CmdPretrain(const PretrainArgs& a) {
  const auto t0 = Clock::now();
  const ordered_json raw = ParseJsonDocument(ReadText(a.config), a.config);
  PretrainConfig cfg = ParsePretrainConfig(json(raw), fs::path(a.config).parent_path());
  cfg.seed = ResolveSeed(a.seed, cfg.seed);
  const PretrainResult res = RunPretraining(cfg);
  std::vector<std::string> outputs = {"checkpoint.abcp", "last.abcp", "train_log.csv"};
  if (a.export_records > 0) {
    const Corpus corpus = LoadManifest(cfg.corpus);
    Corpus subset;
    subset.base_dir = corpus.base_dir;
    for (const auto& ds : corpus.DatasetIds()) {
      int taken = 0;
      for (const RecordEntry& r : corpus.records) {
        if (r.dataset_id == ds && taken < a.export_records) {
          subset.records.push_back(r);
          ++taken;
        }
      }
    }
    const Featurizer featurizer(cfg.features);
    std::map<std::string, LogMelSpectrogram> feats;
    for (const RecordEntry& r : subset.records) feats.emplace(r.record_id, LoadFeatures(subset, r, featurizer));
    const nn::Model model = nn::Model::FromState(res.best);
    std::ostringstream os;
    os << "record_id,crop_idx";
    for (int k = 0; k < model.dims().d_p; ++k) os << ",z" << k;
    os << '\n' << std::setprecision(9);
    for (const EmbeddingRow& row : ExportEmbeddings(model, subset, feats, cfg.augment.crops, 8, cfg.seed)) {
      os << row.record_id << ',' << row.crop_index;
      for (double v : row.z) os << ',' << v;
      os << '\n';
    }
    WriteText(cfg.out_dir / "embeddings.csv", os.str());
    outputs.push_back("embeddings.csv");
  }
  json hashed = PretrainConfigToJson(cfg);
  hashed.erase("out_dir");
  RunManifest m;
  m.command = "pretrain";
  m.config_hash = ConfigHash(hashed);
  m.seeds = {cfg.seed};
  m.inputs = {a.config, cfg.corpus.string()};
  m.outputs = outputs;
  m.wall_clock_s = Since(t0);
  WriteRunManifest(cfg.out_dir, m);
  std::cout << "pretrained " << cfg.epochs << " epochs; best epoch " << res.log.best_epoch
            << ", validation accuracy " << res.log.best_accuracy << "\n";
  return 0;
}

// ---- probe -----------------------------------------------------------------

struct ProbeArgs {
  std::string task, ckpt, manifest, out = "probe_out", mode = "linear", space = "encoder";
  std::string model_name = "AuscultaBase";
  int seeds = 1;
  int epochs = 64;
  double lr = 1e-4;
  int batch_size = 32;
};

std::map<std::string, LabelValue> LabelsFor(const Corpus& corpus, const TaskSpec& task) {
  std::map<std::string, LabelValue> out;
  for (const RecordEntry& r : corpus.records) {
    if (auto it = r.labels.find(task.id); it != r.labels.end()) out.emplace(r.record_id, it->second);
  }
  return out;
}

bool HasLabeled(const Corpus& c, const TaskSpec& t, Split s) {
  for (const RecordEntry& r : c.records) {
    if (r.split == s && r.labels.count(t.id)) return true;
  }
  return false;
}

int CmdProbe(const ProbeArgs& a) {
  const auto t0 = Clock::now();
  const TaskSpec& task = FindTask(a.task);
  const Corpus corpus = LoadManifest(a.manifest);
  const nn::NamedTensors state = LoadCheckpoint(a.ckpt);
  const Featurizer featurizer;

  std::vector<Split> train_splits = {Split::kTrain};
  Split eval_split = Split::kTest;
  if (!HasLabeled(corpus, task, Split::kTest)) {
    eval_split = HasLabeled(corpus, task, Split::kValidation) ? Split::kValidation : Split::kTrain;
    std::cerr << "note: no labeled test records for " << task.id << "; evaluating on "
              << SplitName(eval_split) << "\n";
  } else {
    train_splits.push_back(Split::kValidation);
  }
  const SegmentSet train = BuildSegments(corpus, task, train_splits, featurizer);
  const SegmentSet eval = BuildSegments(corpus, task, {eval_split}, featurizer);
  const auto labels = LabelsFor(corpus, task);

  ProbeConfig cfg;
  cfg.mode = ParseProbeMode(a.mode);
  if (a.space != "encoder" && a.space != "projector") {
    Fail(Errc::kInvalidArgument, "--space must be encoder or projector");
  }
  cfg.space = a.space == "encoder" ? ProbeSpace::kEncoder : ProbeSpace::kProjector;
  cfg.epochs = a.epochs;
  cfg.lr = a.lr;
  cfg.batch_size = a.batch_size;
  const std::uint64_t base_seed = ResolveSeed(std::nullopt, 0);

  const fs::path out(a.out);
  std::map<std::string, std::vector<double>> per_metric;
  ordered_json scores = ordered_json::object();
  std::vector<std::string> outputs;
  RunManifest m;
  for (int s = 0; s < a.seeds; ++s) {
    cfg.seed = base_seed + static_cast<std::uint64_t>(s);
    m.seeds.push_back(cfg.seed);
    nn::Model model = nn::Model::FromState(state);
    const ProbeHead head = TrainProbe(model, task, train, cfg);
    const PredictionSet preds = Predict(model, head, task, eval, cfg.space);
    const EvalResult r = Evaluate(task, preds, labels);
    for (const auto& [k, v] : r.metrics) per_metric[k].push_back(v);
    const std::string tag = "seed" + std::to_string(cfg.seed);
    WriteText(out / ("predictions_" + tag + ".jsonl"), PredictionsToJsonl(preds));
    nn::NamedTensors saved = head.State();
    if (cfg.mode == ProbeMode::kFull) {
      const auto enc = model.State();
      saved.insert(saved.begin(), enc.begin(), enc.end());
    }
    SaveCheckpoint(out / ("probe_" + tag + ".abcp"), saved);
    outputs.push_back("predictions_" + tag + ".jsonl");
    outputs.push_back("probe_" + tag + ".abcp");
  }

  std::ostringstream csv;
  csv << "task,metric,mean,std,n_seeds\n" << std::setprecision(10);
  std::cout << task.id << " (" << a.mode << ", " << a.seeds << " seed" << (a.seeds == 1 ? "" : "s")
            << ")\n";
  for (const auto& [k, vals] : per_metric) {
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / vals.size());
    csv << task.id << ',' << k << ',' << mean << ',' << sd << ',' << vals.size() << '\n';
    scores[a.model_name][task.id][k] = mean;
    std::cout << "  " << std::left << std::setw(14) << k << std::fixed << std::setprecision(4)
              << mean << " +- " << sd << "\n";
  }
  WriteText(out / "eval.csv", csv.str());
  WriteText(out / "scores.json", scores.dump(2) + "\n");
  outputs.insert(outputs.end(), {"eval.csv", "scores.json"});

  m.command = "probe";
  json hashed = {{"task", task.id}, {"mode", a.mode}, {"space", a.space}, {"epochs", cfg.epochs},
                 {"lr", cfg.lr}, {"batch_size", cfg.batch_size}, {"seeds", a.seeds}};
  m.config_hash = ConfigHash(hashed);
  m.inputs = {a.ckpt, a.manifest};
  m.outputs = outputs;
  m.wall_clock_s = Since(t0);
  WriteRunManifest(out, m);
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string task, predictions, manifest, scores, model_name = "AuscultaBase";
};

int CmdEval(const EvalArgs& a) {
  const TaskSpec& task = FindTask(a.task);
  const Corpus corpus = LoadManifest(a.manifest);
  const PredictionSet preds = PredictionsFromJsonl(ReadText(a.predictions));
  const EvalResult r = Evaluate(task, preds, LabelsFor(corpus, task));
  ordered_json out;
  out["task"] = task.id;
  out["n_eval"] = r.n_eval;
  for (const auto& [k, v] : r.metrics) out["metrics"][k] = v;
  if (!r.per_class_f1.empty()) out["per_class_f1"] = r.per_class_f1;
  std::cout << out.dump(2) << "\n";
  if (!a.scores.empty()) {
    ordered_json doc = fs::exists(a.scores) ? ParseJsonDocument(ReadText(a.scores), a.scores)
                                            : ordered_json::object();
    AppendScores(doc, a.model_name, r);
    WriteText(a.scores, doc.dump(2) + "\n");
  }
  return 0;
}

// ---- rank ------------------------------------------------------------------

struct RankArgs {
  std::string scores, group = "function", metric = "macro_f1", out = "rank_out";
};

void PrintReport(const RankReport& r) {
  std::cout << r.aggregate << " by " << r.grouping << " (" << r.metric << ")\n";
  std::cout << std::left << std::setw(24) << "group";
  for (const auto& m : r.models) std::cout << std::right << std::setw(14) << m;
  std::cout << "\n";
  for (const auto& g : r.groups) {
    std::cout << std::left << std::setw(24) << g.name;
    for (double v : g.values) {
      std::cout << std::right << std::setw(14) << std::fixed
                << std::setprecision(r.aggregate == "mrr" ? 4 : 0) << v;
    }
    std::cout << "\n";
  }
}

int CmdRank(const RankArgs& a) {
  const auto t0 = Clock::now();
  const std::string text = ReadText(a.scores);
  const ordered_json doc = ParseJsonDocument(text, a.scores);
  const Grouping grouping = ParseGrouping(a.group);
  std::vector<std::string> metrics;
  if (a.metric == "all") {
    metrics = {"macro_f1", "micro_f1"};
  } else {
    metrics = {a.metric};
  }
  const fs::path out(a.out);
  std::vector<std::string> outputs;
  ordered_json combined = ordered_json::array();
  std::string csv;
  for (const std::string& metric : metrics) {
    const RankReport rep = Aggregate(ScoreTableFromJson(doc, metric), grouping);
    PrintReport(rep);
    combined.push_back(rep.ToJson());
    const std::string body = rep.ToCsv();
    csv += csv.empty() ? body : body.substr(body.find('\n') + 1);
    const std::string label = rep.aggregate == "mrr" ? "MRR" : "Borda count";
    if (grouping == Grouping::kSound) {
      for (const GroupScore& g : rep.groups) {
        const std::string name = "borda_" + metric + "_" + g.name + ".svg";
        WriteText(out / name, svg::BarChart(label + " (" + metric + "), sound type " + g.name,
                                            rep.models, g.values));
        outputs.push_back(name);
      }
    } else {
      std::vector<std::string> cats;
      std::vector<svg::Series> series;
      for (const GroupScore& g : rep.groups) cats.push_back(g.name);
      for (std::size_t i = 0; i < rep.models.size(); ++i) {
        svg::Series s{rep.models[i], {}};
        for (const GroupScore& g : rep.groups) s.values.push_back(g.values[i]);
        series.push_back(std::move(s));
      }
      const std::string name = rep.aggregate + "_" + metric + "_" + rep.grouping + ".svg";
      WriteText(out / name, grouping == Grouping::kTaskType
                                ? svg::RadarChart(label + " by task type (" + metric + ")", cats, series)
                                : svg::GroupedBarChart(label + " by function (" + metric + ")", cats, series));
      outputs.push_back(name);
    }
  }
  WriteText(out / "rank_report.json", (metrics.size() == 1 ? combined[0] : combined).dump(2) + "\n");
  WriteText(out / "rank_report.csv", csv);
  outputs.insert(outputs.begin(), {"rank_report.json", "rank_report.csv"});
  RunManifest m;
  m.command = "rank";
  m.config_hash = ConfigHash(json{{"group", a.group}, {"metric", a.metric},
                                  {"scores_hash", std::to_string(Fnv1a64(text))}});
  m.inputs = {a.scores};
  m.outputs = outputs;
  m.wall_clock_s = Since(t0);
  WriteRunManifest(out, m);
  return 0;
}

// ---- tasks -----------------------------------------------------------------

int CmdTasks(bool as_json) {
  if (as_json) {
    std::cout << RegistryToJson().dump(2) << "\n";
    return 0;
  }
  for (const TaskSpec& t : BuiltinRegistry()) {
    std::cout << std::left << std::setw(5) << t.id << std::setw(12) << t.dataset_id
              << SoundTypeCode(t.sound) << "  " << std::setw(3) << TaskTypeCode(t.type) << ' '
              << std::setw(6) << t.chunk_s << std::setw(24) << FunctionGroupName(t.group);
    if (t.type == TaskType::kRegression) {
      std::cout << t.count_min << ".." << t.count_max;
    } else {
      for (std::size_t i = 0; i < t.class_names.size(); ++i) {
        std::cout << (i ? " / " : "") << t.class_names[i];
      }
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int RunCli(int argc, const char* const* argv) {
  CLI::App app{"Body-sound representation learning and benchmarking toolkit", "ausculta"};
  app.require_subcommand(1);

  FixtureArgs fx;
  auto* fixture = app.add_subcommand("fixture", "Write a synthetic labeled corpus");
  fixture->add_option("--out", fx.out, "Output directory")->required();
  fixture->add_option("--records", fx.spec.n_records, "Train records per dataset");
  fixture->add_option("--validation", fx.spec.n_validation, "Validation records per dataset");
  fixture->add_option("--test", fx.spec.n_test, "Test records per dataset");
  fixture->add_option("--datasets", fx.spec.n_datasets, "Number of datasets");
  fixture->add_option("--duration", fx.spec.duration_s, "Clip length in seconds");
  fixture->add_option("--task", fx.spec.task_id, "Label key (binary tasks), empty for none");
  fixture->add_option("--seed", fx.spec.seed, "Generator seed");
  fixture->add_option("--epochs", fx.epochs, "Epochs written to pretrain.json");
  fixture->add_option("--lr", fx.lr, "Learning rate written to pretrain.json");

  PreprocessArgs pp;
  auto* preprocess = app.add_subcommand("preprocess", "Canonicalize audio and cache log-mel features");
  preprocess->add_option("--manifest", pp.manifest, "Corpus manifest (JSON Lines)")->required();
  preprocess->add_option("--out", pp.out, "Output directory")->required();
  preprocess->add_flag("--strict", pp.strict, "Fail on the first bad record");
  preprocess->add_option("--jobs", pp.jobs, "Worker threads")->check(CLI::PositiveNumber);

  PretrainArgs pt;
  std::uint64_t seed_flag = 0;
  auto* pretrain = app.add_subcommand("pretrain", "Contrastive pretraining");
  pretrain->add_option("--config", pt.config, "Training config JSON")->required();
  auto* seed_opt = pretrain->add_option("--seed", seed_flag, "Override the config seed");
  pretrain->add_option("--export-embeddings", pt.export_records,
                       "Also export 8-crop projector embeddings for N records per dataset");

  ProbeArgs pr;
  auto* probe = app.add_subcommand("probe", "Train and evaluate a task head");
  probe->add_option("--task", pr.task, "Task id, T1-T16")->required();
  probe->add_option("--ckpt", pr.ckpt, "Pretrained checkpoint")->required();
  probe->add_option("--manifest", pr.manifest, "Labeled corpus manifest")->required();
  probe->add_option("--mode", pr.mode, "linear | full");
  probe->add_option("--space", pr.space, "encoder | projector");
  probe->add_option("--seeds", pr.seeds, "Number of seeds")->check(CLI::PositiveNumber);
  probe->add_option("--epochs", pr.epochs, "Head epochs");
  probe->add_option("--lr", pr.lr, "Head learning rate");
  probe->add_option("--batch-size", pr.batch_size, "Head minibatch size")->check(CLI::PositiveNumber);
  probe->add_option("--model-name", pr.model_name, "Model key in scores.json");
  probe->add_option("--out", pr.out, "Output directory");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Score a predictions file");
  eval->add_option("--task", ev.task, "Task id")->required();
  eval->add_option("--predictions", ev.predictions, "Predictions JSONL")->required();
  eval->add_option("--manifest", ev.manifest, "Manifest with labels")->required();
  eval->add_option("--scores", ev.scores, "Scores JSON to append to");
  eval->add_option("--model-name", ev.model_name, "Model key in the scores JSON");

  RankArgs rk;
  auto* rank = app.add_subcommand("rank", "MRR / Borda aggregation over a scores JSON");
  rank->add_option("--scores", rk.scores, "Scores JSON")->required();
  rank->add_option("--group", rk.group, "function | sound | tasktype");
  rank->add_option("--metric", rk.metric, "macro_f1 | micro_f1 | all");
  rank->add_option("--out", rk.out, "Output directory");

  bool tasks_json = false;
  auto* tasks = app.add_subcommand("tasks", "List the task registry");
  tasks->add_flag("--json", tasks_json, "Emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*fixture) return CmdFixture(fx);
    if (*preprocess) return CmdPreprocess(pp);
    if (*pretrain) {
      if (*seed_opt) pt.seed = seed_flag;
      return CmdPretrain(pt);
    }
    if (*probe) return CmdProbe(pr);
    if (*eval) return CmdEval(ev);
    if (*rank) return CmdRank(rk);
    if (*tasks) return CmdTasks(tasks_json);
  } catch (const Error& e) {
    std::cerr << "error [" << ErrcName(e.code()) << "]: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error [IoError]: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace ausculta
