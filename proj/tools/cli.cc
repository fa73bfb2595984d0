// Copyright 2026 The spatialq Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "CLI11.hpp"
#include "gradcheck.h"
#include "json.hpp"
#include "spatialq/binaural.h"
#include "spatialq/corpus.h"
#include "spatialq/errors.h"
#include "spatialq/metric.h"
#include "spatialq/qnet.h"
#include "spatialq/stats.h"
#include "spatialq/trainer.h"

namespace spatialq {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Order of the fallback head; covers any signal we accept.
constexpr int kBuiltinHeadOrder = 7;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string Fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

struct HeadOptions {
  std::string filters;
  bool allow_builtin = false;
};

void AddHeadOptions(CLI::App* cmd, HeadOptions& h) {
  cmd->add_option("--filters", h.filters, "Directory of binaural filter WAVs");
  cmd->add_flag("--allow-builtin-head", h.allow_builtin,
                "Use a cardioid head when no filter directory is available");
}

std::vector<RenderFilterSet> ResolveHeads(const HeadOptions& h,
                                          std::ostream& err) {
  if (!h.filters.empty() && fs::is_directory(h.filters)) {
    return LoadHeads(h.filters);
  }
  if (h.allow_builtin) {
    if (!h.filters.empty()) {
      err << "warning: filter directory '" << h.filters
          << "' not found, using the builtin cardioid head\n";
    }
    return {BuiltinCardioidHead(kBuiltinHeadOrder)};
  }
  if (h.filters.empty()) throw UsageError("--filters is required");
  throw DataError("filter directory not found: " + h.filters);
}

Normalization ParseNormalization(const std::string& s) {
  if (s == "sn3d") return Normalization::kSN3D;
  if (s == "n3d") return Normalization::kN3D;
  throw UsageError("--normalization must be sn3d or n3d");
}

size_t DefaultThreads() {
  return std::max(1u, std::thread::hardware_concurrency());
}

Json ConfigJson(const NetConfig& c) {
  return {{"features", c.feature_count},
          {"bands", c.band_count},
          {"frame_ms", static_cast<int>(std::lround(c.frame_duration_s * 1000))},
          {"pre_weighting", c.pre_weighting},
          {"frequency_weighting",
           c.frequency_weighting == FrequencyWeighting::kSoftmax ? "softmax"
                                                                 : "linear"},
          {"hidden", c.hidden_dim}};
}

int DoScore(const std::string& ref_path, const std::string& deg_path,
            const std::string& model_path, const HeadOptions& heads_opt,
            const std::string& norm, size_t threads, bool json,
            std::ostream& out, std::ostream& err) {
  const Normalization n = ParseNormalization(norm);
  const ModelParams params = LoadParams(model_path);
  const std::vector<RenderFilterSet> heads = ResolveHeads(heads_opt, err);
  const SoundFieldSignal ref = ReadSoundField(ref_path, n);
  const SoundFieldSignal deg = ReadSoundField(deg_path, n);
  const MetricScore s = ScorePair(ref, deg, heads, params, threads);
  if (json) {
    Json j;
    j["score"] = s.score;
    Json list = Json::array();
    for (const HeadScore& h : s.heads) {
      list.push_back({{"head", h.head}, {"score", h.score}});
    }
    j["heads"] = std::move(list);
    out << j.dump(2) << "\n";
  } else {
    out << "score: " << Fixed(s.score, 3) << "\n";
    for (const HeadScore& h : s.heads) {
      out << "  " << h.head << ": " << Fixed(h.score, 3) << "\n";
    }
  }
  return kExitOk;
}

struct TrainArgs {
  std::string manifest, out, report, norm = "sn3d";
  HeadOptions heads;
  uint64_t seed = 0;
  bool no_diffuseness = false, no_preweight = false, json = false;
  int frame_ms = 40;
  size_t threads = DefaultThreads();
  size_t max_epochs = 1000;
  size_t patience = 15;
};

int DoTrain(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  NetConfig net;
  net.feature_count = a.no_diffuseness ? 3 : 4;
  net.pre_weighting = !a.no_preweight;
  net.frame_duration_s = a.frame_ms / 1000.0;
  net.Validate();
  TrainHyper hyper;
  hyper.seed = a.seed;
  hyper.max_epochs = a.max_epochs;
  hyper.patience_epochs = a.patience;
  hyper.Validate();
  const PipelineOptions options{ParseNormalization(a.norm), a.threads};

  const std::vector<RatedPair> pairs = LoadManifest(a.manifest);
  const std::vector<RenderFilterSet> heads = ResolveHeads(a.heads, err);
  const std::vector<RatedPair> train = FilterSplit(pairs, Split::kTrain);
  const std::vector<RatedPair> val = FilterSplit(pairs, Split::kVal);
  TrainHooks hooks;
  if (!a.json) {
    hooks.on_epoch = [&out](const EpochRecord& e) {
      out << "epoch " << e.epoch << "  loss " << Fixed(e.train_loss, 6)
          << "  val_pearson "
          << (std::isnan(e.val_pearson) ? std::string("nan")
                                        : Fixed(e.val_pearson, 4))
          << "\n";
    };
  }
  const TrainResult result = Train(train, val, heads, net, hyper, options, hooks);
  SaveParams(result.params, a.out);
  const std::string report = result.report.ToJson();
  if (!a.report.empty()) {
    std::ofstream f(a.report);
    f << report << "\n";
    if (!f) throw DataError("cannot write report " + a.report);
  }
  if (a.json) {
    out << report << "\n";
  } else {
    out << "best epoch " << result.report.best_epoch << " (val_pearson "
        << Fixed(result.report.best_val_pearson, 4) << "), "
        << result.report.total_steps << " steps\n"
        << "model written to " << a.out << "\n";
  }
  return kExitOk;
}

struct EvalArgs {
  std::string manifest, model, split = "all", norm = "sn3d",
                               rmse_star = "normalized", predictions;
  HeadOptions heads;
  std::vector<std::string> subsets;
  bool include_hidden_ref = false, json = false;
  size_t threads = DefaultThreads();
};

int DoEval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<SubsetFilter> subsets;
  for (const std::string& s : a.subsets) {
    try {
      subsets.push_back(SubsetFilter::ParseSpec(s));
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  if (subsets.empty()) subsets = DefaultSubsets();
  RmseStarForm form = RmseStarForm::kNormalized;
  if (a.rmse_star == "literal") {
    form = RmseStarForm::kLiteralSum;
  } else if (a.rmse_star != "normalized") {
    throw UsageError("--rmse-star must be normalized or literal");
  }
  const ModelParams params = LoadParams(a.model);
  const std::vector<RenderFilterSet> heads = ResolveHeads(a.heads, err);
  std::vector<RatedPair> pairs = LoadManifest(a.manifest);
  if (a.split != "all") {
    Split split;
    if (a.split == "train") {
      split = Split::kTrain;
    } else if (a.split == "val") {
      split = Split::kVal;
    } else if (a.split == "test") {
      split = Split::kTest;
    } else {
      throw UsageError("--split must be all, train, val or test");
    }
    pairs = FilterSplit(pairs, split);
  }
  const EvaluationResult result =
      EvaluateModel(pairs, heads, params,
                    {ParseNormalization(a.norm), a.threads},
                    !a.include_hidden_ref);
  if (!a.predictions.empty()) {
    std::ofstream f(a.predictions);
    f << "id,condition,predicted,mos,ci95\n";
    for (const ScoredRow& r : result.rows) {
      f << r.id << "," << r.condition << "," << Fixed(r.predicted, 6) << ","
        << Fixed(r.mos, 4) << "," << Fixed(r.ci95, 4) << "\n";
    }
    if (!f) throw DataError("cannot write predictions " + a.predictions);
  }
  const std::vector<SubsetReport> report = Report(result.rows, subsets, form);
  out << (a.json ? ReportToJson(report) + "\n" : ReportToText(report));
  for (const std::string& e : result.errors) err << "error: " << e << "\n";
  return result.errors.empty() ? kExitOk : kExitData;
}

struct SynthArgs {
  std::string out;
  uint64_t seed = 0;
  int order = 1;
  size_t variants = 6;
  double duration_s = 2.0;
  size_t val_contents = 0, test_contents = 0;
  size_t threads = DefaultThreads();
};

int DoSynth(const SynthArgs& a, std::ostream& out) {
  CorpusSpec spec;
  spec.seed = a.seed;
  spec.order = a.order;
  spec.variants = a.variants;
  spec.duration_s = a.duration_s;
  if (a.val_contents) spec.val_contents = a.val_contents;
  if (a.test_contents) spec.test_contents = a.test_contents;
  const fs::path manifest = BuildCorpus(spec, a.out, a.threads);
  out << "wrote " << spec.num_contents() << " contents x "
      << spec.conditions.size() << " conditions to " << manifest.string()
      << "\n";
  return kExitOk;
}

int DoGradcheck(uint64_t seed, size_t seeds, bool json, std::ostream& out) {
  const GradCheckResult r = RunGradientCheck(seed, seeds);
  if (json) {
    Json j;
    j["passed"] = r.passed;
    j["max_relative_error"] = r.max_relative_error;
    Json list = Json::array();
    for (const GradCheckCase& c : r.cases) {
      list.push_back({{"features", c.feature_count},
                      {"frame_ms", static_cast<int>(std::lround(c.frame_duration_s * 1000))},
                      {"seed", c.seed},
                      {"checked", c.checked},
                      {"skipped", c.skipped},
                      {"max_relative_error", c.max_relative_error}});
    }
    j["cases"] = std::move(list);
    out << j.dump(2) << "\n";
  } else {
    char line[160];
    for (const GradCheckCase& c : r.cases) {
      std::snprintf(line, sizeof(line),
                    "F=%zu frame=%3d ms seed=%llu  checked %zu skipped %zu  "
                    "max rel err %.3e%s%s\n",
                    c.feature_count,
                    static_cast<int>(std::lround(c.frame_duration_s * 1000)),
                    static_cast<unsigned long long>(c.seed), c.checked,
                    c.skipped, c.max_relative_error,
                    c.worst_group.empty() ? "" : " in ", c.worst_group.c_str());
      out << line;
    }
    std::snprintf(line, sizeof(line), "max relative error: %.3e\n",
                  r.max_relative_error);
    out << line << "gradcheck: " << (r.passed ? "PASS" : "FAIL") << "\n";
  }
  return r.passed ? kExitOk : kExitNumerical;
}

int DoInfo(const std::string& model_path, bool json, std::ostream& out) {
  const ModelParams params =
      model_path.empty() ? ModelParams(NetConfig{}) : LoadParams(model_path);
  const NetConfig& c = params.config();
  const size_t count = ParameterCount(c);
  const size_t trainable = TrainableParameterCount(c);
  const long delta =
      static_cast<long>(count) - static_cast<long>(kReferenceParameterCount);
  const std::string head_policy =
      "mean of per-head scores over 1-" + std::to_string(kMaxHeads) +
      " binaural filter sets";
  if (json) {
    Json j;
    j["parameters"] = count;
    j["trainable_parameters"] = trainable;
    j["reference_target"] = kReferenceParameterCount;
    j["config"] = ConfigJson(c);
    Json groups = Json::object();
    for (const ParamLayout::Group& g : params.layout().groups) groups[g.name] = g.size;
    j["groups"] = std::move(groups);
    j["head_policy"] = head_policy;
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  out << "parameters: " << count << "\n"
      << "trainable parameters: " << trainable << "\n"
      << "reference target: " << kReferenceParameterCount << " ("
      << (delta >= 0 ? "+" : "") << delta << ")\n"
      << "features: " << c.feature_count
      << (c.feature_count == 4 ? " (envelope, ild, coherence, diffuseness)"
                               : " (envelope, ild, coherence)")
      << "\n"
      << "bands: " << c.band_count << "\n"
      << "frame: " << std::lround(c.frame_duration_s * 1000) << " ms\n"
      << "pre-weighting: " << (c.pre_weighting ? "on" : "off") << "\n"
      << "frequency weighting: "
      << (c.frequency_weighting == FrequencyWeighting::kSoftmax ? "softmax"
                                                                : "linear")
      << "\n"
      << "layout:";
  for (const ParamLayout::Group& g : params.layout().groups) {
    out << " " << g.name << "=" << g.size;
  }
  out << "\nhead policy: " << head_policy << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Spatial audio quality metric for ambisonic signals", "spatialq"};
  app.require_subcommand(1);

  std::string ref, deg, model, norm = "sn3d";
  HeadOptions score_heads;
  bool score_json = false;
  size_t score_threads = DefaultThreads();
  CLI::App* score = app.add_subcommand("score", "Score a degraded signal");
  score->add_option("--ref", ref, "Reference ambisonic WAV")->required();
  score->add_option("--deg", deg, "Degraded ambisonic WAV")->required();
  score->add_option("--model", model, "Model file")->required();
  score->add_option("--normalization", norm, "sn3d or n3d");
  score->add_option("--threads", score_threads);
  score->add_flag("--json", score_json);
  AddHeadOptions(score, score_heads);

  TrainArgs targs;
  CLI::App* train = app.add_subcommand("train", "Train a model");
  train->add_option("--manifest", targs.manifest)->required();
  train->add_option("--out", targs.out, "Output model file")->required();
  train->add_option("--seed", targs.seed);
  train->add_flag("--no-diffuseness", targs.no_diffuseness);
  train->add_flag("--no-preweight", targs.no_preweight);
  train->add_option("--frame-ms", targs.frame_ms)
      ->check(CLI::IsMember({40, 400}));
  train->add_option("--max-epochs", targs.max_epochs);
  train->add_option("--patience", targs.patience);
  train->add_option("--report", targs.report, "Write the training report here");
  train->add_option("--normalization", targs.norm, "sn3d or n3d");
  train->add_option("--threads", targs.threads);
  train->add_flag("--json", targs.json);
  AddHeadOptions(train, targs.heads);

  EvalArgs eargs;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a model on a manifest");
  eval->add_option("--manifest", eargs.manifest)->required();
  eval->add_option("--model", eargs.model)->required();
  eval->add_option("--subset", eargs.subsets, "NAME=EXPR, repeatable");
  eval->add_option("--split", eargs.split, "all, train, val or test");
  eval->add_flag("--include-hidden-ref", eargs.include_hidden_ref);
  eval->add_option("--rmse-star", eargs.rmse_star, "normalized or literal");
  eval->add_option("--predictions", eargs.predictions, "Write per-row CSV");
  eval->add_option("--normalization", eargs.norm, "sn3d or n3d");
  eval->add_option("--threads", eargs.threads);
  eval->add_flag("--json", eargs.json);
  AddHeadOptions(eval, eargs.heads);

  SynthArgs sargs;
  CLI::App* synth = app.add_subcommand("synth", "Generate the synthetic corpus");
  synth->add_option("--out", sargs.out)->required();
  synth->add_option("--seed", sargs.seed);
  synth->add_option("--order", sargs.order)->check(CLI::Range(1, 7));
  synth->add_option("--variants", sargs.variants)->check(CLI::Range(1, 100));
  synth->add_option("--duration", sargs.duration_s)->check(CLI::Range(0.1, 60.0));
  synth->add_option("--val-contents", sargs.val_contents);
  synth->add_option("--test-contents", sargs.test_contents);
  synth->add_option("--threads", sargs.threads);

  uint64_t gc_seed = 0;
  size_t gc_seeds = 5;
  bool gc_json = false;
  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Check gradients");
  gradcheck->add_option("--seed", gc_seed);
  gradcheck->add_option("--seeds", gc_seeds)->check(CLI::Range(1, 100));
  gradcheck->add_flag("--json", gc_json);

  std::string info_model;
  bool info_json = false;
  CLI::App* info = app.add_subcommand("info", "Describe a model");
  info->add_option("--model", info_model, "Model file (default config if absent)");
  info->add_flag("--json", info_json);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*score) {
      return DoScore(ref, deg, model, score_heads, norm, score_threads,
                     score_json, out, err);
    }
    if (*train) return DoTrain(targs, out, err);
    if (*eval) return DoEval(eargs, out, err);
    if (*synth) return DoSynth(sargs, out);
    if (*gradcheck) return DoGradcheck(gc_seed, gc_seeds, gc_json, out);
    if (*info) return DoInfo(info_model, info_json, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace spatialq
