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

#include "spatialq/trainer.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "spatialq/errors.h"
#include "spatialq/parallel.h"

namespace spatialq {

namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string Trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double ParseNumber(const std::string& text, const std::string& what,
                   size_t row) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw DataError("bad " + what + " '" + text + "' at row " +
                    std::to_string(row));
  }
  return v;
}

bool ParseBool(const std::string& text, size_t row) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false" || text.empty()) return false;
  throw DataError("bad hidden_ref '" + text + "' at row " + std::to_string(row));
}

Split ParseSplit(const std::string& text, size_t row) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw DataError("bad split '" + text + "' at row " + std::to_string(row));
}

std::vector<const TrainingExample*> Rated(
    std::span<const TrainingExample> examples) {
  std::vector<const TrainingExample*> kept;
  for (const TrainingExample& e : examples) {
    if (!e.hidden_ref) kept.push_back(&e);
  }
  return kept;
}

double ValidationPearson(const std::vector<const TrainingExample*>& val,
                         const ModelParams& params, size_t threads) {
  std::vector<double> predicted(val.size()), mos(val.size());
  ParallelFor(val.size(), threads, [&](size_t i) {
    predicted[i] = PredictExample(*val[i], params);
    mos[i] = val[i]->mos;
  });
  try {
    return Pearson(mos, predicted);
  } catch (const DataError&) {
    return std::nan("");
  }
}

}  // namespace

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

std::vector<RatedPair> LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  const std::filesystem::path base = path.parent_path();
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty manifest " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (Trim(line) != kManifestHeader) {
    throw DataError("manifest header must be '" + std::string(kManifestHeader) +
                    "'");
  }
  std::vector<RatedPair> pairs;
  size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    ++row;
    std::vector<std::string> c = SplitCsvLine(line);
    if (c.size() != 8) {
      throw DataError("expected 8 columns, got " + std::to_string(c.size()) +
                      " at row " + std::to_string(row));
    }
    for (std::string& s : c) s = Trim(std::move(s));
    RatedPair p;
    p.id = c[0];
    if (p.id.empty()) throw DataError("empty id at row " + std::to_string(row));
    if (c[1].empty() || c[2].empty()) {
      throw DataError("empty path at row " + std::to_string(row));
    }
    p.ref_path = base / c[1];
    p.deg_path = base / c[2];
    p.condition = c[3];
    p.mos = ParseNumber(c[4], "mos", row);
    if (p.mos < 0.0 || p.mos > 100.0) {
      throw DataError("mos out of range at row " + std::to_string(row));
    }
    p.ci95 = ParseNumber(c[5], "ci95", row);
    if (p.ci95 < 0.0) {
      throw DataError("negative ci95 at row " + std::to_string(row));
    }
    p.hidden_ref = ParseBool(c[6], row);
    p.split = ParseSplit(c[7], row);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void WriteManifest(const std::filesystem::path& path,
                   std::span<const RatedPair> pairs) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  const std::filesystem::path base = path.parent_path().empty()
                                         ? std::filesystem::path(".")
                                         : path.parent_path();
  auto rel = [&base](const std::filesystem::path& p) {
    return std::filesystem::relative(p, base).generic_string();
  };
  out << kManifestHeader << "\n";
  char number[64];
  for (const RatedPair& p : pairs) {
    out << p.id << "," << rel(p.ref_path) << "," << rel(p.deg_path) << ","
        << p.condition << ",";
    std::snprintf(number, sizeof(number), "%.4f,%.4f", p.mos, p.ci95);
    out << number << "," << (p.hidden_ref ? 1 : 0) << "," << SplitName(p.split)
        << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<RatedPair> FilterSplit(std::span<const RatedPair> pairs,
                                   Split split) {
  std::vector<RatedPair> kept;
  for (const RatedPair& p : pairs) {
    if (p.split == split) kept.push_back(p);
  }
  return kept;
}

void TrainHyper::Validate() const {
  if (!(learning_rate > 0.0) || batch_size == 0 || !(beta1 >= 0.0 && beta1 < 1.0) ||
      !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_epsilon > 0.0) ||
      max_epochs == 0) {
    throw DataError("invalid training hyperparameters");
  }
}

void AdamStep(ModelParams& params, const ParamGrads& grads, AdamState& state,
              const TrainHyper& hyper) {
  const size_t n = params.size();
  if (grads.size() != n) throw DataError("gradient size mismatch");
  if (state.first_moment.size() != n) {
    state.first_moment.assign(n, 0.0);
    state.second_moment.assign(n, 0.0);
    state.step = 0;
  }
  std::span<const double> g = grads.values();
  for (double v : g) {
    if (!std::isfinite(v)) throw NumericalError("diverged: non-finite gradient");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  std::span<double> p = params.values();
  for (size_t i = 0; i < n; ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = hyper.beta1 * m + (1.0 - hyper.beta1) * g[i];
    v = hyper.beta2 * v + (1.0 - hyper.beta2) * g[i] * g[i];
    p[i] -= hyper.learning_rate * (m / c1) /
            (std::sqrt(v / c2) + hyper.adam_epsilon);
  }
}

bool EarlyStopping::Update(size_t epoch, double value) {
  if (value > best_value_) {
    best_value_ = value;
    best_epoch_ = epoch;
    epochs_since_best_ = 0;
    return true;
  }
  ++epochs_since_best_;
  return false;
}

std::vector<TrainingExample> BuildExamples(std::span<const RatedPair> pairs,
                                           std::span<const RenderFilterSet> heads,
                                           const AnalysisConfig& config,
                                           const PipelineOptions& options) {
  if (heads.empty() || heads.size() > kMaxHeads) {
    throw DataError("need between 1 and " + std::to_string(kMaxHeads) +
                    " heads, got " + std::to_string(heads.size()));
  }
  std::vector<TrainingExample> examples(pairs.size());
  std::vector<SoundFieldSignal> refs(pairs.size()), degs(pairs.size());
  ParallelFor(pairs.size(), options.threads, [&](size_t i) {
    const RatedPair& p = pairs[i];
    try {
      refs[i] = ReadSoundField(p.ref_path, options.normalization);
      degs[i] = ReadSoundField(p.deg_path, options.normalization);
    } catch (const DataError& e) {
      throw DataError("pair '" + p.id + "': " + e.what());
    }
    TrainingExample& ex = examples[i];
    ex.id = p.id;
    ex.condition = p.condition;
    ex.mos = p.mos;
    ex.ci95 = p.ci95;
    ex.hidden_ref = p.hidden_ref;
    ex.per_head.resize(heads.size());
  });
  // One task per (pair, head).
  const size_t tasks = pairs.size() * heads.size();
  ParallelFor(tasks, options.threads, [&](size_t k) {
    const size_t i = k / heads.size(), h = k % heads.size();
    try {
      examples[i].per_head[h] = PairDifference(refs[i], degs[i], heads[h], config);
    } catch (const DataError& e) {
      throw DataError("pair '" + pairs[i].id + "', head '" + heads[h].name +
                      "': " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("pair '" + pairs[i].id + "', head '" +
                           heads[h].name + "': " + e.what());
    }
  });
  return examples;
}

double PredictExample(const TrainingExample& example, const ModelParams& params) {
  if (example.per_head.empty()) throw DataError("example has no heads");
  double sum = 0.0;
  for (const DifferenceTensor& d : example.per_head) sum += Forward(d, params);
  return 100.0 * sum / static_cast<double>(example.per_head.size());
}

TrainResult TrainOnExamples(std::span<const TrainingExample> train,
                            std::span<const TrainingExample> val,
                            const NetConfig& net, const TrainHyper& hyper,
                            size_t threads, const TrainHooks& hooks) {
  net.Validate();
  hyper.Validate();
  const std::vector<const TrainingExample*> train_set = Rated(train);
  const std::vector<const TrainingExample*> val_set = Rated(val);
  if (train_set.empty()) throw DataError("no rated training pairs");
  if (val_set.size() < 2) throw DataError("need at least two validation pairs");

  ModelParams params = InitParams(net, hyper.seed);
  TrainResult result{params, {}};
  AdamState adam;
  EarlyStopping stopper(hyper.patience_epochs);
  std::mt19937_64 rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<size_t> order(train_set.size());
  std::vector<size_t> head_choice(train_set.size());

  for (size_t epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    for (size_t i = 0; i < order.size(); ++i) {
      head_choice[i] = rng() % train_set[order[i]]->per_head.size();
    }

    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const size_t stop = std::min(order.size(), start + hyper.batch_size);
      const size_t count = stop - start;
      std::vector<ParamGrads> item_grads(count);
      std::vector<double> item_loss(count);
      ParallelFor(count, threads, [&](size_t j) {
        const TrainingExample& ex = *train_set[order[start + j]];
        ForwardCache cache;
        const double s = Forward(ex.per_head[head_choice[start + j]], params,
                                 &cache);
        const double err = s - ex.mos / 100.0;
        item_loss[j] = err * err;
        item_grads[j] = Backward(cache, params, 2.0 * err / count);
      });
      ParamGrads total = std::move(item_grads[0]);
      for (size_t j = 1; j < count; ++j) {
        std::span<double> t = total.values();
        std::span<const double> g = item_grads[j].values();
        for (size_t k = 0; k < t.size(); ++k) t[k] += g[k];
      }
      for (size_t j = 0; j < count; ++j) loss_sum += item_loss[j];
      if (hooks.on_batch) {
        std::vector<std::string> ids;
        for (size_t j = start; j < stop; ++j) ids.push_back(train_set[order[j]]->id);
        hooks.on_batch(ids);
      }
      AdamStep(params, total, adam, hyper);
      ++result.report.total_steps;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(record.train_loss)) {
      throw NumericalError("diverged at epoch " + std::to_string(epoch));
    }
    record.val_pearson = ValidationPearson(val_set, params, threads);
    result.report.epochs.push_back(record);
    if (hooks.on_epoch) hooks.on_epoch(record);
    if (stopper.Update(epoch, record.val_pearson)) result.params = params;
    if (stopper.ShouldStop()) {
      result.report.early_stopped = true;
      break;
    }
  }
  result.report.best_epoch = stopper.best_epoch();
  result.report.best_val_pearson = stopper.best_value();
  return result;
}

TrainResult Train(std::span<const RatedPair> train_pairs,
                  std::span<const RatedPair> val_pairs,
                  std::span<const RenderFilterSet> heads, const NetConfig& net,
                  const TrainHyper& hyper, const PipelineOptions& options,
                  const TrainHooks& hooks) {
  net.Validate();
  const AnalysisConfig config = AnalysisConfigFor(net);
  const std::vector<TrainingExample> train =
      BuildExamples(train_pairs, heads, config, options);
  const std::vector<TrainingExample> val =
      BuildExamples(val_pairs, heads, config, options);
  return TrainOnExamples(train, val, net, hyper, options.threads, hooks);
}

std::string TrainReport::ToJson() const {
  nlohmann::ordered_json j;
  auto number = [](double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v)
                            : nlohmann::ordered_json(nullptr);
  };
  j["best_epoch"] = best_epoch;
  j["best_val_pearson"] = number(best_val_pearson);
  j["total_steps"] = total_steps;
  j["early_stopped"] = early_stopped;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const EpochRecord& e : epochs) {
    list.push_back({{"epoch", e.epoch},
                    {"train_loss", number(e.train_loss)},
                    {"val_pearson", number(e.val_pearson)}});
  }
  j["epochs"] = std::move(list);
  return j.dump(2);
}

EvaluationResult EvaluateModel(std::span<const RatedPair> pairs,
                               std::span<const RenderFilterSet> heads,
                               const ModelParams& params,
                               const PipelineOptions& options,
                               bool exclude_hidden_ref) {
  if (heads.empty() || heads.size() > kMaxHeads) {
    throw DataError("need between 1 and " + std::to_string(kMaxHeads) +
                    " heads, got " + std::to_string(heads.size()));
  }
  const AnalysisConfig config = AnalysisConfigFor(params.config());
  std::vector<const RatedPair*> todo;
  for (const RatedPair& p : pairs) {
    if (!(exclude_hidden_ref && p.hidden_ref)) todo.push_back(&p);
  }
  std::vector<std::optional<ScoredRow>> rows(todo.size());
  std::vector<std::string> errors(todo.size());
  ParallelFor(todo.size(), options.threads, [&](size_t i) {
    const RatedPair& p = *todo[i];
    try {
      const std::vector<TrainingExample> ex = BuildExamples(
          std::span<const RatedPair>(&p, 1), heads, config, {options.normalization, 1});
      rows[i] = ScoredRow{p.id, p.condition, PredictExample(ex[0], params), p.mos,
                          p.ci95};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  EvaluationResult result;
  for (size_t i = 0; i < todo.size(); ++i) {
    if (rows[i]) {
      result.rows.push_back(*rows[i]);
    } else {
      result.errors.push_back(errors[i]);
    }
  }
  return result;
}

}  // namespace spatialq
