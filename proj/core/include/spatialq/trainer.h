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

#ifndef SPATIALQ_TRAINER_H_
#define SPATIALQ_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spatialq/binaural.h"
#include "spatialq/features.h"
#include "spatialq/qnet.h"
#include "spatialq/sound_field.h"
#include "spatialq/stats.h"

namespace spatialq {

enum class Split { kTrain, kVal, kTest };

const char* SplitName(Split split);

// One manifest row. Paths are resolved against the manifest's directory.
struct RatedPair {
  std::string id;
  std::filesystem::path ref_path;
  std::filesystem::path deg_path;
  std::string condition;
  double mos = 0.0;   // 0-100
  double ci95 = 0.0;  // >= 0
  bool hidden_ref = false;
  Split split = Split::kTrain;
};

inline constexpr char kManifestHeader[] =
    "id,ref_path,deg_path,condition,mos,ci95,hidden_ref,split";

// Parses the CSV manifest. Errors name the 1-based data row, e.g.
// "mos out of range at row 3".
std::vector<RatedPair> LoadManifest(const std::filesystem::path& path);

// Writes `pairs` with paths made relative to the manifest's directory.
void WriteManifest(const std::filesystem::path& path,
                   std::span<const RatedPair> pairs);

std::vector<RatedPair> FilterSplit(std::span<const RatedPair> pairs,
                                   Split split);

struct TrainHyper {
  double learning_rate = 0.003;
  size_t batch_size = 32;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  size_t patience_epochs = 15;
  size_t max_epochs = 1000;
  uint64_t seed = 0;

  void Validate() const;
};

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  uint64_t step = 0;
};

// Bias-corrected Adam applied in parameter layout order. Initializes `state`
// on first use. Throws NumericalError("diverged") on a non-finite gradient.
void AdamStep(ModelParams& params, const ParamGrads& grads, AdamState& state,
              const TrainHyper& hyper);

// Tracks the best validation value; improvement means strictly greater.
class EarlyStopping {
 public:
  explicit EarlyStopping(size_t patience) : patience_(patience) {}

  // Records `value` for `epoch` (1-based); returns true on improvement.
  // NaN never improves.
  bool Update(size_t epoch, double value);
  bool ShouldStop() const { return epochs_since_best_ >= patience_; }
  size_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_value_; }

 private:
  size_t patience_;
  size_t best_epoch_ = 0;
  double best_value_ = -std::numeric_limits<double>::infinity();
  size_t epochs_since_best_ = 0;
};

// A pair's difference tensors for every head, plus its label.
struct TrainingExample {
  std::string id;
  std::string condition;
  std::vector<DifferenceTensor> per_head;
  double mos = 0.0;
  double ci95 = 0.0;
  bool hidden_ref = false;
};

struct PipelineOptions {
  Normalization normalization = Normalization::kSN3D;
  size_t threads = 1;
};

// Loads every pair and computes its feature difference once per head. The
// returned tensors are the cache used by training and evaluation.
std::vector<TrainingExample> BuildExamples(std::span<const RatedPair> pairs,
                                           std::span<const RenderFilterSet> heads,
                                           const AnalysisConfig& config,
                                           const PipelineOptions& options);

struct EpochRecord {
  size_t epoch = 0;
  double train_loss = 0.0;
  double val_pearson = 0.0;  // NaN when undefined
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  size_t best_epoch = 0;
  double best_val_pearson = 0.0;
  size_t total_steps = 0;
  bool early_stopped = false;

  std::string ToJson() const;
};

struct TrainHooks {
  // Called with the example ids of every minibatch, in batch order.
  std::function<void(const std::vector<std::string>&)> on_batch;
  // Called after each epoch.
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  ModelParams params;  // best-validation checkpoint
  TrainReport report;
};

// Minibatch Adam on MSE between score01 and mos / 100. Each epoch shuffles
// the training examples, samples one head per example, and computes the
// validation Pearson (scores x 100 vs mos) with all heads averaged. Stops
// after `patience_epochs` epochs without improvement and returns the best
// checkpoint. Hidden-reference examples are dropped from both sets.
TrainResult TrainOnExamples(std::span<const TrainingExample> train,
                            std::span<const TrainingExample> val,
                            const NetConfig& net, const TrainHyper& hyper,
                            size_t threads = 1, const TrainHooks& hooks = {});

// Loads audio, builds the feature cache and calls TrainOnExamples.
TrainResult Train(std::span<const RatedPair> train_pairs,
                  std::span<const RatedPair> val_pairs,
                  std::span<const RenderFilterSet> heads, const NetConfig& net,
                  const TrainHyper& hyper, const PipelineOptions& options,
                  const TrainHooks& hooks = {});

// 100 * mean over heads of Forward(per_head[h]).
double PredictExample(const TrainingExample& example, const ModelParams& params);

struct EvaluationResult {
  std::vector<ScoredRow> rows;       // manifest order
  std::vector<std::string> errors;   // one per failed row
};

// Scores every pair (optionally skipping hidden references). Rows whose
// audio cannot be processed are reported in `errors` and skipped.
EvaluationResult EvaluateModel(std::span<const RatedPair> pairs,
                               std::span<const RenderFilterSet> heads,
                               const ModelParams& params,
                               const PipelineOptions& options,
                               bool exclude_hidden_ref = true);

}  // namespace spatialq

#endif  // SPATIALQ_TRAINER_H_
