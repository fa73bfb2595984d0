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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "json.hpp"
#include "spatialq/errors.h"
#include "test_util.h"

namespace spatialq {
namespace {

using testing::RandomField;
using testing::TempDir;

// Difference tensors whose magnitude tracks the label.
std::vector<TrainingExample> SyntheticSet(size_t n, size_t heads, uint64_t seed,
                                          const std::string& prefix) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TrainingExample> out;
  for (size_t i = 0; i < n; ++i) {
    const double severity = u(rng);
    TrainingExample ex;
    ex.id = prefix + std::to_string(i);
    ex.condition = "c" + std::to_string(i % 3);
    ex.mos = 100.0 * (1.0 - 0.8 * severity);
    ex.ci95 = 5.0;
    for (size_t h = 0; h < heads; ++h) {
      DifferenceTensor d{Tensor3(4, 32, 4)};
      for (double& v : d.values.flat()) v = severity * (0.5 + u(rng));
      ex.per_head.push_back(std::move(d));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

TrainingExample HiddenRef(const std::string& id) {
  TrainingExample ex;
  ex.id = id;
  ex.condition = "reference";
  ex.mos = 100.0;
  ex.hidden_ref = true;
  ex.per_head.push_back({Tensor3(4, 32, 4)});
  return ex;
}

void WriteText(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

TEST(TrainerTest, ManifestRoundTrip) {
  TempDir dir("manifest");
  std::filesystem::create_directories(dir / "a");
  std::vector<RatedPair> pairs = {
      {"x1", dir / "a/r.wav", dir / "a/d.wav", "lp", 61.25, 4.5, false, Split::kVal},
      {"x2", dir / "a/r.wav", dir / "a/r.wav", "reference", 100, 0, true, Split::kTest}};
  WriteManifest(dir / "m.csv", pairs);
  std::ifstream in(dir / "m.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, kManifestHeader);
  EXPECT_EQ(first, "x1,a/r.wav,a/d.wav,lp,61.2500,4.5000,0,val");
  const auto back = LoadManifest(dir / "m.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].deg_path, dir / "a/d.wav");
  EXPECT_EQ(back[1].split, Split::kTest);
  EXPECT_TRUE(back[1].hidden_ref);
  EXPECT_DOUBLE_EQ(back[0].mos, 61.25);
  EXPECT_EQ(FilterSplit(back, Split::kVal).size(), 1u);
  EXPECT_EQ(FilterSplit(back, Split::kTrain).size(), 0u);
}

TEST(TrainerTest, ManifestErrorsNameTheRow) {
  TempDir dir("manifest");
  const std::string h = std::string(kManifestHeader) + "\n";
  auto expect_error = [&](const std::string& body, const std::string& fragment) {
    WriteText(dir / "m.csv", h + body);
    try {
      LoadManifest(dir / "m.csv");
      ADD_FAILURE() << "no error for " << body;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_error("a,r.wav,d.wav,c,50,1,0,train\nb,r.wav,d.wav,c,150,1,0,train\n",
               "mos out of range at row 2");
  expect_error("a,r.wav,d.wav,c,50,1,0,holdout\n", "bad split");
  expect_error("a,r.wav,d.wav,c,50,1,0\n", "expected 8 columns");
  expect_error("a,r.wav,d.wav,c,50,-1,0,train\n", "negative ci95 at row 1");
  expect_error("a,r.wav,d.wav,c,fifty,1,0,train\n", "row 1");
  WriteText(dir / "m.csv", "id,ref,deg\n");
  EXPECT_THROW(LoadManifest(dir / "m.csv"), DataError);
  EXPECT_THROW(LoadManifest(dir / "absent.csv"), DataError);
}

TEST(TrainerTest, AdamMatchesHandComputation) {
  ModelParams p(NetConfig{});
  ParamGrads g(NetConfig{});
  TrainHyper hyper;
  AdamState state;
  const double g1 = 0.5, g2 = -2.0;
  g.values()[0] = g1;
  AdamStep(p, g, state, hyper);
  // First step moves by lr * g / (|g| + eps).
  EXPECT_NEAR(p.values()[0], -0.003 * g1 / (std::abs(g1) + 1e-8), 1e-15);
  EXPECT_EQ(p.values()[1], 0.0);
  g.values()[0] = g2;
  AdamStep(p, g, state, hyper);
  const double m = 0.9 * 0.1 * g1 + 0.1 * g2;
  const double v = 0.999 * 0.001 * g1 * g1 + 0.001 * g2 * g2;
  const double step2 = 0.003 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  EXPECT_NEAR(p.values()[0], -0.003 * g1 / (std::abs(g1) + 1e-8) - step2, 1e-15);
  EXPECT_EQ(state.step, 2u);
  g.values()[5] = std::nan("");
  EXPECT_THROW(AdamStep(p, g, state, hyper), NumericalError);
}

TEST(TrainerTest, HyperValidation) {
  TrainHyper h;
  EXPECT_NO_THROW(h.Validate());
  h.batch_size = 0;
  EXPECT_THROW(h.Validate(), DataError);
  h = TrainHyper{};
  h.learning_rate = -1;
  EXPECT_THROW(h.Validate(), DataError);
  h = TrainHyper{};
  h.beta2 = 1.0;
  EXPECT_THROW(h.Validate(), DataError);
}

TEST(TrainerTest, EarlyStoppingIsStrict) {
  EarlyStopping s(2);
  EXPECT_TRUE(s.Update(1, 0.5));
  EXPECT_FALSE(s.Update(2, 0.5));
  EXPECT_FALSE(s.ShouldStop());
  EXPECT_FALSE(s.Update(3, std::nan("")));
  EXPECT_TRUE(s.ShouldStop());
  EXPECT_EQ(s.best_epoch(), 1u);
  EXPECT_TRUE(s.Update(4, 0.6));
  EXPECT_FALSE(s.ShouldStop());
  EXPECT_DOUBLE_EQ(s.best_value(), 0.6);
  EarlyStopping nan_only(1);
  EXPECT_FALSE(nan_only.Update(1, std::nan("")));
  EXPECT_EQ(nan_only.best_epoch(), 0u);
}

TEST(TrainerTest, LearnsSyntheticMapping) {
  const auto train = SyntheticSet(80, 2, 1, "t");
  const auto val = SyntheticSet(20, 2, 2, "v");
  TrainHyper hyper;
  hyper.max_epochs = 60;
  hyper.batch_size = 16;
  hyper.seed = 4;
  const TrainResult r = TrainOnExamples(train, val, NetConfig{}, hyper);
  ASSERT_FALSE(r.report.epochs.empty());
  EXPECT_GT(r.report.best_val_pearson, 0.9);
  EXPECT_LT(r.report.epochs.back().train_loss, r.report.epochs.front().train_loss);
  EXPECT_EQ(r.report.total_steps, r.report.epochs.size() * 5);
  // The returned parameters are the best checkpoint.
  std::vector<double> pred, mos;
  for (const auto& ex : val) {
    pred.push_back(PredictExample(ex, r.params));
    mos.push_back(ex.mos);
  }
  EXPECT_NEAR(Pearson(pred, mos), r.report.best_val_pearson, 1e-12);
}

TEST(TrainerTest, BatchesCoverRatedExamplesOnce) {
  auto train = SyntheticSet(21, 1, 3, "t");
  train.push_back(HiddenRef("t_ref"));
  auto val = SyntheticSet(6, 1, 4, "v");
  val.push_back(HiddenRef("v_ref"));
  TrainHyper hyper;
  hyper.max_epochs = 3;
  hyper.batch_size = 8;
  std::vector<std::vector<std::string>> batches;
  size_t epochs_seen = 0;
  TrainHooks hooks;
  hooks.on_batch = [&](const std::vector<std::string>& ids) { batches.push_back(ids); };
  hooks.on_epoch = [&](const EpochRecord& e) { EXPECT_EQ(e.epoch, ++epochs_seen); };
  TrainOnExamples(train, val, NetConfig{}, hyper, 1, hooks);
  ASSERT_EQ(batches.size(), 9u);
  for (size_t e = 0; e < 3; ++e) {
    std::multiset<std::string> seen;
    for (size_t b = 0; b < 3; ++b) seen.insert(batches[3 * e + b].begin(), batches[3 * e + b].end());
    EXPECT_EQ(seen.size(), 21u);
    EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), 21u);
    EXPECT_EQ(seen.count("t_ref"), 0u);
    EXPECT_EQ(batches[3 * e + 2].size(), 5u);
  }
  EXPECT_NE(batches[0], batches[3]);
}

TEST(TrainerTest, ThreadCountDoesNotChangeTheModel) {
  const auto train = SyntheticSet(40, 3, 5, "t");
  const auto val = SyntheticSet(10, 3, 6, "v");
  TrainHyper hyper;
  hyper.max_epochs = 5;
  hyper.batch_size = 8;
  const TrainResult a = TrainOnExamples(train, val, NetConfig{}, hyper, 1);
  const TrainResult b = TrainOnExamples(train, val, NetConfig{}, hyper, 4);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.report.ToJson(), b.report.ToJson());
  hyper.seed = 1;
  EXPECT_NE(TrainOnExamples(train, val, NetConfig{}, hyper, 1).params, a.params);
}

TEST(TrainerTest, PatienceStopsTraining) {
  const auto train = SyntheticSet(10, 1, 7, "t");
  const auto val = SyntheticSet(5, 1, 8, "v");
  TrainHyper hyper;
  hyper.patience_epochs = 2;
  hyper.max_epochs = 500;
  const TrainResult r = TrainOnExamples(train, val, NetConfig{}, hyper);
  EXPECT_TRUE(r.report.early_stopped);
  EXPECT_EQ(r.report.epochs.size(), r.report.best_epoch + 2);
  const auto j = nlohmann::json::parse(r.report.ToJson());
  EXPECT_EQ(j["best_epoch"], r.report.best_epoch);
  EXPECT_EQ(j["epochs"].size(), r.report.epochs.size());
}

TEST(TrainerTest, RejectsDegenerateSets) {
  const auto train = SyntheticSet(5, 1, 1, "t");
  const auto one = SyntheticSet(1, 1, 2, "v");
  std::vector<TrainingExample> val = one;
  val.push_back(HiddenRef("r"));
  EXPECT_THROW(TrainOnExamples(train, val, NetConfig{}, TrainHyper{}), DataError);
  std::vector<TrainingExample> refs = {HiddenRef("a"), HiddenRef("b")};
  EXPECT_THROW(TrainOnExamples(refs, SyntheticSet(3, 1, 2, "v"), NetConfig{}, TrainHyper{}),
               DataError);
}

TEST(TrainerTest, PredictAveragesHeads) {
  const auto ex = SyntheticSet(1, 3, 9, "x")[0];
  const ModelParams p = InitParams(NetConfig{}, 2);
  double mean = 0.0;
  for (const auto& d : ex.per_head) mean += Forward(d, p) / 3.0;
  EXPECT_NEAR(PredictExample(ex, p), 100.0 * mean, 1e-12);
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto ref = RandomField(1, 9600, 1);
    WriteSoundField(dir_ / "ref.wav", ref);
    for (int i = 0; i < 4; ++i) {
      WriteSoundField(dir_ / ("deg" + std::to_string(i) + ".wav"), RandomField(1, 9600, 10 + i));
      pairs_.push_back({"p" + std::to_string(i), dir_ / "ref.wav",
                        dir_ / ("deg" + std::to_string(i) + ".wav"), "c", 20.0 + 10 * i, 3,
                        false, Split::kTrain});
    }
    pairs_.push_back({"ref", dir_ / "ref.wav", dir_ / "ref.wav", "reference", 100, 0, true,
                      Split::kTrain});
  }

  TempDir dir_{"pipeline"};
  std::vector<RatedPair> pairs_;
  std::vector<RenderFilterSet> heads_ = {BuiltinCardioidHead(1)};
};

TEST_F(PipelineTest, BuildExamplesAndEvaluateAgree) {
  const ModelParams p = InitParams(NetConfig{}, 3);
  const auto examples = BuildExamples(pairs_, heads_, AnalysisConfigFor(p.config()), {});
  ASSERT_EQ(examples.size(), 5u);
  EXPECT_TRUE(examples[4].hidden_ref);
  const auto eval = EvaluateModel(pairs_, heads_, p, {});
  EXPECT_TRUE(eval.errors.empty());
  ASSERT_EQ(eval.rows.size(), 4u);
  for (size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(eval.rows[i].id, pairs_[i].id);
    EXPECT_NEAR(eval.rows[i].predicted, PredictExample(examples[i], p), 1e-9);
    EXPECT_EQ(eval.rows[i].mos, pairs_[i].mos);
  }
  EXPECT_EQ(EvaluateModel(pairs_, heads_, p, {}, false).rows.size(), 5u);
  PipelineOptions threaded;
  threaded.threads = 3;
  const auto again = EvaluateModel(pairs_, heads_, p, threaded);
  for (size_t i = 0; i < 4; ++i) EXPECT_EQ(again.rows[i].predicted, eval.rows[i].predicted);
}

TEST_F(PipelineTest, BadRowsAreReportedNotFatal) {
  pairs_[1].deg_path = dir_ / "missing.wav";
  const auto eval = EvaluateModel(pairs_, heads_, InitParams(NetConfig{}, 1), {});
  EXPECT_EQ(eval.rows.size(), 3u);
  ASSERT_EQ(eval.errors.size(), 1u);
  EXPECT_NE(eval.errors[0].find("p1"), std::string::npos);
  try {
    BuildExamples(pairs_, heads_, AnalysisConfig{}, {});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("pair 'p1'"), std::string::npos);
  }
}

}  // namespace
}  // namespace spatialq
