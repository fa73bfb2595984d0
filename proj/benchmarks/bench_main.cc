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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "spatialq/binaural.h"
#include "spatialq/features.h"
#include "spatialq/qnet.h"
#include "spatialq/sound_field.h"

namespace spatialq {
namespace {

SoundFieldSignal Field(int order, size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<std::vector<double>> ch(NumAmbisonicChannels(order), std::vector<double>(n));
  for (auto& c : ch) {
    for (double& v : c) v = g(rng);
  }
  return SoundFieldSignal(std::move(ch), kCanonicalSampleRate, order);
}

RenderFilterSet Head(int order, size_t taps) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.1);
  RenderFilterSet h;
  h.name = "bench";
  h.order = order;
  h.taps.assign(2, std::vector<std::vector<double>>(NumAmbisonicChannels(order),
                                                    std::vector<double>(taps)));
  for (auto& ear : h.taps) {
    for (auto& c : ear) {
      for (double& v : c) v = g(rng);
    }
  }
  return h;
}

DifferenceTensor Diff(size_t frames) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  DifferenceTensor d{Tensor3(4, 32, frames)};
  for (double& v : d.values.flat()) v = u(rng);
  return d;
}

void BM_Forward(benchmark::State& state) {
  const ModelParams p = InitParams(NetConfig{}, 1);
  const DifferenceTensor d = Diff(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Forward(d, p));
}
BENCHMARK(BM_Forward)->Arg(50)->Arg(250);

void BM_ForwardBackward(benchmark::State& state) {
  const ModelParams p = InitParams(NetConfig{}, 1);
  const DifferenceTensor d = Diff(state.range(0));
  for (auto _ : state) {
    ForwardCache cache;
    Forward(d, p, &cache);
    benchmark::DoNotOptimize(Backward(cache, p, 1.0));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(50)->Arg(250);

// One second of audio through a filter set.
void BM_Render(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const SoundFieldSignal s = Field(order, 48000);
  const RenderFilterSet h = Head(order, state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(RenderBinaural(s, h));
  state.SetItemsProcessed(state.iterations() * 48000);
}
BENCHMARK(BM_Render)->Args({1, 64})->Args({1, 512})->Args({3, 512});

void BM_FeatureGrid(benchmark::State& state) {
  const SoundFieldSignal s = Field(1, 48000);
  const BinauralSignal b = RenderBinaural(s, BuiltinCardioidHead(1));
  AnalysisConfig c;
  c.include_diffuseness = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(ComputeFeatureGrid(b, s, c));
}
BENCHMARK(BM_FeatureGrid)->Arg(0)->Arg(1);

void BM_PairDifference(benchmark::State& state) {
  const SoundFieldSignal ref = Field(1, 96000);
  const SoundFieldSignal deg = Field(1, 96000);
  const RenderFilterSet h = Head(1, 256);
  for (auto _ : state) benchmark::DoNotOptimize(PairDifference(ref, deg, h, AnalysisConfig{}));
}
BENCHMARK(BM_PairDifference);

}  // namespace
}  // namespace spatialq

BENCHMARK_MAIN();
