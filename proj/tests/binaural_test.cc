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

#include "spatialq/binaural.h"

#include <gtest/gtest.h>

#include <cmath>

#include "spatialq/errors.h"
#include "spatialq/features.h"
#include "spatialq/wav_io.h"
#include "test_util.h"

namespace spatialq {
namespace {

using testing::RandomField;
using testing::TempDir;
using testing::WhiteNoise;

RenderFilterSet RandomFilters(int order, size_t taps, uint64_t seed) {
  RenderFilterSet f;
  f.name = "random";
  f.order = order;
  const int channels = NumAmbisonicChannels(order);
  f.taps.assign(2, std::vector<std::vector<double>>(channels));
  for (int ear = 0; ear < 2; ++ear) {
    for (int c = 0; c < channels; ++c) {
      f.taps[ear][c] = WhiteNoise(taps, seed * 1000 + ear * 100 + c, 0.2);
    }
  }
  return f;
}

std::vector<double> NaiveEar(const SoundFieldSignal& s, const RenderFilterSet& f,
                             int ear) {
  std::vector<double> out(s.num_samples(), 0.0);
  for (int c = 0; c < s.num_channels(); ++c) {
    const auto& h = f.taps[ear][c];
    const auto x = s.channel(c);
    for (size_t n = 0; n < out.size(); ++n) {
      for (size_t k = 0; k < h.size() && k <= n; ++k) out[n] += h[k] * x[n - k];
    }
  }
  return out;
}

TEST(BinauralTest, FastMatchesNaive) {
  for (size_t taps : {1, 16, 64, 300}) {
    const SoundFieldSignal s = RandomField(1, 6000, taps);
    const RenderFilterSet f = RandomFilters(1, taps, taps + 3);
    const BinauralSignal b = RenderBinaural(s, f);
    ASSERT_EQ(b.num_samples(), s.num_samples());
    const std::vector<double> left = NaiveEar(s, f, 0), right = NaiveEar(s, f, 1);
    for (size_t n = 0; n < left.size(); ++n) {
      ASSERT_NEAR(b.left[n], left[n], 1e-9) << taps;
      ASSERT_NEAR(b.right[n], right[n], 1e-9) << taps;
    }
  }
}

TEST(BinauralTest, OmniIdentity) {
  RenderFilterSet f = RandomFilters(1, 4, 1);
  for (auto& ear : f.taps) {
    for (auto& ch : ear) std::fill(ch.begin(), ch.end(), 0.0);
    ear[0][0] = 1.0;
  }
  const SoundFieldSignal s = RandomField(1, 1000, 2);
  const BinauralSignal b = RenderBinaural(s, f);
  for (size_t n = 0; n < 1000; ++n) {
    EXPECT_EQ(b.left[n], s.channel(0)[n]);
    EXPECT_EQ(b.right[n], s.channel(0)[n]);
  }
}

TEST(BinauralTest, MirrorFiltersGiveZeroIldForFrontalSource) {
  RenderFilterSet f = RandomFilters(1, 64, 9);
  // Right ear = left ear reflected in the median plane: Y flips sign.
  for (int c = 0; c < 4; ++c) {
    for (size_t k = 0; k < 64; ++k) {
      f.taps[1][c][k] = (c == 1 ? -1.0 : 1.0) * f.taps[0][c][k];
    }
  }
  for (double el : {0.0, 25.0}) {
    const SoundFieldSignal s = EncodePlaneWave(WhiteNoise(48000, 4, 0.1), 0.0, el, 1);
    const FeatureGrid g = ComputeFeatureGrid(RenderBinaural(s, f), s, AnalysisConfig{});
    for (size_t b = 0; b < g.num_bands(); ++b) {
      for (size_t t = 0; t < g.num_frames(); ++t) {
        EXPECT_LT(std::abs(g.values(kIld, b, t) * 20.0), 0.5);
      }
    }
  }
}

TEST(BinauralTest, CardioidHead) {
  const RenderFilterSet f = BuiltinCardioidHead(1);
  const SoundFieldSignal left_src = EncodePlaneWave(std::vector<double>{1.0}, 90, 0, 1);
  const BinauralSignal b = RenderBinaural(left_src, f);
  EXPECT_NEAR(b.left[0], 1.0, 1e-12);
  EXPECT_NEAR(b.right[0], 0.0, 1e-12);
  // Accepts lower-order input.
  std::vector<std::vector<double>> w(1, {0.5});
  EXPECT_NEAR(RenderBinaural(SoundFieldSignal(w, 48000, 0), f).right[0], 0.25, 1e-15);
}

TEST(BinauralTest, RejectsIncompatibleSignals) {
  const RenderFilterSet f = BuiltinCardioidHead(1);
  EXPECT_THROW(RenderBinaural(RandomField(2, 100, 1), f), DataError);
  std::vector<std::vector<double>> ch(4, std::vector<double>(100, 0.0));
  EXPECT_THROW(RenderBinaural(SoundFieldSignal(ch, 44100, 1), f), DataError);
}

TEST(BinauralTest, FilterFileLayout) {
  TempDir dir("filters");
  WavAudio wav{48000, {}};
  for (int c = 0; c < 32; ++c) wav.channels.push_back(WhiteNoise(512, c, 0.1));
  WriteWav(dir / "kemar.wav", wav);
  const RenderFilterSet f = LoadFilterSet(dir / "kemar.wav");
  EXPECT_EQ(f.name, "kemar");
  EXPECT_EQ(f.order, 3);
  EXPECT_EQ(f.num_taps(), 512u);
  for (size_t k = 0; k < 512; ++k) {
    EXPECT_EQ(f.taps[0][5][k], static_cast<double>(static_cast<float>(wav.channels[5][k])));
    EXPECT_EQ(f.taps[1][0][k], static_cast<double>(static_cast<float>(wav.channels[16][k])));
  }
  wav.channels.resize(8);
  WriteWav(dir / "foa.wav", wav);
  EXPECT_EQ(LoadFilterSet(dir / "foa.wav").order, 1);
  wav.channels.resize(30, std::vector<double>(512, 0.0));
  WriteWav(dir / "bad.wav", wav);
  EXPECT_THROW(LoadFilterSet(dir / "bad.wav"), DataError);
}

TEST(BinauralTest, SaveLoadRoundTrip) {
  TempDir dir("filters");
  const RenderFilterSet f = RandomFilters(2, 40, 3);
  SaveFilterSet(dir / "h.wav", f);
  const RenderFilterSet g = LoadFilterSet(dir / "h.wav");
  ASSERT_EQ(g.order, 2);
  EXPECT_EQ(g.taps[1][8][39], static_cast<double>(static_cast<float>(f.taps[1][8][39])));
}

TEST(BinauralTest, LoadHeadsSortedAndCapped) {
  TempDir dir("heads");
  EXPECT_THROW(LoadHeads(dir.path()), DataError);
  for (int i = 24; i >= 0; --i) {
    char name[32];
    std::snprintf(name, sizeof(name), "h%02d.wav", i);
    SaveFilterSet(dir / name, RandomFilters(1, 8, i));
  }
  const std::vector<RenderFilterSet> heads = LoadHeads(dir.path());
  ASSERT_EQ(heads.size(), kMaxHeads);
  EXPECT_EQ(heads.front().name, "h00");
  EXPECT_EQ(heads.back().name, "h19");
}

TEST(BinauralTest, MalformedSetRejected) {
  RenderFilterSet f = RandomFilters(1, 8, 1);
  f.taps[1][2].resize(7);
  EXPECT_THROW(f.Validate(), DataError);
}

}  // namespace
}  // namespace spatialq
