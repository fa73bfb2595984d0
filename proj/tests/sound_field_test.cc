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

#include "spatialq/sound_field.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spatialq/errors.h"
#include "test_util.h"

namespace spatialq {
namespace {

using testing::RandomField;
using testing::TempDir;
using testing::WhiteNoise;

double Factorial(int n) { return n <= 1 ? 1.0 : n * Factorial(n - 1); }

// Real SN3D harmonic evaluated straight from the textbook definition.
double OracleSn3d(int l, int m, double az_deg, double el_deg) {
  const double az = az_deg * std::numbers::pi / 180.0;
  const double el = el_deg * std::numbers::pi / 180.0;
  const int am = std::abs(m);
  const double norm = std::sqrt((m == 0 ? 1.0 : 2.0) * Factorial(l - am) /
                                Factorial(l + am));
  const double p = std::assoc_legendre(l, am, std::sin(el));
  const double trig = m >= 0 ? std::cos(am * az) : std::sin(am * az);
  return norm * p * trig;
}

TEST(SoundFieldTest, FrontImpulseOrderOne) {
  const std::vector<double> impulse = {1.0};
  const SoundFieldSignal s = EncodePlaneWave(impulse, 0.0, 0.0, 1);
  ASSERT_EQ(s.num_channels(), 4);
  EXPECT_NEAR(s.channel(0)[0], 1.0, 1e-15);
  EXPECT_NEAR(s.channel(1)[0], 0.0, 1e-15);
  EXPECT_NEAR(s.channel(2)[0], 0.0, 1e-15);
  EXPECT_NEAR(s.channel(3)[0], 1.0, 1e-15);
}

TEST(SoundFieldTest, LeftImpulseOrderOne) {
  const std::vector<double> impulse = {1.0};
  const SoundFieldSignal s = EncodePlaneWave(impulse, 90.0, 0.0, 1);
  EXPECT_NEAR(s.channel(0)[0], 1.0, 1e-15);
  EXPECT_NEAR(s.channel(1)[0], 1.0, 1e-15);
  EXPECT_NEAR(s.channel(2)[0], 0.0, 1e-15);
  EXPECT_NEAR(s.channel(3)[0], 0.0, 1e-15);
}

TEST(SoundFieldTest, ZenithOnlyZonalHarmonics) {
  const std::vector<double> impulse = {1.0};
  const SoundFieldSignal s = EncodePlaneWave(impulse, 37.0, 90.0, 3);
  for (int c = 0; c < 16; ++c) {
    const bool zonal = c == 0 || c == 2 || c == 6 || c == 12;
    EXPECT_NEAR(s.channel(c)[0], zonal ? 1.0 : 0.0, 1e-12) << "acn " << c;
  }
}

TEST(SoundFieldTest, HarmonicsMatchOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = az(rng), e = el(rng);
    const int order = 1 + trial % 6;
    const std::vector<double> y = Sn3dHarmonics(order, a, e);
    ASSERT_EQ(y.size(), static_cast<size_t>(NumAmbisonicChannels(order)));
    for (int l = 0; l <= order; ++l) {
      for (int m = -l; m <= l; ++m) {
        EXPECT_NEAR(y[l * l + l + m], OracleSn3d(l, m, a, e), 1e-12)
            << "l=" << l << " m=" << m << " az=" << a << " el=" << e;
      }
    }
  }
}

TEST(SoundFieldTest, AcnLayout) {
  EXPECT_EQ(AcnDegree(0), 0);
  EXPECT_EQ(AcnDegree(3), 1);
  EXPECT_EQ(AcnDegree(4), 2);
  EXPECT_EQ(AcnDegree(15), 3);
  EXPECT_EQ(OrderFromChannelCount(16), 3);
  EXPECT_EQ(OrderFromChannelCount(15), -1);
  EXPECT_EQ(OrderFromChannelCount(0), -1);
}

TEST(SoundFieldTest, RejectsBadShapes) {
  std::vector<std::vector<double>> three(3, std::vector<double>(8, 0.0));
  EXPECT_THROW(SoundFieldSignal(three, 48000, 1), DataError);
  std::vector<std::vector<double>> nan(4, std::vector<double>(8, 0.0));
  nan[2][3] = std::nan("");
  EXPECT_THROW(SoundFieldSignal(nan, 48000, 1), DataError);
  EXPECT_THROW(EncodePlaneWave({}, 0.0, 0.0, 1), DataError);
}

TEST(SoundFieldTest, IsotropicVarianceRatio) {
  const SoundFieldSignal s = SynthIsotropicDiffuse(1.0, 1, 128, 3);
  auto var = [](std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / x.size();
  };
  for (int c = 1; c < 4; ++c) {
    EXPECT_NEAR(var(s.channel(0)) / var(s.channel(c)), 3.0, 0.3) << c;
  }
  EXPECT_NEAR(OmniLevelDb(s), kDiffuseFieldLevelDb, 1e-9);
}

TEST(SoundFieldTest, SingleWaveIsRankOne) {
  const SoundFieldSignal s = SynthIsotropicDiffuse(0.1, 1, 1, 11);
  const auto w = s.channel(0);
  double k2 = 0.0;
  for (int c = 1; c < 4; ++c) {
    const double k = s.channel(c)[10] / w[10];
    for (size_t i = 0; i < w.size(); ++i) {
      EXPECT_NEAR(s.channel(c)[i], k * w[i], 1e-12);
    }
    k2 += k * k;
  }
  EXPECT_NEAR(k2, 1.0, 1e-9);
}

TEST(SoundFieldTest, DiffuseIsSeeded) {
  const SoundFieldSignal a = SynthIsotropicDiffuse(0.2, 1, 64, 5);
  const SoundFieldSignal b = SynthIsotropicDiffuse(0.2, 1, 64, 5);
  const SoundFieldSignal c = SynthIsotropicDiffuse(0.2, 1, 64, 6);
  EXPECT_EQ(a.channels(), b.channels());
  EXPECT_NE(a.channels(), c.channels());
}

TEST(SoundFieldTest, NormalizationConversion) {
  std::vector<std::vector<double>> ones(4, std::vector<double>(3, 1.0));
  const SoundFieldSignal s(ones, 48000, 1);
  const SoundFieldSignal n3d = ConvertNormalization(s, Normalization::kN3D);
  EXPECT_EQ(n3d.normalization(), Normalization::kN3D);
  EXPECT_DOUBLE_EQ(n3d.channel(0)[0], 1.0);
  for (int c = 1; c < 4; ++c) EXPECT_DOUBLE_EQ(n3d.channel(c)[1], std::sqrt(3.0));
  const SoundFieldSignal same = ConvertNormalization(s, Normalization::kSN3D);
  EXPECT_EQ(same.channels(), s.channels());

  const SoundFieldSignal r = RandomField(3, 500, 9);
  const SoundFieldSignal back = ConvertNormalization(
      ConvertNormalization(r, Normalization::kN3D), Normalization::kSN3D);
  for (int c = 0; c < 16; ++c) {
    for (size_t i = 0; i < 500; ++i) {
      EXPECT_NEAR(back.channel(c)[i], r.channel(c)[i], 1e-12);
    }
  }
}

TEST(SoundFieldTest, FromChannelsConvertsToSn3d) {
  std::vector<std::vector<double>> ch(4, std::vector<double>(2, std::sqrt(3.0)));
  ch[0] = {1.0, 1.0};
  const SoundFieldSignal s =
      SoundFieldSignal::FromChannels(ch, 48000, Normalization::kN3D);
  EXPECT_EQ(s.normalization(), Normalization::kSN3D);
  EXPECT_EQ(s.order(), 1);
  EXPECT_NEAR(s.channel(3)[1], 1.0, 1e-15);
}

TEST(SoundFieldTest, NormalizeSine) {
  const size_t n = 48000;
  std::vector<double> sine(n);
  for (size_t i = 0; i < n; ++i) sine[i] = std::sin(2 * std::numbers::pi * 1000.0 * i / 48000.0);
  const SoundFieldSignal s = EncodePlaneWave(sine, 0, 0, 1);
  const SoundFieldSignal out = NormalizeLevel(s, -30.0);
  const double gain = out.channel(0)[12] / s.channel(0)[12];
  EXPECT_NEAR(gain, std::pow(10.0, -1.5) / std::sqrt(0.5), 1e-9);
  EXPECT_NEAR(OmniLevelDb(out), -30.0, 1e-9);
  const SoundFieldSignal again = NormalizeLevel(out, -30.0);
  EXPECT_NEAR(again.channel(0)[12] / out.channel(0)[12], 1.0, 1e-4);
}

TEST(SoundFieldTest, NormalizeNoise) {
  const SoundFieldSignal s = EncodePlaneWave(WhiteNoise(48000, 1), 10, 20, 2);
  EXPECT_NEAR(OmniLevelDb(NormalizeLevel(s, -30.0)), -30.0, 0.01);
}

TEST(SoundFieldTest, NormalizeSilentThrows) {
  std::vector<std::vector<double>> zero(4, std::vector<double>(10, 0.0));
  EXPECT_THROW(NormalizeLevel(SoundFieldSignal(zero, 48000, 1), -30.0),
               DataError);
}

TEST(SoundFieldTest, WavRoundTrip) {
  TempDir dir("sf");
  const SoundFieldSignal s = RandomField(2, 300, 4);
  WriteSoundField(dir / "a.wav", s);
  const SoundFieldSignal back = ReadSoundField(dir / "a.wav", Normalization::kSN3D);
  ASSERT_EQ(back.order(), 2);
  ASSERT_EQ(back.num_samples(), 300u);
  for (int c = 0; c < 9; ++c) {
    for (size_t i = 0; i < 300; ++i) {
      EXPECT_EQ(back.channel(c)[i], static_cast<double>(static_cast<float>(s.channel(c)[i])));
    }
  }
}

}  // namespace
}  // namespace spatialq
