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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "spatialq/errors.h"
#include "spatialq/wav_io.h"

namespace spatialq {

namespace {

double Factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Associated Legendre P_l^m(x), m >= 0, without the Condon-Shortley phase.
double AssocLegendre(int l, int m, double x) {
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = 1.0;
  for (int i = 1; i <= m; ++i) pmm *= (2.0 * i - 1.0) * s;
  if (l == m) return pmm;
  double pm1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pm1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = ((2.0 * ll - 1.0) * x * pm1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pm1;
    pm1 = pll;
  }
  return pll;
}

using Vec3 = std::array<double, 3>;

// Point i of an n-point Fibonacci lattice on the unit sphere. The lattice is
// close to uniform and its centroid is close to zero, so the summed field has
// vanishing net intensity.
Vec3 FibonacciPoint(int i, int n) {
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double z = 1.0 - (2.0 * i + 1.0) / n;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double phi = golden_angle * i;
  return {r * std::cos(phi), r * std::sin(phi), z};
}

struct Rotation {
  std::array<Vec3, 3> rows;
  Vec3 Apply(const Vec3& v) const {
    Vec3 out{};
    for (int r = 0; r < 3; ++r) {
      out[r] = rows[r][0] * v[0] + rows[r][1] * v[1] + rows[r][2] * v[2];
    }
    return out;
  }
};

// Uniformly distributed rotation from a normalized Gaussian quaternion.
Rotation RandomRotation(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double q[4];
  double norm = 0.0;
  for (double& c : q) {
    c = gauss(rng);
    norm += c * c;
  }
  norm = std::sqrt(norm);
  for (double& c : q) c /= norm;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return Rotation{{Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - w * z),
                        2 * (x * z + w * y)},
                   Vec3{2 * (x * y + w * z), 1 - 2 * (x * x + z * z),
                        2 * (y * z - w * x)},
                   Vec3{2 * (x * z - w * y), 2 * (y * z + w * x),
                        1 - 2 * (x * x + y * y)}}};
}

double Rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace

int AcnDegree(int acn) {
  int l = 0;
  while ((l + 1) * (l + 1) <= acn) ++l;
  return l;
}

int OrderFromChannelCount(int channels) {
  if (channels <= 0) return -1;
  const int l = static_cast<int>(std::lround(std::sqrt(channels))) - 1;
  return NumAmbisonicChannels(l) == channels ? l : -1;
}

std::vector<double> Sn3dHarmonics(int order, double azimuth_deg,
                                  double elevation_deg) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double az = azimuth_deg * kDeg;
  const double x = std::sin(elevation_deg * kDeg);
  std::vector<double> y(NumAmbisonicChannels(order));
  for (int l = 0; l <= order; ++l) {
    for (int m = -l; m <= l; ++m) {
      const int am = std::abs(m);
      const double norm = std::sqrt((m == 0 ? 1.0 : 2.0) * Factorial(l - am) /
                                    Factorial(l + am));
      const double p = norm * AssocLegendre(l, am, x);
      double value = p;
      if (m > 0) value *= std::cos(am * az);
      if (m < 0) value *= std::sin(am * az);
      y[l * l + l + m] = value;
    }
  }
  return y;
}

SoundFieldSignal::SoundFieldSignal(std::vector<std::vector<double>> channels,
                                   int sample_rate, int order)
    : channels_(std::move(channels)), sample_rate_(sample_rate), order_(order) {
  if (order < 0 ||
      static_cast<int>(channels_.size()) != NumAmbisonicChannels(order)) {
    throw DataError("ambisonic order " + std::to_string(order) + " needs " +
                    std::to_string(NumAmbisonicChannels(order)) +
                    " channels, got " + std::to_string(channels_.size()));
  }
  if (sample_rate <= 0) throw DataError("sample rate must be positive");
  const size_t n = channels_.front().size();
  for (const auto& ch : channels_) {
    if (ch.size() != n) throw DataError("ragged ambisonic channels");
    for (double v : ch) {
      if (!std::isfinite(v)) throw DataError("non-finite sample in signal");
    }
  }
}

SoundFieldSignal SoundFieldSignal::FromChannels(
    std::vector<std::vector<double>> channels, int sample_rate,
    Normalization normalization) {
  const int order = OrderFromChannelCount(static_cast<int>(channels.size()));
  if (order < 0) {
    throw DataError(std::to_string(channels.size()) +
                    " channels is not a full ambisonic order");
  }
  SoundFieldSignal signal(std::move(channels), sample_rate, order);
  signal.normalization_ = normalization;
  return ConvertNormalization(signal, Normalization::kSN3D);
}

SoundFieldSignal EncodePlaneWave(std::span<const double> source,
                                 double azimuth_deg, double elevation_deg,
                                 int order, int sample_rate) {
  if (source.empty()) throw DataError("empty input");
  if (order < 0) throw DataError("negative ambisonic order");
  if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg)) {
    throw DataError("non-finite direction");
  }
  const std::vector<double> gains =
      Sn3dHarmonics(order, azimuth_deg, elevation_deg);
  std::vector<std::vector<double>> channels(gains.size());
  for (size_t c = 0; c < gains.size(); ++c) {
    channels[c].resize(source.size());
    for (size_t n = 0; n < source.size(); ++n) {
      channels[c][n] = gains[c] * source[n];
    }
  }
  return SoundFieldSignal(std::move(channels), sample_rate, order);
}

SoundFieldSignal ConvertNormalization(const SoundFieldSignal& signal,
                                      Normalization target) {
  if (target != Normalization::kSN3D && target != Normalization::kN3D) {
    throw DataError("unknown normalization");
  }
  SoundFieldSignal out = signal;
  if (target == signal.normalization()) return out;
  const bool to_n3d = target == Normalization::kN3D;
  for (int c = 0; c < out.num_channels(); ++c) {
    const double root = std::sqrt(2.0 * AcnDegree(c) + 1.0);
    const double gain = to_n3d ? root : 1.0 / root;
    for (double& v : out.channels_[c]) v *= gain;
  }
  out.normalization_ = target;
  return out;
}

double OmniLevelDb(const SoundFieldSignal& signal) {
  return 20.0 * std::log10(Rms(signal.channel(0)));
}

SoundFieldSignal NormalizeLevel(const SoundFieldSignal& signal,
                                double target_db) {
  const double rms = Rms(signal.channel(0));
  if (!(rms > 0.0)) throw DataError("silent input");
  const double gain = std::pow(10.0, target_db / 20.0) / rms;
  std::vector<std::vector<double>> channels = signal.channels();
  for (auto& ch : channels) {
    for (double& v : ch) v *= gain;
  }
  return SoundFieldSignal(std::move(channels), signal.sample_rate(),
                          signal.order());
}

SoundFieldSignal SynthIsotropicDiffuse(double duration_s, int order,
                                       int num_waves, uint64_t seed,
                                       int sample_rate) {
  if (num_waves < 1) throw DataError("need at least one plane wave");
  if (!(duration_s > 0.0)) throw DataError("duration must be positive");
  const size_t n =
      static_cast<size_t>(std::llround(duration_s * sample_rate));
  if (n == 0) throw DataError("duration shorter than one sample");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Rotation rotation = RandomRotation(rng);
  const int num_channels = NumAmbisonicChannels(order);
  std::vector<std::vector<double>> channels(num_channels,
                                            std::vector<double>(n, 0.0));
  std::vector<double> carrier(n);
  for (int w = 0; w < num_waves; ++w) {
    const auto [x, y, z] =
        rotation.Apply(FibonacciPoint(w, num_waves));
    const double azimuth = std::atan2(y, x) * 180.0 / std::numbers::pi;
    const double elevation =
        std::asin(std::clamp(z, -1.0, 1.0)) * 180.0 / std::numbers::pi;
    for (double& v : carrier) v = gauss(rng);
    const std::vector<double> gains = Sn3dHarmonics(order, azimuth, elevation);
    for (int c = 0; c < num_channels; ++c) {
      for (size_t i = 0; i < n; ++i) channels[c][i] += gains[c] * carrier[i];
    }
  }
  return NormalizeLevel(SoundFieldSignal(std::move(channels), sample_rate, order),
                        kDiffuseFieldLevelDb);
}

SoundFieldSignal ReadSoundField(const std::filesystem::path& path,
                                Normalization normalization) {
  WavAudio audio = ReadWav(path);
  try {
    return SoundFieldSignal::FromChannels(std::move(audio.channels),
                                          audio.sample_rate, normalization);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void WriteSoundField(const std::filesystem::path& path,
                     const SoundFieldSignal& signal) {
  WavAudio audio;
  audio.sample_rate = signal.sample_rate();
  audio.channels = signal.channels();
  WriteWav(path, audio);
}

}  // namespace spatialq
