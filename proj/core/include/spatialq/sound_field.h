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

#ifndef SPATIALQ_SOUND_FIELD_H_
#define SPATIALQ_SOUND_FIELD_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace spatialq {

inline constexpr int kCanonicalSampleRate = 48000;

enum class Normalization { kSN3D = 0, kN3D = 1 };

// Channel count of an order-L ambisonic signal.
constexpr int NumAmbisonicChannels(int order) {
  return (order + 1) * (order + 1);
}
// Spherical-harmonic degree l of ACN channel n = l^2 + l + m.
int AcnDegree(int acn);
// Order L if `channels` == (L+1)^2, otherwise -1.
int OrderFromChannelCount(int channels);

// Real SN3D spherical harmonics (no Condon-Shortley phase) for all
// (order+1)^2 ACN channels. Angles in degrees; azimuth counter-clockwise from
// the front (+x), elevation up from the horizontal plane.
std::vector<double> Sn3dHarmonics(int order, double azimuth_deg,
                                  double elevation_deg);

// Ambisonic signal in ACN channel order. The library keeps every signal in
// SN3D; FromChannels converts N3D input on construction.
class SoundFieldSignal {
 public:
  SoundFieldSignal() = default;
  // Validates channel count against `order` and finiteness of all samples.
  // Throws DataError.
  SoundFieldSignal(std::vector<std::vector<double>> channels, int sample_rate,
                   int order);

  // Builds a signal from channels stored in `normalization`; the order is
  // inferred from the channel count.
  static SoundFieldSignal FromChannels(std::vector<std::vector<double>> channels,
                                       int sample_rate,
                                       Normalization normalization);

  int order() const { return order_; }
  int sample_rate() const { return sample_rate_; }
  int num_channels() const { return static_cast<int>(channels_.size()); }
  size_t num_samples() const {
    return channels_.empty() ? 0 : channels_.front().size();
  }
  Normalization normalization() const { return normalization_; }

  std::span<const double> channel(int acn) const { return channels_.at(acn); }
  std::span<double> mutable_channel(int acn) { return channels_.at(acn); }
  const std::vector<std::vector<double>>& channels() const { return channels_; }

 private:
  friend SoundFieldSignal ConvertNormalization(const SoundFieldSignal&,
                                               Normalization);
  std::vector<std::vector<double>> channels_;
  int sample_rate_ = kCanonicalSampleRate;
  int order_ = 0;
  Normalization normalization_ = Normalization::kSN3D;
};

// Channel c = source * Y_c(azimuth, elevation) under SN3D.
// Throws DataError("empty input") for an empty source.
SoundFieldSignal EncodePlaneWave(std::span<const double> source,
                                 double azimuth_deg, double elevation_deg,
                                 int order,
                                 int sample_rate = kCanonicalSampleRate);

// Per-degree sqrt(2l+1) scaling between SN3D and N3D.
SoundFieldSignal ConvertNormalization(const SoundFieldSignal& signal,
                                      Normalization target);

// Scales every channel by one gain so that the RMS of ACN 0 is `target_db`
// dB re full scale. Throws DataError("silent input") on an all-zero W.
SoundFieldSignal NormalizeLevel(const SoundFieldSignal& signal,
                                double target_db);

// RMS level of ACN 0 in dB re full scale.
double OmniLevelDb(const SoundFieldSignal& signal);

// Target ACN 0 level of SynthIsotropicDiffuse output.
inline constexpr double kDiffuseFieldLevelDb = -20.0;

// Sum of `num_waves` plane waves carrying independent Gaussian noise. The
// directions form a Fibonacci lattice under a seeded uniform random rotation.
// Deterministic given `seed`; W is normalized to kDiffuseFieldLevelDb.
SoundFieldSignal SynthIsotropicDiffuse(double duration_s, int order,
                                       int num_waves, uint64_t seed,
                                       int sample_rate = kCanonicalSampleRate);

// Reads an ambisonic WAV file (ACN order) declared as `normalization`.
SoundFieldSignal ReadSoundField(const std::filesystem::path& path,
                                Normalization normalization);
// Writes an SN3D signal as float32 WAV.
void WriteSoundField(const std::filesystem::path& path,
                     const SoundFieldSignal& signal);

}  // namespace spatialq

#endif  // SPATIALQ_SOUND_FIELD_H_
