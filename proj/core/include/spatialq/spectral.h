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

#ifndef SPATIALQ_SPECTRAL_H_
#define SPATIALQ_SPECTRAL_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spatialq {

// Guard added to every denominator and logarithm argument.
inline constexpr double kEpsilon = 1e-12;

// Time-frequency analysis settings shared by every feature plane.
struct AnalysisConfig {
  double window_s = 0.020;
  double hop_s = 0.010;
  size_t fft_size = 1024;
  size_t band_count = 32;
  double band_low_hz = 50.0;
  double band_high_hz = 16000.0;
  // 0.040 by default; 0.400 reproduces the long-frame variant.
  double frame_duration_s = 0.040;
  bool include_diffuseness = true;
  double envelope_scale_db = 40.0;
  double ild_scale_db = 20.0;
  double ild_clamp_db = 30.0;
  // Time constant of the recursive intensity/energy averager.
  double diffuseness_tau_s = 0.040;

  size_t WindowSamples(int sample_rate) const;
  size_t HopSamples(int sample_rate) const;
  // frame_duration_s / hop_s; throws DataError unless it is an integer >= 1.
  size_t HopsPerFrame() const;
  size_t FeatureCount() const { return include_diffuseness ? 4 : 3; }
  // Throws DataError describing the first violated invariant.
  void Validate(int sample_rate) const;
};

// One-sided short-time spectrum, stored frame-major.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(size_t num_bins, size_t num_frames)
      : num_bins_(num_bins),
        num_frames_(num_frames),
        data_(num_bins * num_frames) {}

  size_t num_bins() const { return num_bins_; }
  size_t num_frames() const { return num_frames_; }

  std::complex<double> at(size_t bin, size_t frame) const {
    return data_[frame * num_bins_ + bin];
  }
  std::span<const std::complex<double>> frame(size_t t) const {
    return {data_.data() + t * num_bins_, num_bins_};
  }
  std::span<std::complex<double>> mutable_frame(size_t t) {
    return {data_.data() + t * num_bins_, num_bins_};
  }

 private:
  size_t num_bins_ = 0;
  size_t num_frames_ = 0;
  std::vector<std::complex<double>> data_;
};

// Periodic Hann window of `length` samples.
std::vector<double> HannWindow(size_t length);

// Hann-windowed, zero-padded to fft_size, unnormalized. Frame t covers
// samples [t*hop, t*hop + window). Throws DataError("signal shorter than one
// window").
Spectrogram Stft(std::span<const double> channel, const AnalysisConfig& config,
                 int sample_rate);

// ERB-rate scale, E(f) = 21.4 log10(1 + 0.00437 f), and its inverse.
double HzToErbRate(double hz);
double ErbRateToHz(double erb);

// Assignment of FFT bins to auditory bands. Bands are contiguous bin ranges.
struct BandPlan {
  size_t fft_size = 0;
  int sample_rate = 0;
  std::vector<double> centers_hz;
  // num_bands + 1 edges; band b spans [edges_hz[b], edges_hz[b+1]).
  std::vector<double> edges_hz;
  // [first_bin, last_bin) per band.
  std::vector<std::pair<size_t, size_t>> bin_ranges;

  size_t num_bands() const { return centers_hz.size(); }
  // Band of `bin`, or -1 when the bin lies outside the analysed range.
  int BandOfBin(size_t bin) const;
};

// `band_count` centres uniformly spaced on the ERB-rate scale strictly inside
// [band_low_hz, band_high_hz], with edges half way between centres. A bin
// belongs to the band containing its centre frequency, clamped into the
// analysed range; a bin is in range when its half-bin-wide neighbourhood
// overlaps it. Throws DataError when some band receives no bin.
BandPlan ErbBandPlan(const AnalysisConfig& config, int sample_rate);

}  // namespace spatialq

#endif  // SPATIALQ_SPECTRAL_H_
