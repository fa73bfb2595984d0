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

#include "spatialq/spectral.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spatialq/errors.h"
#include "spatialq/fft.h"

namespace spatialq {

size_t AnalysisConfig::WindowSamples(int sample_rate) const {
  return static_cast<size_t>(std::llround(window_s * sample_rate));
}

size_t AnalysisConfig::HopSamples(int sample_rate) const {
  return static_cast<size_t>(std::llround(hop_s * sample_rate));
}

size_t AnalysisConfig::HopsPerFrame() const {
  const double ratio = frame_duration_s / hop_s;
  const double rounded = std::round(ratio);
  if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-9 * rounded) {
    throw DataError("frame duration must be an integer multiple of the hop");
  }
  return static_cast<size_t>(rounded);
}

void AnalysisConfig::Validate(int sample_rate) const {
  if (sample_rate <= 0) throw DataError("sample rate must be positive");
  const size_t window = WindowSamples(sample_rate);
  if (window < 2) throw DataError("analysis window too short");
  if (HopSamples(sample_rate) < 1) throw DataError("hop too short");
  if (fft_size < window) throw DataError("fft_size smaller than the window");
  if (band_count < 1) throw DataError("band_count must be >= 1");
  if (!(band_low_hz >= 0.0) || !(band_high_hz > band_low_hz)) {
    throw DataError("band range must be increasing and non-negative");
  }
  if (band_high_hz > 0.5 * sample_rate) {
    throw DataError("band range exceeds the Nyquist frequency");
  }
  if (!(diffuseness_tau_s > 0.0)) throw DataError("smoothing tau must be > 0");
  if (!(envelope_scale_db > 0.0) || !(ild_scale_db > 0.0) ||
      !(ild_clamp_db > 0.0)) {
    throw DataError("feature scales must be positive");
  }
  HopsPerFrame();
}

std::vector<double> HannWindow(size_t length) {
  std::vector<double> w(length);
  for (size_t n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                static_cast<double>(length));
  }
  return w;
}

Spectrogram Stft(std::span<const double> channel, const AnalysisConfig& config,
                 int sample_rate) {
  config.Validate(sample_rate);
  const size_t window = config.WindowSamples(sample_rate);
  const size_t hop = config.HopSamples(sample_rate);
  if (channel.size() < window) {
    throw DataError("signal shorter than one window");
  }
  const size_t frames = 1 + (channel.size() - window) / hop;
  const RealFft fft(config.fft_size);
  const std::vector<double> hann = HannWindow(window);
  Spectrogram spec(fft.num_bins(), frames);
  std::vector<double> buf(config.fft_size, 0.0);
  for (size_t t = 0; t < frames; ++t) {
    const size_t start = t * hop;
    for (size_t n = 0; n < window; ++n) buf[n] = hann[n] * channel[start + n];
    fft.Forward(buf, spec.mutable_frame(t));
  }
  return spec;
}

double HzToErbRate(double hz) { return 21.4 * std::log10(1.0 + 0.00437 * hz); }

double ErbRateToHz(double erb) {
  return (std::pow(10.0, erb / 21.4) - 1.0) / 0.00437;
}

int BandPlan::BandOfBin(size_t bin) const {
  for (size_t b = 0; b < bin_ranges.size(); ++b) {
    if (bin >= bin_ranges[b].first && bin < bin_ranges[b].second) {
      return static_cast<int>(b);
    }
  }
  return -1;
}

BandPlan ErbBandPlan(const AnalysisConfig& config, int sample_rate) {
  config.Validate(sample_rate);
  const size_t bands = config.band_count;
  const double lo = config.band_low_hz;
  const double hi = config.band_high_hz;
  const double erb_lo = HzToErbRate(lo);
  const double step = (HzToErbRate(hi) - erb_lo) / static_cast<double>(bands);

  BandPlan plan;
  plan.fft_size = config.fft_size;
  plan.sample_rate = sample_rate;
  plan.edges_hz.resize(bands + 1);
  plan.centers_hz.resize(bands);
  for (size_t b = 0; b <= bands; ++b) {
    plan.edges_hz[b] = ErbRateToHz(erb_lo + step * static_cast<double>(b));
  }
  plan.edges_hz.front() = lo;
  plan.edges_hz.back() = hi;
  for (size_t b = 0; b < bands; ++b) {
    plan.centers_hz[b] = ErbRateToHz(erb_lo + step * (b + 0.5));
  }

  const double bin_hz =
      static_cast<double>(sample_rate) / static_cast<double>(config.fft_size);
  const size_t num_bins = config.fft_size / 2 + 1;
  std::vector<int> owner(num_bins, -1);
  for (size_t k = 0; k < num_bins; ++k) {
    const double f = bin_hz * static_cast<double>(k);
    if (f + 0.5 * bin_hz <= lo || f - 0.5 * bin_hz >= hi) continue;
    const double clamped = std::clamp(f, lo, hi);
    // Last band is closed on the right.
    auto it = std::upper_bound(plan.edges_hz.begin(), plan.edges_hz.end(),
                               clamped);
    const size_t b = std::min<size_t>(
        bands - 1,
        static_cast<size_t>(std::distance(plan.edges_hz.begin(), it)) - 1);
    owner[k] = static_cast<int>(b);
  }
  plan.bin_ranges.assign(bands, {0, 0});
  for (size_t b = 0; b < bands; ++b) {
    auto first = std::find(owner.begin(), owner.end(), static_cast<int>(b));
    if (first == owner.end()) {
      throw DataError("band " + std::to_string(b) + " of " +
                      std::to_string(bands) +
                      " receives no FFT bin; increase fft_size or reduce "
                      "band_count");
    }
    auto last = std::find_if(first, owner.end(),
                             [b](int o) { return o != static_cast<int>(b); });
    plan.bin_ranges[b] = {static_cast<size_t>(first - owner.begin()),
                          static_cast<size_t>(last - owner.begin())};
  }
  return plan;
}

}  // namespace spatialq
