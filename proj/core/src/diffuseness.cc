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

#include "spatialq/diffuseness.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "spatialq/errors.h"

namespace spatialq {

std::vector<TfFrame> FoaTfFrames(const SoundFieldSignal& signal,
                                 const AnalysisConfig& config) {
  if (signal.order() < 1) {
    throw DataError("diffuseness needs at least a first-order signal");
  }
  const int rate = signal.sample_rate();
  // ACN 0, 3, 1, 2 hold W, X, Y, Z.
  const Spectrogram w = Stft(signal.channel(0), config, rate);
  const Spectrogram x = Stft(signal.channel(3), config, rate);
  const Spectrogram y = Stft(signal.channel(1), config, rate);
  const Spectrogram z = Stft(signal.channel(2), config, rate);
  std::vector<double> freqs(w.num_bins());
  for (size_t k = 0; k < freqs.size(); ++k) {
    freqs[k] = static_cast<double>(k) * rate / static_cast<double>(config.fft_size);
  }
  std::vector<TfFrame> frames(w.num_frames());
  for (size_t t = 0; t < frames.size(); ++t) {
    auto copy = [t](const Spectrogram& s) {
      auto f = s.frame(t);
      return std::vector<std::complex<double>>(f.begin(), f.end());
    };
    frames[t] = TfFrame{copy(w), copy(x), copy(y), copy(z), freqs};
  }
  return frames;
}

DiffusenessGrid ComputeDiffusenessGrid(std::span<const TfFrame> frames,
                                       double hop_s, double smoothing_tau_s,
                                       const BandPlan& plan,
                                       size_t hops_per_frame) {
  if (frames.empty()) throw DataError("no time-frequency frames");
  if (!(smoothing_tau_s > 0.0)) throw DataError("smoothing tau must be > 0");
  if (!(hop_s > 0.0)) throw DataError("hop must be > 0");
  if (hops_per_frame < 1) throw DataError("hops_per_frame must be >= 1");
  const size_t bins = frames.front().w.size();
  for (const TfFrame& f : frames) {
    if (f.w.size() != bins || f.x.size() != bins || f.y.size() != bins ||
        f.z.size() != bins) {
      throw DataError("time-frequency frames differ in length");
    }
  }
  for (const auto& range : plan.bin_ranges) {
    if (range.second > bins) {
      throw DataError("band plan does not match the spectrum length");
    }
  }

  const double a = std::exp(-hop_s / smoothing_tau_s);
  const size_t bands = plan.num_bands();
  const size_t hops = frames.size();
  const size_t out_frames = (hops + hops_per_frame - 1) / hops_per_frame;

  std::vector<std::array<double, 3>> intensity(bins, {0.0, 0.0, 0.0});
  std::vector<double> energy(bins, 0.0);
  std::vector<double> psi(bins, 0.0);

  DiffusenessGrid grid;
  grid.frame_duration_s = hop_s * static_cast<double>(hops_per_frame);
  grid.values.assign(bands, std::vector<double>(out_frames, 0.0));
  std::vector<size_t> count(out_frames, 0);

  for (size_t t = 0; t < hops; ++t) {
    const TfFrame& f = frames[t];
    for (size_t k = 0; k < bins; ++k) {
      const std::complex<double> wc = std::conj(f.w[k]);
      const double ix = (wc * f.x[k]).real();
      const double iy = (wc * f.y[k]).real();
      const double iz = (wc * f.z[k]).real();
      const double e = std::norm(f.w[k]) +
                       0.5 * (std::norm(f.x[k]) + std::norm(f.y[k]) +
                              std::norm(f.z[k]));
      intensity[k][0] = a * intensity[k][0] + (1.0 - a) * ix;
      intensity[k][1] = a * intensity[k][1] + (1.0 - a) * iy;
      intensity[k][2] = a * intensity[k][2] + (1.0 - a) * iz;
      energy[k] = a * energy[k] + (1.0 - a) * e;
      const double norm = std::sqrt(intensity[k][0] * intensity[k][0] +
                                    intensity[k][1] * intensity[k][1] +
                                    intensity[k][2] * intensity[k][2]);
      psi[k] = std::clamp(
          1.0 - kDiffusenessScale * norm / (energy[k] + kEpsilon), 0.0, 1.0);
    }
    const size_t out = t / hops_per_frame;
    ++count[out];
    for (size_t b = 0; b < bands; ++b) {
      const auto [first, last] = plan.bin_ranges[b];
      double weighted = 0.0, weight = 0.0, plain = 0.0;
      for (size_t k = first; k < last; ++k) {
        weighted += energy[k] * psi[k];
        weight += energy[k];
        plain += psi[k];
      }
      const double value = weight > kEpsilon
                                ? weighted / weight
                                : plain / static_cast<double>(last - first);
      grid.values[b][out] += value;
    }
  }
  for (size_t b = 0; b < bands; ++b) {
    for (size_t t = 0; t < out_frames; ++t) {
      grid.values[b][t] =
          std::clamp(grid.values[b][t] / static_cast<double>(count[t]), 0.0, 1.0);
    }
  }
  return grid;
}

DiffusenessGrid SignalDiffuseness(const SoundFieldSignal& signal,
                                  const AnalysisConfig& config) {
  const std::vector<TfFrame> frames = FoaTfFrames(signal, config);
  const BandPlan plan = ErbBandPlan(config, signal.sample_rate());
  return ComputeDiffusenessGrid(frames, config.hop_s, config.diffuseness_tau_s,
                                plan, config.HopsPerFrame());
}

}  // namespace spatialq
