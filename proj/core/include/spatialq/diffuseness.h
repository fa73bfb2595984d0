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

#ifndef SPATIALQ_DIFFUSENESS_H_
#define SPATIALQ_DIFFUSENESS_H_

#include <complex>
#include <span>
#include <vector>

#include "spatialq/sound_field.h"
#include "spatialq/spectral.h"

namespace spatialq {

// Scale applied to |E[I]| / E[e]. For SN3D input a single plane wave gives
// |I| / e = 2/3, so 3/2 maps it to zero diffuseness and an isotropic field
// to one.
inline constexpr double kDiffusenessScale = 1.5;

// First-order spectra of one STFT frame.
struct TfFrame {
  std::vector<std::complex<double>> w, x, y, z;
  std::vector<double> bin_frequencies;
};

// values[band][frame], every entry in [0, 1].
struct DiffusenessGrid {
  std::vector<std::vector<double>> values;
  double frame_duration_s = 0.0;

  size_t num_bands() const { return values.size(); }
  size_t num_frames() const {
    return values.empty() ? 0 : values.front().size();
  }
};

// STFT of ACN channels 0, 3, 1, 2 (W, X, Y, Z). Requires order >= 1.
std::vector<TfFrame> FoaTfFrames(const SoundFieldSignal& signal,
                                 const AnalysisConfig& config);

// Per bin, the intensity Re{w* [x y z]} and energy |w|^2 + |[x y z]|^2 / 2
// are averaged with a one-pole recursion of time constant `smoothing_tau_s`
// (coefficient exp(-hop/tau), zero initial state), then
// psi = clamp(1 - kDiffusenessScale |I| / (e + eps), 0, 1). Bins are combined
// into bands weighted by their smoothed energy, and `hops_per_frame`
// consecutive STFT frames are averaged into one output frame (a trailing
// partial frame is kept).
DiffusenessGrid ComputeDiffusenessGrid(std::span<const TfFrame> frames,
                                       double hop_s, double smoothing_tau_s,
                                       const BandPlan& plan,
                                       size_t hops_per_frame);

// Convenience wrapper: STFT + band plan + grid for a signal with order >= 1.
DiffusenessGrid SignalDiffuseness(const SoundFieldSignal& signal,
                                  const AnalysisConfig& config);

}  // namespace spatialq

#endif  // SPATIALQ_DIFFUSENESS_H_
