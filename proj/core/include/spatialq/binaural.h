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

#ifndef SPATIALQ_BINAURAL_H_
#define SPATIALQ_BINAURAL_H_

#include <filesystem>
#include <string>
#include <vector>

#include "spatialq/sound_field.h"

namespace spatialq {

// Upper bound on heads averaged by the metric.
inline constexpr size_t kMaxHeads = 20;

// FIR matrix from ambisonic channels to two ears.
struct RenderFilterSet {
  std::string name;
  int sample_rate = kCanonicalSampleRate;
  int order = 0;
  // taps[ear][acn][n], ear 0 = left.
  std::vector<std::vector<std::vector<double>>> taps;

  size_t num_taps() const { return taps.at(0).at(0).size(); }
  // Throws DataError("malformed filter set: ...") on shape violations.
  void Validate() const;
};

struct BinauralSignal {
  std::vector<double> left;
  std::vector<double> right;
  int sample_rate = kCanonicalSampleRate;

  size_t num_samples() const { return left.size(); }
};

// WAV with 2 (L+1)^2 channels: the first (L+1)^2 are the left-ear filters
// for ACN 0.., the rest the right-ear filters. The file stem becomes the
// head name.
RenderFilterSet LoadFilterSet(const std::filesystem::path& path);
void SaveFilterSet(const std::filesystem::path& path,
                   const RenderFilterSet& filters);

// Every *.wav in `dir`, sorted by filename, at most kMaxHeads of them.
// Throws DataError when the directory holds no filter set.
std::vector<RenderFilterSet> LoadHeads(const std::filesystem::path& dir);

// Single-tap first-order virtual microphones: left = (W + Y) / 2,
// right = (W - Y) / 2, i.e. cardioids facing +-90 degrees azimuth. Channels
// above first order are zero so the set accepts signals up to `order`.
RenderFilterSet BuiltinCardioidHead(int order,
                                    int sample_rate = kCanonicalSampleRate);

// ear = sum_c signal[c] * taps[ear][c]. The output keeps the input length
// (the convolution tail is dropped). Signal order must not exceed the
// filter order; unused filter channels are ignored.
BinauralSignal RenderBinaural(const SoundFieldSignal& signal,
                              const RenderFilterSet& filters);

}  // namespace spatialq

#endif  // SPATIALQ_BINAURAL_H_
