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

#ifndef SPATIALQ_FEATURES_H_
#define SPATIALQ_FEATURES_H_

#include <filesystem>

#include "spatialq/binaural.h"
#include "spatialq/sound_field.h"
#include "spatialq/spectral.h"
#include "spatialq/tensor.h"

namespace spatialq {

// Feature plane indices.
enum Feature : size_t {
  kEnvelope = 0,
  kIld = 1,
  kCoherence = 2,
  kDiffuseness = 3,
};

// values[feature][band][frame]. The diffuseness plane is present only when
// config.include_diffuseness is set.
struct FeatureGrid {
  Tensor3 values;
  AnalysisConfig config;

  size_t num_features() const { return values.dim0(); }
  size_t num_bands() const { return values.dim1(); }
  size_t num_frames() const { return values.dim2(); }
};

// Elementwise squared difference of two grids; all entries >= 0.
struct DifferenceTensor {
  Tensor3 values;

  size_t num_features() const { return values.dim0(); }
  size_t num_bands() const { return values.dim1(); }
  size_t num_frames() const { return values.dim2(); }
};

// For each ERB band b and feature frame t (the union of hops_per_frame STFT
// frames, the last one possibly partial), with E = mean |X|^2 over the cell:
//   envelope  = 10 log10(eps + (E_L + E_R) / 2) / envelope_scale_db
//   ILD       = clamp(10 log10((E_L + eps) / (E_R + eps)), +-ild_clamp_db)
//               / ild_scale_db
//   coherence = |sum L conj(R)| / sqrt(sum |L|^2 sum |R|^2 + eps)
//   diffuseness from the first-order channels of `field` (when enabled).
// `binaural` and `field` must share sample rate and length.
FeatureGrid ComputeFeatureGrid(const BinauralSignal& binaural,
                               const SoundFieldSignal& field,
                               const AnalysisConfig& config);

// (ref - deg)^2. Frame counts may differ by one (the longer grid is
// truncated); any other mismatch throws DataError("unaligned pair").
DifferenceTensor FeatureDifference(const FeatureGrid& ref,
                                   const FeatureGrid& deg);

// Renders both signals through `head` and returns their feature difference.
DifferenceTensor PairDifference(const SoundFieldSignal& ref,
                                const SoundFieldSignal& deg,
                                const RenderFilterSet& head,
                                const AnalysisConfig& config);

// Cache file: "QFTG", u32 version, u32 bands, u32 features, u32 frames,
// u32 frame duration in microseconds, then float32 values in [feature][band]
// [frame] order. Little-endian.
void SaveFeatureGrid(const std::filesystem::path& path, const FeatureGrid& grid);
FeatureGrid LoadFeatureGrid(const std::filesystem::path& path);

}  // namespace spatialq

#endif  // SPATIALQ_FEATURES_H_
