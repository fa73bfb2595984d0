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

#ifndef SPATIALQ_QNET_H_
#define SPATIALQ_QNET_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "spatialq/features.h"
#include "spatialq/spectral.h"
#include "spatialq/tensor.h"

namespace spatialq {

// Widths of the three point-wise convolutions.
inline constexpr std::array<size_t, 3> kConvChannels = {16, 16, 6};
// Parameter count quoted for the original network; ours is reported next to
// it by `spatialq info`.
inline constexpr size_t kReferenceParameterCount = 730;

enum class FrequencyWeighting : uint32_t {
  // softmax(freq_logits), always a convex combination of bands.
  kSoftmax = 0,
  // freq_logits used directly as band weights.
  kLinear = 1,
};

struct NetConfig {
  size_t feature_count = 4;
  size_t band_count = 32;
  double leaky_slope = 0.01;
  size_t hidden_dim = 16;
  FrequencyWeighting frequency_weighting = FrequencyWeighting::kSoftmax;
  // When false the pre-weights are held at 1 and excluded from training.
  bool pre_weighting = true;
  // Feature frame length the model was trained with (0.040 or 0.400).
  double frame_duration_s = 0.040;

  // Throws DataError on invalid combinations.
  void Validate() const;
  friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

// Feature-extraction settings matching `net` (frame length, band count,
// diffuseness plane).
AnalysisConfig AnalysisConfigFor(const NetConfig& net);

// Offsets of each parameter group inside the flat parameter vector, in file
// order: pre_weight[F][B], conv1 W[16][F] b[16], conv2 W[16][16] b[16],
// conv3 W[6][16] b[6], freq_logits[B], alpha[6], fc1 W[H][6] b[H],
// fc2 W[1][H] b[1].
struct ParamLayout {
  struct Group {
    std::string name;
    size_t offset;
    size_t size;
  };
  std::vector<Group> groups;
  size_t total = 0;

  static ParamLayout For(const NetConfig& config);
  const Group& Find(const std::string& name) const;
};

// Every learnable scalar of the network, stored flat in file order.
class ModelParams {
 public:
  ModelParams() = default;
  explicit ModelParams(const NetConfig& config);

  const NetConfig& config() const { return config_; }
  const ParamLayout& layout() const { return layout_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  size_t size() const { return values_.size(); }

  std::span<double> group(const std::string& name);
  std::span<const double> group(const std::string& name) const;

  friend bool operator==(const ModelParams& a, const ModelParams& b) {
    return a.config_ == b.config_ && a.values_ == b.values_;
  }

 private:
  NetConfig config_;
  ParamLayout layout_;
  std::vector<double> values_;
};

using ParamGrads = ModelParams;

// Number of scalars in the model (749 for F=4, B=32).
size_t ParameterCount(const NetConfig& config);
// Scalars updated by training: ParameterCount minus the frozen pre-weights
// when pre_weighting is off.
size_t TrainableParameterCount(const NetConfig& config);

// pre_weight = 1, freq_logits = 0 (1/B for linear weighting), alpha = 0,
// weights ~ U(+-sqrt(6 / (fan_in + fan_out))), biases 0.
ModelParams InitParams(const NetConfig& config, uint64_t seed);

// Intermediate activations of one forward pass.
struct ForwardCache {
  NetConfig config;
  uint64_t params_fingerprint = 0;
  Tensor3 input;               // [F][B][T]
  Tensor3 z1, a1, z2, a2, z3, a3;  // [C][B][T]
  std::vector<double> band_weights;            // [B]
  std::vector<std::vector<double>> pooled;     // H[c][t]
  std::vector<std::vector<double>> time_weights;  // softmax over t, [c][t]
  std::vector<double> g;       // [6]
  std::vector<double> h1, a_fc1;  // [hidden]
  double logit = 0.0;
  double score01 = 0.0;
};

// Score in (0, 1). Throws NumericalError("non-finite features") on NaN/Inf
// input and DataError on a shape mismatch.
double Forward(const DifferenceTensor& diff, const ModelParams& params,
               ForwardCache* cache = nullptr);

// Reverse-mode gradients of score01 with respect to every parameter, scaled
// by `dloss_dscore`. Throws DataError if `cache` came from other params.
ParamGrads Backward(const ForwardCache& cache, const ModelParams& params,
                    double dloss_dscore);

// Auto-pool of one channel: sum_t x_t softmax(alpha x)_t.
double AutoPool(std::span<const double> x, double alpha);

// Model file: "QSTA", u32 version = 1, u32 F, u32 B, u32 frame_ms,
// u32 mode, then float32 parameters in layout order. `mode` bits 0-7 hold
// the FrequencyWeighting; bit 8 is set when pre-weighting is disabled.
void SaveParams(const ModelParams& params, const std::filesystem::path& path);
// Throws DataError("incompatible model file: ...").
ModelParams LoadParams(const std::filesystem::path& path);
// Also requires the stored configuration to equal `expected`.
ModelParams LoadParams(const std::filesystem::path& path,
                       const NetConfig& expected);

}  // namespace spatialq

#endif  // SPATIALQ_QNET_H_
