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

#include "gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "spatialq/features.h"

namespace spatialq {

namespace {

bool SameSigns(std::span<const double> a, std::span<const double> b) {
  for (size_t i = 0; i < a.size(); ++i) {
    if ((a[i] > 0.0) != (b[i] > 0.0)) return false;
  }
  return true;
}

bool SameKinks(const ForwardCache& a, const ForwardCache& b) {
  return SameSigns(a.z1.flat(), b.z1.flat()) &&
         SameSigns(a.z2.flat(), b.z2.flat()) &&
         SameSigns(a.z3.flat(), b.z3.flat()) && SameSigns(a.h1, b.h1);
}

// Parameters away from their initial values so every path carries gradient.
ModelParams RandomParams(const NetConfig& config, std::mt19937_64& rng) {
  ModelParams params = InitParams(config, rng());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const ParamLayout::Group& g : params.layout().groups) {
    std::span<double> v = params.group(g.name);
    for (double& x : v) {
      if (g.name == "pre_weight") {
        x = 1.0 + 0.5 * u(rng);
      } else if (g.name == "alpha") {
        x = 0.5 + 1.5 * u(rng);
      } else if (g.name == "freq_logits" || g.name.ends_with("_b")) {
        x = 0.3 * u(rng);
      } else {
        x += 0.1 * u(rng);
      }
    }
  }
  return params;
}

}  // namespace

GradCheckResult RunGradientCheck(uint64_t seed, size_t num_seeds,
                                 double tolerance) {
  constexpr double kStep = 1e-5;
  GradCheckResult result;
  result.passed = true;
  for (size_t features : {size_t{3}, size_t{4}}) {
    for (double frame_s : {0.040, 0.400}) {
      for (size_t s = 0; s < num_seeds; ++s) {
        GradCheckCase c;
        c.feature_count = features;
        c.frame_duration_s = frame_s;
        c.seed = seed + s;
        NetConfig config;
        config.feature_count = features;
        config.frame_duration_s = frame_s;
        std::mt19937_64 rng(c.seed * 7919 + features * 31 +
                            static_cast<uint64_t>(frame_s * 1000));
        ModelParams params = RandomParams(config, rng);
        // 2 s of audio: 50 or 5 feature frames.
        const size_t frames = frame_s < 0.1 ? 50 : 5;
        DifferenceTensor diff{Tensor3(features, config.band_count, frames)};
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (double& v : diff.values.flat()) v = u(rng) * u(rng);

        ForwardCache cache;
        Forward(diff, params, &cache);
        const ParamGrads grads = Backward(cache, params, 1.0);
        for (const ParamLayout::Group& g : params.layout().groups) {
          for (size_t i = g.offset; i < g.offset + g.size; ++i) {
            const double saved = params.values()[i];
            ForwardCache c1, c2, c3, c4;
            auto eval = [&](double delta, ForwardCache* cache) {
              params.values()[i] = saved + delta;
              return Forward(diff, params, cache);
            };
            const double f2p = eval(2.0 * kStep, &c1);
            const double f1p = eval(kStep, &c2);
            const double f1m = eval(-kStep, &c3);
            const double f2m = eval(-2.0 * kStep, &c4);
            params.values()[i] = saved;
            if (!SameKinks(c1, c4) || !SameKinks(c2, c3) || !SameKinks(c1, c2)) {
              ++c.skipped;
              continue;
            }
            ++c.checked;
            // Five-point stencil.
            const double numeric =
                (8.0 * (f1p - f1m) - (f2p - f2m)) / (12.0 * kStep);
            const double analytic = grads.values()[i];
            const double scale = std::max(std::abs(numeric), std::abs(analytic));
            const double abs_err = std::abs(numeric - analytic);
            double rel = scale > 0.0 ? abs_err / scale : 0.0;
            if (scale < 1e-6) rel = abs_err < 1e-8 ? 0.0 : 1.0;
            if (rel > c.max_relative_error) {
              c.max_relative_error = rel;
              c.worst_group = g.name;
            }
          }
        }
        result.max_relative_error =
            std::max(result.max_relative_error, c.max_relative_error);
        if (!(c.max_relative_error < tolerance)) result.passed = false;
        result.cases.push_back(c);
      }
    }
  }
  return result;
}

}  // namespace spatialq
