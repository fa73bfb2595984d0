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

#ifndef SPATIALQ_TOOLS_GRADCHECK_H_
#define SPATIALQ_TOOLS_GRADCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "spatialq/qnet.h"

namespace spatialq {

struct GradCheckCase {
  size_t feature_count = 0;
  double frame_duration_s = 0.0;
  uint64_t seed = 0;
  size_t checked = 0;
  size_t skipped = 0;  // perturbation crossed a LeakyReLU kink
  double max_relative_error = 0.0;
  std::string worst_group;
};

struct GradCheckResult {
  std::vector<GradCheckCase> cases;
  double max_relative_error = 0.0;
  bool passed = false;
};

// Five-point central differences against Backward for every parameter, over
// F in {3, 4}, 40 and 400 ms frames and `num_seeds` seeds. An entry passes
// when its relative error is below `tolerance`, or its absolute error is
// below 1e-8 where the gradient magnitude is under 1e-6.
GradCheckResult RunGradientCheck(uint64_t seed, size_t num_seeds = 5,
                                 double tolerance = 1e-4);

}  // namespace spatialq

#endif  // SPATIALQ_TOOLS_GRADCHECK_H_
