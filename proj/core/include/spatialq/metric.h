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

#ifndef SPATIALQ_METRIC_H_
#define SPATIALQ_METRIC_H_

#include <span>
#include <string>
#include <vector>

#include "spatialq/binaural.h"
#include "spatialq/qnet.h"
#include "spatialq/sound_field.h"

namespace spatialq {

struct HeadScore {
  std::string head;
  double score = 0.0;  // 0-100
};

struct MetricScore {
  double score = 0.0;  // 0-100, mean of the head scores
  std::vector<HeadScore> heads;
};

// For every head: render both signals, extract features with the settings
// implied by the model, difference, forward. The final score is
// 100 * mean(score01) over heads. Requires 1 <= heads.size() <= kMaxHeads.
// Errors are rethrown with the offending head's name prefixed.
MetricScore ScorePair(const SoundFieldSignal& ref, const SoundFieldSignal& deg,
                      std::span<const RenderFilterSet> heads,
                      const ModelParams& params, size_t threads = 1);

}  // namespace spatialq

#endif  // SPATIALQ_METRIC_H_
