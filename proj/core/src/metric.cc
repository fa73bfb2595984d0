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

#include "spatialq/metric.h"

#include <string>

#include "spatialq/errors.h"
#include "spatialq/features.h"
#include "spatialq/parallel.h"

namespace spatialq {

MetricScore ScorePair(const SoundFieldSignal& ref, const SoundFieldSignal& deg,
                      std::span<const RenderFilterSet> heads,
                      const ModelParams& params, size_t threads) {
  if (heads.empty() || heads.size() > kMaxHeads) {
    throw DataError("need between 1 and " + std::to_string(kMaxHeads) +
                    " heads, got " + std::to_string(heads.size()));
  }
  const AnalysisConfig config = AnalysisConfigFor(params.config());
  MetricScore result;
  result.heads.resize(heads.size());
  ParallelFor(heads.size(), threads, [&](size_t h) {
    const RenderFilterSet& head = heads[h];
    try {
      const DifferenceTensor diff = PairDifference(ref, deg, head, config);
      result.heads[h] = {head.name, 100.0 * Forward(diff, params)};
    } catch (const DataError& e) {
      throw DataError("head '" + head.name + "': " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("head '" + head.name + "': " + e.what());
    }
  });
  double sum = 0.0;
  for (const HeadScore& s : result.heads) sum += s.score;
  result.score = sum / static_cast<double>(result.heads.size());
  return result;
}

}  // namespace spatialq
