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

#ifndef SPATIALQ_CORPUS_H_
#define SPATIALQ_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "spatialq/sound_field.h"
#include "spatialq/trainer.h"

namespace spatialq {

inline constexpr size_t kLowpassTaps = 511;

// Linear-phase windowed-sinc low-pass (Hamming, kLowpassTaps taps, unit DC
// gain). Returns the taps.
std::vector<double> DesignLowpass(double cutoff_hz, int sample_rate);

// Applies DesignLowpass to every channel with the group delay removed, so
// the output stays sample-aligned with the input. A cutoff at or above
// 0.999 * Nyquist returns the input unchanged.
SoundFieldSignal DegradeLowpass(const SoundFieldSignal& signal,
                                double cutoff_hz);

// Zeroes every channel of degree above `keep_order`.
SoundFieldSignal DegradeOrderTruncate(const SoundFieldSignal& signal,
                                      int keep_order);

// Mid-tread quantization with step 2^(1 - bits), clipped to [-1, 1].
// 2 <= bits <= 24.
SoundFieldSignal DegradeBitcrush(const SoundFieldSignal& signal, int bits);

// Adds independent Gaussian noise to every channel, each with power
// P_W / 10^(snr_db / 10) where P_W is the mean square of ACN 0. An infinite
// SNR returns the input. Throws DataError("silent input") when W is zero.
SoundFieldSignal DegradeNoise(const SoundFieldSignal& signal, double snr_db,
                              uint64_t seed);

enum class ContentRecipe { kSpeech, kMusic, kAmbiance };

const char* RecipeName(ContentRecipe recipe);

enum class DegradationKind {
  kHiddenRef,
  kLowpass,
  kNoise,
  kBitcrush,
  kOrderTruncate,
};

struct ConditionSpec {
  std::string name;     // manifest condition, also the file suffix
  std::string family;   // labels must fall with severity inside a family
  int severity = 0;     // 0 = cleanest within the family
  double label = 0.0;   // synthetic proxy score, 0-100
  DegradationKind kind = DegradationKind::kHiddenRef;
  double parameter = 0.0;  // cutoff Hz, SNR dB, bits or kept order
};

// Hidden reference, low-pass 14k/7k, the 3.5 kHz anchor, two noise levels,
// two bit depths and truncation to order 0.
std::vector<ConditionSpec> DefaultConditions();

// Throws DataError unless labels strictly decrease with severity inside
// every family and names are unique.
void CheckLabelMonotonicity(std::span<const ConditionSpec> conditions);

struct CorpusSpec {
  int order = 1;
  int sample_rate = kCanonicalSampleRate;
  double duration_s = 2.0;
  // Each recipe is rendered in both scenes (anechoic and reverberant) this
  // many times with different seeds.
  size_t variants = 6;
  double reverb_rt60_s = 0.5;
  double level_db = -30.0;
  double ci95 = 5.0;
  size_t val_contents = 4;
  size_t test_contents = 4;
  uint64_t seed = 0;
  std::vector<ConditionSpec> conditions = DefaultConditions();

  size_t num_contents() const { return 3 * 2 * variants; }
};

// One synthetic reference recording, before degradation.
SoundFieldSignal SynthContent(ContentRecipe recipe, bool reverberant,
                              const CorpusSpec& spec, uint64_t seed);

// Writes out_dir/refs/*.wav, out_dir/degs/*.wav and out_dir/manifest.csv.
// Contents (not conditions) are assigned to splits. On failure every file
// written so far is removed. Returns the manifest path.
std::filesystem::path BuildCorpus(const CorpusSpec& spec,
                                  const std::filesystem::path& out_dir,
                                  size_t threads = 1);

}  // namespace spatialq

#endif  // SPATIALQ_CORPUS_H_
