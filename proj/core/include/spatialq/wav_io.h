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

#ifndef SPATIALQ_WAV_IO_H_
#define SPATIALQ_WAV_IO_H_

#include <filesystem>
#include <vector>

namespace spatialq {

// Deinterleaved multichannel audio, [channel][sample].
struct WavAudio {
  int sample_rate = 0;
  std::vector<std::vector<double>> channels;

  size_t num_frames() const {
    return channels.empty() ? 0 : channels.front().size();
  }
};

// Reads RIFF/WAVE files with IEEE float (32/64 bit) or integer PCM
// (16/24/32 bit) samples, plain or WAVE_FORMAT_EXTENSIBLE. Throws DataError.
WavAudio ReadWav(const std::filesystem::path& path);

// Writes 32-bit IEEE float. More than two channels use
// WAVE_FORMAT_EXTENSIBLE with a zero channel mask. Output bytes are a pure
// function of the input.
void WriteWav(const std::filesystem::path& path, const WavAudio& audio);

}  // namespace spatialq

#endif  // SPATIALQ_WAV_IO_H_
