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

#include "spatialq/binaural.h"

#include <algorithm>
#include <complex>
#include <string>

#include "spatialq/errors.h"
#include "spatialq/fft.h"
#include "spatialq/wav_io.h"

namespace spatialq {

namespace {

// Below this length the direct sum is cheaper than FFT overlap-add.
constexpr size_t kDirectConvolutionMaxTaps = 32;

void AccumulateDirect(std::span<const double> x, std::span<const double> h,
                      std::vector<double>& out) {
  const size_t n = out.size();
  for (size_t k = 0; k < h.size(); ++k) {
    const double g = h[k];
    if (g == 0.0) continue;
    for (size_t i = k; i < n; ++i) out[i] += g * x[i - k];
  }
}

}  // namespace

void RenderFilterSet::Validate() const {
  const int channels = NumAmbisonicChannels(order);
  if (order < 0 || taps.size() != 2) {
    throw DataError("malformed filter set: need two ears");
  }
  if (sample_rate <= 0) throw DataError("malformed filter set: bad rate");
  for (const auto& ear : taps) {
    if (static_cast<int>(ear.size()) != channels) {
      throw DataError("malformed filter set: channel count does not match "
                      "order " + std::to_string(order));
    }
    for (const auto& h : ear) {
      if (h.empty() || h.size() != taps[0][0].size()) {
        throw DataError("malformed filter set: tap counts differ");
      }
    }
  }
}

RenderFilterSet LoadFilterSet(const std::filesystem::path& path) {
  WavAudio audio = ReadWav(path);
  const int total = static_cast<int>(audio.channels.size());
  const int order = total % 2 == 0 ? OrderFromChannelCount(total / 2) : -1;
  if (order < 0) {
    throw DataError("malformed filter set: " + path.string() + " has " +
                    std::to_string(total) + " channels, expected 2(L+1)^2");
  }
  if (audio.num_frames() == 0) {
    throw DataError("malformed filter set: " + path.string() + " is empty");
  }
  const int per_ear = NumAmbisonicChannels(order);
  RenderFilterSet set;
  set.name = path.stem().string();
  set.sample_rate = audio.sample_rate;
  set.order = order;
  set.taps.resize(2);
  for (int ear = 0; ear < 2; ++ear) {
    for (int c = 0; c < per_ear; ++c) {
      set.taps[ear].push_back(std::move(audio.channels[ear * per_ear + c]));
    }
  }
  set.Validate();
  return set;
}

void SaveFilterSet(const std::filesystem::path& path,
                   const RenderFilterSet& filters) {
  filters.Validate();
  WavAudio audio;
  audio.sample_rate = filters.sample_rate;
  for (const auto& ear : filters.taps) {
    for (const auto& h : ear) audio.channels.push_back(h);
  }
  WriteWav(path, audio);
}

std::vector<RenderFilterSet> LoadHeads(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw DataError("filter directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) {
              return a.filename().string() < b.filename().string();
            });
  if (files.empty()) {
    throw DataError("no filter sets (*.wav) in " + dir.string());
  }
  if (files.size() > kMaxHeads) files.resize(kMaxHeads);
  std::vector<RenderFilterSet> heads;
  heads.reserve(files.size());
  for (const auto& f : files) heads.push_back(LoadFilterSet(f));
  return heads;
}

RenderFilterSet BuiltinCardioidHead(int order, int sample_rate) {
  if (order < 1) throw DataError("cardioid head needs order >= 1");
  RenderFilterSet set;
  set.name = "builtin-cardioid";
  set.sample_rate = sample_rate;
  set.order = order;
  const int channels = NumAmbisonicChannels(order);
  set.taps.assign(2, std::vector<std::vector<double>>(
                         channels, std::vector<double>(1, 0.0)));
  // ACN 0 = W, ACN 1 = Y (left-right axis).
  set.taps[0][0][0] = 0.5;
  set.taps[0][1][0] = 0.5;
  set.taps[1][0][0] = 0.5;
  set.taps[1][1][0] = -0.5;
  return set;
}

BinauralSignal RenderBinaural(const SoundFieldSignal& signal,
                              const RenderFilterSet& filters) {
  filters.Validate();
  if (signal.order() > filters.order) {
    throw DataError("signal order " + std::to_string(signal.order()) +
                    " exceeds filter set '" + filters.name + "' order " +
                    std::to_string(filters.order));
  }
  if (signal.sample_rate() != filters.sample_rate) {
    throw DataError("sample rate mismatch: signal " +
                    std::to_string(signal.sample_rate()) + " Hz, filter set '" +
                    filters.name + "' " + std::to_string(filters.sample_rate) +
                    " Hz");
  }
  const size_t n = signal.num_samples();
  const int channels = signal.num_channels();
  BinauralSignal out;
  out.sample_rate = signal.sample_rate();
  out.left.assign(n, 0.0);
  out.right.assign(n, 0.0);
  if (n == 0) return out;
  const size_t taps = filters.num_taps();

  if (taps <= kDirectConvolutionMaxTaps) {
    for (int c = 0; c < channels; ++c) {
      AccumulateDirect(signal.channel(c), filters.taps[0][c], out.left);
      AccumulateDirect(signal.channel(c), filters.taps[1][c], out.right);
    }
    return out;
  }

  // Overlap-add; channel spectra are summed per ear before one inverse FFT.
  const size_t fft_size = NextPowerOfTwo(std::max<size_t>(2 * taps, 1024));
  const size_t block = fft_size - taps + 1;
  const RealFft fft(fft_size);
  const size_t bins = fft.num_bins();
  std::vector<double> buf(fft_size, 0.0);
  std::vector<std::vector<std::complex<double>>> response[2];
  for (int ear = 0; ear < 2; ++ear) {
    response[ear].assign(channels, std::vector<std::complex<double>>(bins));
    for (int c = 0; c < channels; ++c) {
      std::fill(buf.begin(), buf.end(), 0.0);
      std::copy(filters.taps[ear][c].begin(), filters.taps[ear][c].end(),
                buf.begin());
      fft.Forward(buf, response[ear][c]);
    }
  }
  std::vector<std::complex<double>> spec(bins);
  std::vector<std::complex<double>> acc[2] = {
      std::vector<std::complex<double>>(bins),
      std::vector<std::complex<double>>(bins)};
  std::vector<double>* ears[2] = {&out.left, &out.right};
  for (size_t start = 0; start < n; start += block) {
    const size_t len = std::min(block, n - start);
    std::fill(acc[0].begin(), acc[0].end(), 0.0);
    std::fill(acc[1].begin(), acc[1].end(), 0.0);
    for (int c = 0; c < channels; ++c) {
      const auto x = signal.channel(c);
      std::fill(buf.begin(), buf.end(), 0.0);
      std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(start), len,
                  buf.begin());
      fft.Forward(buf, spec);
      for (int ear = 0; ear < 2; ++ear) {
        const auto& h = response[ear][c];
        for (size_t k = 0; k < bins; ++k) acc[ear][k] += spec[k] * h[k];
      }
    }
    const size_t end = std::min(n, start + fft_size);
    for (int ear = 0; ear < 2; ++ear) {
      fft.Inverse(acc[ear], buf);
      std::vector<double>& y = *ears[ear];
      for (size_t i = start; i < end; ++i) y[i] += buf[i - start];
    }
  }
  return out;
}

}  // namespace spatialq
