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

#include "spatialq/features.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "binary_io.h"
#include "spatialq/diffuseness.h"
#include "spatialq/errors.h"

namespace spatialq {

namespace {

constexpr uint32_t kGridVersion = 1;

void CheckFinite(const Tensor3& t) {
  for (double v : t.flat()) {
    if (!std::isfinite(v)) throw NumericalError("non-finite features");
  }
}

}  // namespace

FeatureGrid ComputeFeatureGrid(const BinauralSignal& binaural,
                               const SoundFieldSignal& field,
                               const AnalysisConfig& config) {
  const int rate = binaural.sample_rate;
  config.Validate(rate);
  if (binaural.left.size() != binaural.right.size()) {
    throw DataError("binaural channels differ in length");
  }
  if (config.include_diffuseness &&
      (field.sample_rate() != rate ||
       field.num_samples() != binaural.num_samples())) {
    throw DataError("binaural and ambisonic signals differ in rate or length");
  }

  const Spectrogram left = Stft(binaural.left, config, rate);
  const Spectrogram right = Stft(binaural.right, config, rate);
  const BandPlan plan = ErbBandPlan(config, rate);
  const size_t per_frame = config.HopsPerFrame();
  const size_t hops = left.num_frames();
  const size_t frames = (hops + per_frame - 1) / per_frame;
  const size_t bands = plan.num_bands();

  FeatureGrid grid;
  grid.config = config;
  grid.values = Tensor3(config.FeatureCount(), bands, frames);
  for (size_t t = 0; t < frames; ++t) {
    const size_t h0 = t * per_frame;
    const size_t h1 = std::min(hops, h0 + per_frame);
    for (size_t b = 0; b < bands; ++b) {
      const auto [k0, k1] = plan.bin_ranges[b];
      double el = 0.0, er = 0.0;
      std::complex<double> cross = 0.0;
      for (size_t h = h0; h < h1; ++h) {
        const auto lf = left.frame(h);
        const auto rf = right.frame(h);
        for (size_t k = k0; k < k1; ++k) {
          el += std::norm(lf[k]);
          er += std::norm(rf[k]);
          cross += lf[k] * std::conj(rf[k]);
        }
      }
      const double cells = static_cast<double>((h1 - h0) * (k1 - k0));
      const double mean_l = el / cells;
      const double mean_r = er / cells;
      grid.values(kEnvelope, b, t) =
          10.0 * std::log10(kEpsilon + 0.5 * (mean_l + mean_r)) /
          config.envelope_scale_db;
      const double ild = 10.0 * std::log10((mean_l + kEpsilon) /
                                           (mean_r + kEpsilon));
      grid.values(kIld, b, t) =
          std::clamp(ild, -config.ild_clamp_db, config.ild_clamp_db) /
          config.ild_scale_db;
      grid.values(kCoherence, b, t) = std::min(
          1.0, std::abs(cross) / std::sqrt(el * er + kEpsilon));
    }
  }
  if (config.include_diffuseness) {
    const std::vector<TfFrame> tf = FoaTfFrames(field, config);
    const DiffusenessGrid psi = ComputeDiffusenessGrid(
        tf, config.hop_s, config.diffuseness_tau_s, plan, per_frame);
    if (psi.num_frames() != frames || psi.num_bands() != bands) {
      throw DataError("diffuseness grid does not match the binaural grid");
    }
    for (size_t b = 0; b < bands; ++b) {
      std::copy(psi.values[b].begin(), psi.values[b].end(),
                grid.values.row(kDiffuseness, b).begin());
    }
  }
  CheckFinite(grid.values);
  return grid;
}

DifferenceTensor FeatureDifference(const FeatureGrid& ref,
                                   const FeatureGrid& deg) {
  if (ref.num_features() != deg.num_features() ||
      ref.num_bands() != deg.num_bands() ||
      ref.config.frame_duration_s != deg.config.frame_duration_s) {
    throw DataError("unaligned pair: feature grids differ in shape or config");
  }
  const size_t a = ref.num_frames(), b = deg.num_frames();
  if ((a > b ? a - b : b - a) > 1) {
    throw DataError("unaligned pair: " + std::to_string(a) + " vs " +
                    std::to_string(b) + " frames");
  }
  const size_t frames = std::min(a, b);
  DifferenceTensor diff;
  diff.values = Tensor3(ref.num_features(), ref.num_bands(), frames);
  for (size_t f = 0; f < ref.num_features(); ++f) {
    for (size_t k = 0; k < ref.num_bands(); ++k) {
      const auto r = ref.values.row(f, k);
      const auto d = deg.values.row(f, k);
      auto out = diff.values.row(f, k);
      for (size_t t = 0; t < frames; ++t) {
        const double delta = r[t] - d[t];
        out[t] = delta * delta;
      }
    }
  }
  return diff;
}

DifferenceTensor PairDifference(const SoundFieldSignal& ref,
                                const SoundFieldSignal& deg,
                                const RenderFilterSet& head,
                                const AnalysisConfig& config) {
  if (ref.sample_rate() != deg.sample_rate()) {
    throw DataError("reference and degraded sample rates differ");
  }
  const FeatureGrid ref_grid =
      ComputeFeatureGrid(RenderBinaural(ref, head), ref, config);
  const FeatureGrid deg_grid =
      ComputeFeatureGrid(RenderBinaural(deg, head), deg, config);
  return FeatureDifference(ref_grid, deg_grid);
}

void SaveFeatureGrid(const std::filesystem::path& path,
                     const FeatureGrid& grid) {
  internal::ByteWriter w;
  w.Tag("QFTG");
  w.U32(kGridVersion);
  w.U32(static_cast<uint32_t>(grid.num_bands()));
  w.U32(static_cast<uint32_t>(grid.num_features()));
  w.U32(static_cast<uint32_t>(grid.num_frames()));
  w.U32(static_cast<uint32_t>(std::llround(grid.config.frame_duration_s * 1e6)));
  for (double v : grid.values.flat()) w.F32(static_cast<float>(v));
  w.WriteTo(path);
}

FeatureGrid LoadFeatureGrid(const std::filesystem::path& path) {
  internal::ByteReader r(path, "incompatible feature grid " + path.string());
  if (!r.Tag("QFTG")) r.Fail("bad magic");
  if (r.U32() != kGridVersion) r.Fail("unsupported version");
  const uint32_t bands = r.U32();
  const uint32_t features = r.U32();
  const uint32_t frames = r.U32();
  const uint32_t frame_us = r.U32();
  if (features != 3 && features != 4) r.Fail("feature count must be 3 or 4");
  if (bands == 0 || frame_us == 0) r.Fail("empty shape");
  if (r.remaining() != 4ull * bands * features * frames) {
    r.Fail("payload size does not match header");
  }
  FeatureGrid grid;
  grid.config.band_count = bands;
  grid.config.include_diffuseness = features == 4;
  grid.config.frame_duration_s = frame_us * 1e-6;
  grid.values = Tensor3(features, bands, frames);
  for (double& v : grid.values.flat()) v = r.F32();
  return grid;
}

}  // namespace spatialq
