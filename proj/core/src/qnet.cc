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

#include "spatialq/qnet.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "binary_io.h"
#include "spatialq/errors.h"

namespace spatialq {

namespace {

constexpr uint32_t kModelVersion = 1;
constexpr uint32_t kModeWeightingMask = 0xFF;
constexpr uint32_t kModeNoPreWeighting = 1u << 8;

constexpr size_t kC1 = kConvChannels[0];
constexpr size_t kC2 = kConvChannels[1];
constexpr size_t kC3 = kConvChannels[2];

uint64_t Fingerprint(const ModelParams& params) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 1099511628211ull;
    }
  };
  const NetConfig& c = params.config();
  mix(c.feature_count);
  mix(c.band_count);
  mix(c.hidden_dim);
  mix(static_cast<uint64_t>(c.frequency_weighting));
  mix(c.pre_weighting);
  mix(std::bit_cast<uint64_t>(c.leaky_slope));
  for (double v : params.values()) mix(std::bit_cast<uint64_t>(v));
  return h;
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Softmax of `x` scaled by `alpha`, max-subtracted.
std::vector<double> ScaledSoftmax(std::span<const double> x, double alpha) {
  std::vector<double> p(x.size());
  double peak = -INFINITY;
  for (size_t i = 0; i < x.size(); ++i) peak = std::max(peak, alpha * x[i]);
  double sum = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    p[i] = std::exp(alpha * x[i] - peak);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

// Uniform double in [-limit, limit) from raw generator bits, independent of
// the standard library's distribution implementation.
double UniformSymmetric(std::mt19937_64& rng, double limit) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return limit * (2.0 * u - 1.0);
}

}  // namespace

void NetConfig::Validate() const {
  if (feature_count != 3 && feature_count != 4) {
    throw DataError("feature_count must be 3 or 4");
  }
  if (band_count < 1) throw DataError("band_count must be >= 1");
  if (hidden_dim < 1) throw DataError("hidden_dim must be >= 1");
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) {
    throw DataError("leaky_slope must be in [0, 1)");
  }
  if (frequency_weighting != FrequencyWeighting::kSoftmax &&
      frequency_weighting != FrequencyWeighting::kLinear) {
    throw DataError("unknown frequency weighting mode");
  }
  if (!(frame_duration_s > 0.0)) throw DataError("frame duration must be > 0");
}

AnalysisConfig AnalysisConfigFor(const NetConfig& net) {
  AnalysisConfig config;
  config.band_count = net.band_count;
  config.frame_duration_s = net.frame_duration_s;
  config.include_diffuseness = net.feature_count == 4;
  return config;
}

ParamLayout ParamLayout::For(const NetConfig& c) {
  const size_t f = c.feature_count, b = c.band_count, h = c.hidden_dim;
  ParamLayout layout;
  auto add = [&layout](const char* name, size_t size) {
    layout.groups.push_back({name, layout.total, size});
    layout.total += size;
  };
  add("pre_weight", f * b);
  add("conv1_w", kC1 * f);
  add("conv1_b", kC1);
  add("conv2_w", kC2 * kC1);
  add("conv2_b", kC2);
  add("conv3_w", kC3 * kC2);
  add("conv3_b", kC3);
  add("freq_logits", b);
  add("alpha", kC3);
  add("fc1_w", h * kC3);
  add("fc1_b", h);
  add("fc2_w", h);
  add("fc2_b", 1);
  return layout;
}

const ParamLayout::Group& ParamLayout::Find(const std::string& name) const {
  for (const Group& g : groups) {
    if (g.name == name) return g;
  }
  throw std::out_of_range("no parameter group " + name);
}

ModelParams::ModelParams(const NetConfig& config)
    : config_(config), layout_(ParamLayout::For(config)) {
  config.Validate();
  values_.assign(layout_.total, 0.0);
}

std::span<double> ModelParams::group(const std::string& name) {
  const auto& g = layout_.Find(name);
  return {values_.data() + g.offset, g.size};
}

std::span<const double> ModelParams::group(const std::string& name) const {
  const auto& g = layout_.Find(name);
  return {values_.data() + g.offset, g.size};
}

size_t ParameterCount(const NetConfig& config) {
  return ParamLayout::For(config).total;
}

size_t TrainableParameterCount(const NetConfig& config) {
  const size_t total = ParameterCount(config);
  return config.pre_weighting
             ? total
             : total - config.feature_count * config.band_count;
}

ModelParams InitParams(const NetConfig& config, uint64_t seed) {
  ModelParams params(config);
  std::mt19937_64 rng(seed);
  auto glorot = [&](const char* name, size_t fan_in, size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : params.group(name)) w = UniformSymmetric(rng, limit);
  };
  std::fill_n(params.group("pre_weight").begin(),
              params.group("pre_weight").size(), 1.0);
  glorot("conv1_w", config.feature_count, kC1);
  glorot("conv2_w", kC1, kC2);
  glorot("conv3_w", kC2, kC3);
  glorot("fc1_w", kC3, config.hidden_dim);
  glorot("fc2_w", config.hidden_dim, 1);
  if (config.frequency_weighting == FrequencyWeighting::kLinear) {
    for (double& w : params.group("freq_logits")) {
      w = 1.0 / static_cast<double>(config.band_count);
    }
  }
  return params;
}

double AutoPool(std::span<const double> x, double alpha) {
  const std::vector<double> p = ScaledSoftmax(x, alpha);
  double g = 0.0;
  for (size_t t = 0; t < x.size(); ++t) g += p[t] * x[t];
  return g;
}

double Forward(const DifferenceTensor& diff, const ModelParams& params,
               ForwardCache* cache) {
  const NetConfig& cfg = params.config();
  const Tensor3& x = diff.values;
  if (x.dim0() != cfg.feature_count || x.dim1() != cfg.band_count) {
    throw DataError("difference tensor shape [" + std::to_string(x.dim0()) +
                    "][" + std::to_string(x.dim1()) +
                    "] does not match the model");
  }
  if (x.dim2() < 1) throw DataError("difference tensor has no frames");
  for (double v : x.flat()) {
    if (!std::isfinite(v)) throw NumericalError("non-finite features");
  }
  const size_t nf = cfg.feature_count, nb = cfg.band_count, nt = x.dim2();
  const size_t nh = cfg.hidden_dim;
  const double slope = cfg.leaky_slope;
  auto lrelu = [slope](double z) { return z > 0.0 ? z : slope * z; };

  ForwardCache local;
  ForwardCache& c = cache != nullptr ? *cache : local;
  c.config = cfg;
  c.params_fingerprint = Fingerprint(params);
  c.input = x;
  c.z1 = Tensor3(kC1, nb, nt);
  c.a1 = Tensor3(kC1, nb, nt);
  c.z2 = Tensor3(kC2, nb, nt);
  c.a2 = Tensor3(kC2, nb, nt);
  c.z3 = Tensor3(kC3, nb, nt);
  c.a3 = Tensor3(kC3, nb, nt);

  const auto pw = params.group("pre_weight");
  const auto w1 = params.group("conv1_w");
  const auto b1 = params.group("conv1_b");
  const auto w2 = params.group("conv2_w");
  const auto b2 = params.group("conv2_b");
  const auto w3 = params.group("conv3_w");
  const auto b3 = params.group("conv3_b");

  double in[4], h1[kC1], h2[kC2];
  for (size_t b = 0; b < nb; ++b) {
    for (size_t t = 0; t < nt; ++t) {
      for (size_t f = 0; f < nf; ++f) {
        in[f] = (cfg.pre_weighting ? pw[f * nb + b] : 1.0) * x(f, b, t);
      }
      for (size_t k = 0; k < kC1; ++k) {
        double z = b1[k];
        for (size_t f = 0; f < nf; ++f) z += w1[k * nf + f] * in[f];
        c.z1(k, b, t) = z;
        h1[k] = c.a1(k, b, t) = lrelu(z);
      }
      for (size_t k = 0; k < kC2; ++k) {
        double z = b2[k];
        for (size_t j = 0; j < kC1; ++j) z += w2[k * kC1 + j] * h1[j];
        c.z2(k, b, t) = z;
        h2[k] = c.a2(k, b, t) = lrelu(z);
      }
      for (size_t k = 0; k < kC3; ++k) {
        double z = b3[k];
        for (size_t j = 0; j < kC2; ++j) z += w3[k * kC2 + j] * h2[j];
        c.z3(k, b, t) = z;
        c.a3(k, b, t) = lrelu(z);
      }
    }
  }

  const auto logits = params.group("freq_logits");
  if (cfg.frequency_weighting == FrequencyWeighting::kSoftmax) {
    c.band_weights = ScaledSoftmax(logits, 1.0);
  } else {
    c.band_weights.assign(logits.begin(), logits.end());
  }
  c.pooled.assign(kC3, std::vector<double>(nt, 0.0));
  for (size_t k = 0; k < kC3; ++k) {
    for (size_t b = 0; b < nb; ++b) {
      const double wb = c.band_weights[b];
      const auto row = c.a3.row(k, b);
      for (size_t t = 0; t < nt; ++t) c.pooled[k][t] += wb * row[t];
    }
  }

  const auto alpha = params.group("alpha");
  c.time_weights.resize(kC3);
  c.g.assign(kC3, 0.0);
  for (size_t k = 0; k < kC3; ++k) {
    c.time_weights[k] = ScaledSoftmax(c.pooled[k], alpha[k]);
    for (size_t t = 0; t < nt; ++t) {
      c.g[k] += c.time_weights[k][t] * c.pooled[k][t];
    }
  }

  const auto fw1 = params.group("fc1_w");
  const auto fb1 = params.group("fc1_b");
  const auto fw2 = params.group("fc2_w");
  c.h1.assign(nh, 0.0);
  c.a_fc1.assign(nh, 0.0);
  double logit = params.group("fc2_b")[0];
  for (size_t i = 0; i < nh; ++i) {
    double z = fb1[i];
    for (size_t k = 0; k < kC3; ++k) z += fw1[i * kC3 + k] * c.g[k];
    c.h1[i] = z;
    c.a_fc1[i] = lrelu(z);
    logit += fw2[i] * c.a_fc1[i];
  }
  c.logit = logit;
  c.score01 = Sigmoid(logit);
  if (!std::isfinite(c.score01)) throw NumericalError("non-finite score");
  return c.score01;
}

ParamGrads Backward(const ForwardCache& c, const ModelParams& params,
                    double dloss_dscore) {
  const NetConfig& cfg = params.config();
  if (!(c.config == cfg) || c.params_fingerprint != Fingerprint(params)) {
    throw DataError("forward cache does not belong to these parameters");
  }
  const size_t nf = cfg.feature_count, nb = cfg.band_count;
  const size_t nt = c.input.dim2(), nh = cfg.hidden_dim;
  if (c.a3.dim2() != nt || c.pooled.size() != kC3) {
    throw DataError("forward cache is incomplete");
  }
  const double slope = cfg.leaky_slope;
  auto dlrelu = [slope](double z) { return z > 0.0 ? 1.0 : slope; };

  ParamGrads grads(cfg);
  const double dlogit = dloss_dscore * c.score01 * (1.0 - c.score01);

  // Dense head.
  const auto fw1 = params.group("fc1_w");
  const auto fw2 = params.group("fc2_w");
  auto d_fw1 = grads.group("fc1_w");
  auto d_fb1 = grads.group("fc1_b");
  auto d_fw2 = grads.group("fc2_w");
  grads.group("fc2_b")[0] = dlogit;
  std::vector<double> dg(kC3, 0.0);
  for (size_t i = 0; i < nh; ++i) {
    d_fw2[i] = dlogit * c.a_fc1[i];
    const double dh = dlogit * fw2[i] * dlrelu(c.h1[i]);
    d_fb1[i] = dh;
    for (size_t k = 0; k < kC3; ++k) {
      d_fw1[i * kC3 + k] = dh * c.g[k];
      dg[k] += dh * fw1[i * kC3 + k];
    }
  }

  // Auto-pool: dg/dH_t = p_t (1 + alpha (H_t - g)),
  //            dg/dalpha = sum_t p_t H_t (H_t - g).
  const auto alpha = params.group("alpha");
  auto d_alpha = grads.group("alpha");
  std::vector<std::vector<double>> dpooled(kC3, std::vector<double>(nt));
  for (size_t k = 0; k < kC3; ++k) {
    double da = 0.0;
    for (size_t t = 0; t < nt; ++t) {
      const double p = c.time_weights[k][t];
      const double centred = c.pooled[k][t] - c.g[k];
      dpooled[k][t] = dg[k] * p * (1.0 + alpha[k] * centred);
      da += p * c.pooled[k][t] * centred;
    }
    d_alpha[k] = dg[k] * da;
  }

  // Frequency pooling.
  std::vector<double> dweights(nb, 0.0);
  Tensor3 dz3(kC3, nb, nt);
  for (size_t k = 0; k < kC3; ++k) {
    for (size_t b = 0; b < nb; ++b) {
      const double wb = c.band_weights[b];
      const auto a3 = c.a3.row(k, b);
      const auto z3 = c.z3.row(k, b);
      auto out = dz3.row(k, b);
      double acc = 0.0;
      for (size_t t = 0; t < nt; ++t) {
        acc += dpooled[k][t] * a3[t];
        out[t] = dpooled[k][t] * wb * dlrelu(z3[t]);
      }
      dweights[b] += acc;
    }
  }
  auto d_logits = grads.group("freq_logits");
  if (cfg.frequency_weighting == FrequencyWeighting::kSoftmax) {
    double dot = 0.0;
    for (size_t b = 0; b < nb; ++b) dot += c.band_weights[b] * dweights[b];
    for (size_t b = 0; b < nb; ++b) {
      d_logits[b] = c.band_weights[b] * (dweights[b] - dot);
    }
  } else {
    std::copy(dweights.begin(), dweights.end(), d_logits.begin());
  }

  // Point-wise convolutions, cell by cell.
  const auto pw = params.group("pre_weight");
  const auto w1 = params.group("conv1_w");
  const auto w2 = params.group("conv2_w");
  const auto w3 = params.group("conv3_w");
  auto d_pw = grads.group("pre_weight");
  auto d_w1 = grads.group("conv1_w");
  auto d_b1 = grads.group("conv1_b");
  auto d_w2 = grads.group("conv2_w");
  auto d_b2 = grads.group("conv2_b");
  auto d_w3 = grads.group("conv3_w");
  auto d_b3 = grads.group("conv3_b");
  double dz2[kC2], dz1[kC1], in[4];
  for (size_t b = 0; b < nb; ++b) {
    for (size_t t = 0; t < nt; ++t) {
      for (size_t j = 0; j < kC2; ++j) dz2[j] = 0.0;
      for (size_t k = 0; k < kC3; ++k) {
        const double d = dz3(k, b, t);
        if (d == 0.0) continue;
        d_b3[k] += d;
        for (size_t j = 0; j < kC2; ++j) {
          d_w3[k * kC2 + j] += d * c.a2(j, b, t);
          dz2[j] += d * w3[k * kC2 + j];
        }
      }
      for (size_t j = 0; j < kC1; ++j) dz1[j] = 0.0;
      for (size_t k = 0; k < kC2; ++k) {
        const double d = dz2[k] * dlrelu(c.z2(k, b, t));
        if (d == 0.0) continue;
        d_b2[k] += d;
        for (size_t j = 0; j < kC1; ++j) {
          d_w2[k * kC1 + j] += d * c.a1(j, b, t);
          dz1[j] += d * w2[k * kC1 + j];
        }
      }
      for (size_t f = 0; f < nf; ++f) {
        in[f] = (cfg.pre_weighting ? pw[f * nb + b] : 1.0) * c.input(f, b, t);
      }
      double dx1[4] = {0.0, 0.0, 0.0, 0.0};
      for (size_t k = 0; k < kC1; ++k) {
        const double d = dz1[k] * dlrelu(c.z1(k, b, t));
        if (d == 0.0) continue;
        d_b1[k] += d;
        for (size_t f = 0; f < nf; ++f) {
          d_w1[k * nf + f] += d * in[f];
          dx1[f] += d * w1[k * nf + f];
        }
      }
      if (cfg.pre_weighting) {
        for (size_t f = 0; f < nf; ++f) d_pw[f * nb + b] += dx1[f] * c.input(f, b, t);
      }
    }
  }
  return grads;
}

void SaveParams(const ModelParams& params, const std::filesystem::path& path) {
  const NetConfig& cfg = params.config();
  internal::ByteWriter w;
  w.Tag("QSTA");
  w.U32(kModelVersion);
  w.U32(static_cast<uint32_t>(cfg.feature_count));
  w.U32(static_cast<uint32_t>(cfg.band_count));
  w.U32(static_cast<uint32_t>(std::llround(cfg.frame_duration_s * 1000.0)));
  uint32_t mode = static_cast<uint32_t>(cfg.frequency_weighting);
  if (!cfg.pre_weighting) mode |= kModeNoPreWeighting;
  w.U32(mode);
  for (double v : params.values()) w.F32(static_cast<float>(v));
  w.WriteTo(path);
}

ModelParams LoadParams(const std::filesystem::path& path) {
  internal::ByteReader r(path, "incompatible model file " + path.string());
  if (!r.Tag("QSTA")) r.Fail("bad magic");
  if (r.U32() != kModelVersion) r.Fail("unsupported version");
  NetConfig cfg;
  cfg.feature_count = r.U32();
  cfg.band_count = r.U32();
  const uint32_t frame_ms = r.U32();
  const uint32_t mode = r.U32();
  if (cfg.feature_count != 3 && cfg.feature_count != 4) {
    r.Fail("feature count must be 3 or 4");
  }
  if (cfg.band_count == 0 || frame_ms == 0) r.Fail("empty shape");
  if ((mode & ~(kModeWeightingMask | kModeNoPreWeighting)) != 0 ||
      (mode & kModeWeightingMask) > 1) {
    r.Fail("unknown mode bits");
  }
  cfg.frame_duration_s = frame_ms / 1000.0;
  cfg.frequency_weighting =
      static_cast<FrequencyWeighting>(mode & kModeWeightingMask);
  cfg.pre_weighting = (mode & kModeNoPreWeighting) == 0;
  ModelParams params(cfg);
  if (r.remaining() != 4 * params.size()) {
    r.Fail("parameter payload does not match the header shape");
  }
  for (double& v : params.values()) {
    v = r.F32();
    if (!std::isfinite(v)) r.Fail("non-finite parameter");
  }
  return params;
}

ModelParams LoadParams(const std::filesystem::path& path,
                       const NetConfig& expected) {
  ModelParams params = LoadParams(path);
  const NetConfig& got = params.config();
  if (got.feature_count != expected.feature_count ||
      got.band_count != expected.band_count ||
      got.frame_duration_s != expected.frame_duration_s ||
      got.frequency_weighting != expected.frequency_weighting ||
      got.pre_weighting != expected.pre_weighting) {
    throw DataError("incompatible model file " + path.string() +
                    ": stored F=" + std::to_string(got.feature_count) +
                    " B=" + std::to_string(got.band_count) +
                    ", pipeline expects F=" +
                    std::to_string(expected.feature_count) +
                    " B=" + std::to_string(expected.band_count));
  }
  return params;
}

}  // namespace spatialq
