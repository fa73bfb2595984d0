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

#include "spatialq/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <system_error>
#include <utility>

#include "spatialq/errors.h"
#include "spatialq/fft.h"
#include "spatialq/parallel.h"

namespace spatialq {

namespace {

uint64_t Mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t seed, uint64_t a, uint64_t b = 0) {
  return Mix(Mix(Mix(seed) ^ a) ^ b);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::vector<double> GaussianNoise(size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = gauss(rng);
  return out;
}

// Two-pole resonator, unit peak gain roughly.
std::vector<double> Resonate(std::span<const double> x, double freq_hz,
                             double bandwidth_hz, int rate) {
  const double r = std::exp(-std::numbers::pi * bandwidth_hz / rate);
  const double theta = 2.0 * std::numbers::pi * freq_hz / rate;
  const double a1 = 2.0 * r * std::cos(theta), a2 = -r * r;
  const double gain = 1.0 - r;
  std::vector<double> y(x.size());
  double y1 = 0.0, y2 = 0.0;
  for (size_t n = 0; n < x.size(); ++n) {
    const double v = gain * x[n] + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = v;
    y[n] = v;
  }
  return y;
}

// First difference: white noise tilted up, for sibilance and cymbals.
std::vector<double> Bright(std::span<const double> x) {
  std::vector<double> y(x.size());
  for (size_t n = 0; n < x.size(); ++n) y[n] = x[n] - (n ? x[n - 1] : 0.0);
  return y;
}

double Rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : std::sqrt(acc / x.size());
}

void ScaleTo(std::vector<double>& x, double rms) {
  const double cur = Rms(x);
  if (cur > 0.0) {
    for (double& v : x) v *= rms / cur;
  }
}

struct Source {
  std::vector<double> signal;
  double azimuth_deg;
  double elevation_deg;
};

std::vector<double> SpeechSource(size_t n, int rate, std::mt19937_64& rng) {
  const std::vector<double> noise = GaussianNoise(n, rng);
  const std::vector<double> f1 =
      Resonate(noise, Uniform(rng, 400, 800), 120, rate);
  const std::vector<double> f2 =
      Resonate(noise, Uniform(rng, 1200, 2400), 200, rate);
  const std::vector<double> hiss = Bright(GaussianNoise(n, rng));
  const double syllable_hz = Uniform(rng, 3.0, 5.0);
  const double phase = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double s = std::sin(2.0 * std::numbers::pi * syllable_hz * t + phase);
    const double voiced = std::pow(std::max(0.0, s), 1.5);
    const double fricative = std::pow(std::max(0.0, -s), 4.0);
    out[i] = voiced * (f1[i] + 0.6 * f2[i]) + 0.02 * fricative * hiss[i];
  }
  return out;
}

std::vector<double> MusicSource(size_t n, int rate, std::mt19937_64& rng) {
  std::vector<double> out(n, 0.0);
  const double note_s = Uniform(rng, 0.2, 0.5);
  const size_t note_len = std::max<size_t>(1, static_cast<size_t>(note_s * rate));
  static constexpr int kScale[] = {0, 2, 4, 7, 9, 12, 14, 16, 19, 21};
  const double root = Uniform(rng, 110.0, 220.0);
  const double nyquist = 0.5 * rate;
  for (size_t start = 0; start < n; start += note_len) {
    const int step = kScale[rng() % std::size(kScale)];
    const double f0 = root * std::pow(2.0, step / 12.0);
    const size_t stop = std::min(n, start + note_len);
    for (int k = 1; k <= 40 && k * f0 < nyquist; ++k) {
      const double amp = 1.0 / k;
      const double ph = Uniform(rng, 0.0, 2.0 * std::numbers::pi);
      for (size_t i = start; i < stop; ++i) {
        const double t = static_cast<double>(i - start) / rate;
        const double decay = std::exp(-t * (2.0 + 0.3 * k));
        out[i] += amp * decay * std::sin(2.0 * std::numbers::pi * k * f0 * t + ph);
      }
    }
  }
  // Cymbal-like bright bursts on every other note.
  const std::vector<double> hiss = Bright(GaussianNoise(n, rng));
  for (size_t start = 0; start < n; start += 2 * note_len) {
    for (size_t i = start; i < std::min(n, start + note_len); ++i) {
      const double t = static_cast<double>(i - start) / rate;
      out[i] += 0.15 * std::exp(-t * 12.0) * hiss[i];
    }
  }
  return out;
}

std::vector<double> TransientSource(size_t n, int rate, std::mt19937_64& rng) {
  std::vector<double> out(n, 0.0);
  const std::vector<double> noise = GaussianNoise(n, rng);
  size_t pos = static_cast<size_t>(Uniform(rng, 0.0, 0.2) * rate);
  while (pos < n) {
    const double decay = Uniform(rng, 30.0, 120.0);
    const double gain = Uniform(rng, 0.5, 1.0);
    for (size_t i = pos; i < std::min(n, pos + rate / 10); ++i) {
      out[i] += gain * std::exp(-decay * (i - pos) / rate) * noise[i];
    }
    pos += static_cast<size_t>(Uniform(rng, 0.15, 0.45) * rate);
  }
  return out;
}

void AddPlaneWave(std::vector<std::vector<double>>& channels,
                  std::span<const double> source, double azimuth_deg,
                  double elevation_deg, int order) {
  const std::vector<double> y = Sn3dHarmonics(order, azimuth_deg, elevation_deg);
  for (size_t c = 0; c < channels.size(); ++c) {
    for (size_t i = 0; i < source.size(); ++i) channels[c][i] += y[c] * source[i];
  }
}

// Exponentially decaying noise tails from random directions, fed by the
// dry mix. Total tail power is about half the dry power.
void AddReverbTail(std::vector<std::vector<double>>& channels,
                   std::span<const double> dry, const CorpusSpec& spec,
                   std::mt19937_64& rng) {
  constexpr int kDirections = 16;
  const int rate = spec.sample_rate;
  const size_t length = static_cast<size_t>(spec.reverb_rt60_s * rate);
  const size_t predelay = static_cast<size_t>(0.005 * rate);
  const double decay = std::log(1000.0) / static_cast<double>(length);
  const double gain = std::sqrt(0.5 * 2.0 * decay / kDirections);
  for (int d = 0; d < kDirections; ++d) {
    const double z = Uniform(rng, -1.0, 1.0);
    const double azimuth = Uniform(rng, -180.0, 180.0);
    const double elevation = std::asin(z) * 180.0 / std::numbers::pi;
    std::vector<double> ir(predelay + length, 0.0);
    const std::vector<double> noise = GaussianNoise(length, rng);
    for (size_t i = 0; i < length; ++i) {
      ir[predelay + i] = gain * noise[i] * std::exp(-decay * i);
    }
    const std::vector<double> wet = ConvolveTruncated(dry, ir);
    AddPlaneWave(channels, wet, azimuth, elevation, spec.order);
  }
}

struct Content {
  std::string name;
  ContentRecipe recipe;
  bool reverberant;
  uint64_t seed;
};

std::string ContentName(size_t index, ContentRecipe recipe, bool reverberant) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "c%02zu_%s%s", index, RecipeName(recipe),
                reverberant ? "_rev" : "");
  return buf;
}

SoundFieldSignal ApplyCondition(const SoundFieldSignal& ref,
                                const ConditionSpec& c, uint64_t seed) {
  switch (c.kind) {
    case DegradationKind::kHiddenRef:
      return ref;
    case DegradationKind::kLowpass:
      return DegradeLowpass(ref, c.parameter);
    case DegradationKind::kNoise:
      return DegradeNoise(ref, c.parameter, seed);
    case DegradationKind::kBitcrush:
      return DegradeBitcrush(ref, static_cast<int>(c.parameter));
    case DegradationKind::kOrderTruncate:
      return DegradeOrderTruncate(ref, static_cast<int>(c.parameter));
  }
  throw DataError("unknown degradation");
}

}  // namespace

std::vector<double> DesignLowpass(double cutoff_hz, int sample_rate) {
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < 0.5 * sample_rate)) {
    throw DataError("cutoff must lie in (0, Nyquist)");
  }
  constexpr int kHalf = static_cast<int>(kLowpassTaps / 2);
  const double fc = cutoff_hz / sample_rate;
  std::vector<double> taps(kLowpassTaps);
  double sum = 0.0;
  for (int i = 0; i < static_cast<int>(kLowpassTaps); ++i) {
    const int m = i - kHalf;
    const double sinc =
        m == 0 ? 2.0 * fc
               : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
    const double window =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (kLowpassTaps - 1));
    taps[i] = sinc * window;
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

SoundFieldSignal DegradeLowpass(const SoundFieldSignal& signal,
                                double cutoff_hz) {
  const double nyquist = 0.5 * signal.sample_rate();
  if (!(cutoff_hz > 0.0)) throw DataError("cutoff must be positive");
  if (cutoff_hz >= 0.999 * nyquist) return signal;
  const std::vector<double> taps = DesignLowpass(cutoff_hz, signal.sample_rate());
  const size_t delay = kLowpassTaps / 2;
  const size_t n = signal.num_samples();
  std::vector<std::vector<double>> out(signal.num_channels());
  std::vector<double> padded(n + delay, 0.0);
  for (int c = 0; c < signal.num_channels(); ++c) {
    std::copy(signal.channel(c).begin(), signal.channel(c).end(), padded.begin());
    const std::vector<double> y = ConvolveTruncated(padded, taps);
    out[c].assign(y.begin() + delay, y.end());
  }
  return SoundFieldSignal(std::move(out), signal.sample_rate(), signal.order());
}

SoundFieldSignal DegradeOrderTruncate(const SoundFieldSignal& signal,
                                      int keep_order) {
  if (keep_order < 0 || keep_order > signal.order()) {
    throw DataError("keep_order must lie in [0, signal order]");
  }
  std::vector<std::vector<double>> out = signal.channels();
  for (int c = 0; c < signal.num_channels(); ++c) {
    if (AcnDegree(c) > keep_order) std::fill(out[c].begin(), out[c].end(), 0.0);
  }
  return SoundFieldSignal(std::move(out), signal.sample_rate(), signal.order());
}

SoundFieldSignal DegradeBitcrush(const SoundFieldSignal& signal, int bits) {
  if (bits < 2 || bits > 24) throw DataError("bits must lie in [2, 24]");
  const double step = std::ldexp(1.0, 1 - bits);
  std::vector<std::vector<double>> out = signal.channels();
  for (std::vector<double>& ch : out) {
    for (double& v : ch) v = std::clamp(step * std::round(v / step), -1.0, 1.0);
  }
  return SoundFieldSignal(std::move(out), signal.sample_rate(), signal.order());
}

SoundFieldSignal DegradeNoise(const SoundFieldSignal& signal, double snr_db,
                              uint64_t seed) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw DataError("snr must be finite or +inf");
  }
  const double w_rms = Rms(signal.channel(0));
  if (w_rms == 0.0) throw DataError("silent input");
  if (std::isinf(snr_db)) return signal;
  const double sigma = w_rms * std::pow(10.0, -snr_db / 20.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  std::vector<std::vector<double>> out = signal.channels();
  for (std::vector<double>& ch : out) {
    for (double& v : ch) v += gauss(rng);
  }
  return SoundFieldSignal(std::move(out), signal.sample_rate(), signal.order());
}

const char* RecipeName(ContentRecipe recipe) {
  switch (recipe) {
    case ContentRecipe::kSpeech:
      return "speech";
    case ContentRecipe::kMusic:
      return "music";
    case ContentRecipe::kAmbiance:
      return "ambiance";
  }
  return "?";
}

std::vector<ConditionSpec> DefaultConditions() {
  using K = DegradationKind;
  return {
      {"reference", "reference", 0, 100.0, K::kHiddenRef, 0.0},
      {"lp14000", "lowpass", 1, 85.0, K::kLowpass, 14000.0},
      {"lp7000", "lowpass", 2, 65.0, K::kLowpass, 7000.0},
      {"anchor", "lowpass", 3, 20.0, K::kLowpass, 3500.0},
      {"noise40", "noise", 1, 75.0, K::kNoise, 40.0},
      {"noise25", "noise", 2, 45.0, K::kNoise, 25.0},
      {"bits10", "bitcrush", 1, 70.0, K::kBitcrush, 10.0},
      {"bits7", "bitcrush", 2, 35.0, K::kBitcrush, 7.0},
      {"order0", "order", 1, 50.0, K::kOrderTruncate, 0.0},
  };
}

void CheckLabelMonotonicity(std::span<const ConditionSpec> conditions) {
  std::set<std::string> names;
  std::map<std::string, std::vector<const ConditionSpec*>> families;
  for (const ConditionSpec& c : conditions) {
    if (!names.insert(c.name).second) {
      throw DataError("duplicate condition '" + c.name + "'");
    }
    if (!(c.label >= 0.0 && c.label <= 100.0)) {
      throw DataError("label of '" + c.name + "' outside 0-100");
    }
    families[c.family].push_back(&c);
  }
  for (auto& [family, members] : families) {
    std::sort(members.begin(), members.end(),
              [](const ConditionSpec* a, const ConditionSpec* b) {
                return a->severity < b->severity;
              });
    for (size_t i = 1; i < members.size(); ++i) {
      if (members[i]->severity == members[i - 1]->severity ||
          !(members[i]->label < members[i - 1]->label)) {
        throw DataError("labels in family '" + family +
                        "' must strictly decrease with severity");
      }
    }
  }
}

SoundFieldSignal SynthContent(ContentRecipe recipe, bool reverberant,
                              const CorpusSpec& spec, uint64_t seed) {
  const int rate = spec.sample_rate;
  const size_t n = static_cast<size_t>(spec.duration_s * rate);
  if (n == 0) throw DataError("duration too short");
  std::mt19937_64 rng(seed);
  std::vector<Source> sources;
  std::vector<std::vector<double>> channels(NumAmbisonicChannels(spec.order),
                                            std::vector<double>(n, 0.0));
  switch (recipe) {
    case ContentRecipe::kSpeech: {
      const int talkers = 1 + static_cast<int>(rng() % 2);
      for (int t = 0; t < talkers; ++t) {
        sources.push_back({SpeechSource(n, rate, rng), Uniform(rng, -70, 70),
                           Uniform(rng, -10, 10)});
      }
      break;
    }
    case ContentRecipe::kMusic:
      for (int t = 0; t < 2; ++t) {
        sources.push_back({MusicSource(n, rate, rng), Uniform(rng, -90, 90),
                           Uniform(rng, -5, 20)});
      }
      break;
    case ContentRecipe::kAmbiance: {
      const SoundFieldSignal bed =
          SynthIsotropicDiffuse(spec.duration_s, spec.order, 64, rng(), rate);
      for (int c = 0; c < bed.num_channels(); ++c) {
        for (size_t i = 0; i < n; ++i) channels[c][i] += 0.5 * bed.channel(c)[i];
      }
      for (int t = 0; t < 3; ++t) {
        sources.push_back({TransientSource(n, rate, rng),
                           Uniform(rng, -180, 180), Uniform(rng, -30, 45)});
      }
      break;
    }
  }
  const double bed_rms = Rms(channels[0]);
  std::vector<double> dry(n, 0.0);
  for (Source& s : sources) {
    ScaleTo(s.signal, recipe == ContentRecipe::kAmbiance ? 2.0 * std::max(bed_rms, 1e-3)
                                                         : 0.1);
    AddPlaneWave(channels, s.signal, s.azimuth_deg, s.elevation_deg, spec.order);
    for (size_t i = 0; i < n; ++i) dry[i] += s.signal[i];
  }
  if (reverberant) AddReverbTail(channels, dry, spec, rng);
  return NormalizeLevel(SoundFieldSignal(std::move(channels), rate, spec.order),
                        spec.level_db);
}

std::filesystem::path BuildCorpus(const CorpusSpec& spec,
                                  const std::filesystem::path& out_dir,
                                  size_t threads) {
  CheckLabelMonotonicity(spec.conditions);
  if (spec.conditions.empty()) throw DataError("no conditions");
  if (spec.variants == 0) throw DataError("need at least one variant");
  const size_t total = spec.num_contents();
  if (spec.val_contents + spec.test_contents >= total) {
    throw DataError("splits leave no training contents");
  }

  std::vector<Content> contents;
  for (size_t v = 0; v < spec.variants; ++v) {
    for (bool rev : {false, true}) {
      for (ContentRecipe r : {ContentRecipe::kSpeech, ContentRecipe::kMusic,
                              ContentRecipe::kAmbiance}) {
        const size_t index = contents.size();
        contents.push_back({ContentName(index, r, rev), r, rev,
                            DeriveSeed(spec.seed, 1, index)});
      }
    }
  }

  // Whole contents go to splits; test and validation each try to cover
  // different recipes.
  std::vector<size_t> order(total);
  for (size_t i = 0; i < total; ++i) order[i] = i;
  std::mt19937_64 split_rng(DeriveSeed(spec.seed, 2));
  for (size_t i = total; i > 1; --i) std::swap(order[i - 1], order[split_rng() % i]);
  std::vector<Split> split(total, Split::kTrain);
  auto pick = [&](Split target, size_t count) {
    std::set<ContentRecipe> used;
    for (int pass = 0; pass < 2 && count > 0; ++pass) {
      for (size_t i : order) {
        if (count == 0) break;
        if (split[i] != Split::kTrain) continue;
        if (pass == 0 && used.count(contents[i].recipe)) continue;
        split[i] = target;
        used.insert(contents[i].recipe);
        --count;
      }
    }
  };
  pick(Split::kTest, spec.test_contents);
  pick(Split::kVal, spec.val_contents);

  std::vector<std::filesystem::path> written;
  std::mutex written_mutex;
  std::error_code ec;
  const bool created_root = std::filesystem::create_directories(out_dir, ec);
  try {
    if (ec) throw DataError("cannot create " + out_dir.string());
    std::filesystem::create_directories(out_dir / "refs");
    std::filesystem::create_directories(out_dir / "degs");
    std::vector<std::vector<RatedPair>> rows(total);
    auto record = [&](const std::filesystem::path& p) {
      std::lock_guard<std::mutex> lock(written_mutex);
      written.push_back(p);
    };
    ParallelFor(total, threads, [&](size_t i) {
      const Content& content = contents[i];
      const SoundFieldSignal ref =
          SynthContent(content.recipe, content.reverberant, spec, content.seed);
      const std::filesystem::path ref_path =
          out_dir / "refs" / (content.name + ".wav");
      record(ref_path);
      WriteSoundField(ref_path, ref);
      for (size_t k = 0; k < spec.conditions.size(); ++k) {
        const ConditionSpec& c = spec.conditions[k];
        RatedPair row;
        row.id = content.name + "_" + c.name;
        row.ref_path = ref_path;
        row.condition = c.name;
        row.mos = c.label;
        row.ci95 = spec.ci95;
        row.hidden_ref = c.kind == DegradationKind::kHiddenRef;
        row.split = split[i];
        if (row.hidden_ref) {
          row.deg_path = ref_path;
        } else {
          row.deg_path = out_dir / "degs" / (row.id + ".wav");
          const SoundFieldSignal deg =
              ApplyCondition(ref, c, DeriveSeed(spec.seed, 3, i * 1000 + k));
          record(row.deg_path);
          WriteSoundField(row.deg_path, deg);
        }
        rows[i].push_back(std::move(row));
      }
    });
    std::vector<RatedPair> all;
    for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
    const std::filesystem::path manifest = out_dir / "manifest.csv";
    record(manifest);
    WriteManifest(manifest, all);
    return manifest;
  } catch (...) {
    for (const std::filesystem::path& p : written) std::filesystem::remove(p, ec);
    std::filesystem::remove(out_dir / "refs", ec);  // only if empty
    std::filesystem::remove(out_dir / "degs", ec);
    if (created_root) std::filesystem::remove(out_dir, ec);
    throw;
  }
}

}  // namespace spatialq
