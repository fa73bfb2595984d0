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

#include "spatialq/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace spatialq {

namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

// fftw_plan_* is not thread safe, and plans live for the whole process.
PlanPair GetPlans(size_t size) {
  static std::mutex mutex;
  static std::map<size_t, PlanPair> plans;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = plans.find(size);
  if (it != plans.end()) return it->second;
  std::vector<double> real(size);
  std::vector<std::complex<double>> spec(size / 2 + 1);
  auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair pair{
      fftw_plan_dft_r2c_1d(static_cast<int>(size), real.data(), cplx, flags),
      fftw_plan_dft_c2r_1d(static_cast<int>(size), cplx, real.data(), flags)};
  if (pair.forward == nullptr || pair.inverse == nullptr) {
    throw std::runtime_error("FFTW planning failed");
  }
  plans.emplace(size, pair);
  return pair;
}

}  // namespace

RealFft::RealFft(size_t size) : size_(size) {
  if (size < 2) throw std::invalid_argument("FFT size must be >= 2");
  const PlanPair plans = GetPlans(size);
  forward_plan_ = plans.forward;
  inverse_plan_ = plans.inverse;
}

void RealFft::Forward(std::span<const double> in,
                      std::span<std::complex<double>> out) const {
  if (in.size() != size_ || out.size() != num_bins()) {
    throw std::invalid_argument("RealFft::Forward size mismatch");
  }
  // FFTW may scribble on the input of c2r only; r2c leaves it intact, but the
  // API takes a non-const pointer.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_),
                       const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::Inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) const {
  if (in.size() != num_bins() || out.size() != size_) {
    throw std::invalid_argument("RealFft::Inverse size mismatch");
  }
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(size_);
  for (double& v : out) v *= scale;
}

size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> ConvolveTruncated(std::span<const double> signal,
                                      std::span<const double> kernel) {
  std::vector<double> out(signal.size(), 0.0);
  if (signal.empty() || kernel.empty()) return out;
  const size_t fft_size = NextPowerOfTwo(std::max<size_t>(2 * kernel.size(), 256));
  const size_t block = fft_size - kernel.size() + 1;
  const RealFft fft(fft_size);

  std::vector<double> buf(fft_size, 0.0);
  std::copy(kernel.begin(), kernel.end(), buf.begin());
  std::vector<std::complex<double>> kernel_spec(fft.num_bins());
  fft.Forward(buf, kernel_spec);

  std::vector<std::complex<double>> spec(fft.num_bins());
  for (size_t start = 0; start < signal.size(); start += block) {
    const size_t len = std::min(block, signal.size() - start);
    std::fill(buf.begin(), buf.end(), 0.0);
    std::copy_n(signal.begin() + static_cast<std::ptrdiff_t>(start), len,
                buf.begin());
    fft.Forward(buf, spec);
    for (size_t k = 0; k < spec.size(); ++k) spec[k] *= kernel_spec[k];
    fft.Inverse(spec, buf);
    const size_t end = std::min(signal.size(), start + fft_size);
    for (size_t n = start; n < end; ++n) out[n] += buf[n - start];
  }
  return out;
}

}  // namespace spatialq
