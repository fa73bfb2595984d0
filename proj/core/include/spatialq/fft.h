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

#ifndef SPATIALQ_FFT_H_
#define SPATIALQ_FFT_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace spatialq {

// Real-to-complex transform of a fixed size. Plans are shared process-wide
// and created under a lock; Forward/Inverse are safe to call concurrently.
class RealFft {
 public:
  explicit RealFft(size_t size);

  size_t size() const { return size_; }
  size_t num_bins() const { return size_ / 2 + 1; }

  // Unnormalized forward transform; `out` has num_bins() entries.
  void Forward(std::span<const double> in,
               std::span<std::complex<double>> out) const;
  // Inverse including the 1/size scaling, so Inverse(Forward(x)) == x.
  void Inverse(std::span<const std::complex<double>> in,
               std::span<double> out) const;

 private:
  size_t size_;
  void* forward_plan_;
  void* inverse_plan_;
};

size_t NextPowerOfTwo(size_t n);

// Linear convolution of `signal` with `kernel`, truncated to the first
// signal.size() samples. Uses FFT overlap-add.
std::vector<double> ConvolveTruncated(std::span<const double> signal,
                                      std::span<const double> kernel);

}  // namespace spatialq

#endif  // SPATIALQ_FFT_H_
