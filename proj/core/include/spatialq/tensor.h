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

#ifndef SPATIALQ_TENSOR_H_
#define SPATIALQ_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace spatialq {

// Dense row-major [dim0][dim1][dim2] array of doubles.
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(size_t dim0, size_t dim1, size_t dim2, double fill = 0.0)
      : dims_{dim0, dim1, dim2}, data_(dim0 * dim1 * dim2, fill) {}

  size_t dim0() const { return dims_[0]; }
  size_t dim1() const { return dims_[1]; }
  size_t dim2() const { return dims_[2]; }
  size_t size() const { return data_.size(); }

  double& operator()(size_t i, size_t j, size_t k) {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }
  double operator()(size_t i, size_t j, size_t k) const {
    return data_[(i * dims_[1] + j) * dims_[2] + k];
  }
  // Contiguous dim2 row at (i, j).
  std::span<double> row(size_t i, size_t j) {
    return {data_.data() + (i * dims_[1] + j) * dims_[2], dims_[2]};
  }
  std::span<const double> row(size_t i, size_t j) const {
    return {data_.data() + (i * dims_[1] + j) * dims_[2], dims_[2]};
  }

  std::span<double> flat() { return data_; }
  std::span<const double> flat() const { return data_; }

  bool SameShape(const Tensor3& other) const {
    return dims_[0] == other.dims_[0] && dims_[1] == other.dims_[1] &&
           dims_[2] == other.dims_[2];
  }
  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  size_t dims_[3] = {0, 0, 0};
  std::vector<double> data_;
};

}  // namespace spatialq

#endif  // SPATIALQ_TENSOR_H_
