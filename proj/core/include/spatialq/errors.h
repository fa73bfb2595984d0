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

#ifndef SPATIALQ_ERRORS_H_
#define SPATIALQ_ERRORS_H_

#include <stdexcept>
#include <string>

namespace spatialq {

// Bad inputs: malformed files, mismatched shapes, out-of-range values.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or divergence during computation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace spatialq

#endif  // SPATIALQ_ERRORS_H_
