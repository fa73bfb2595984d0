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

// Little-endian helpers for the project's binary file formats.

#ifndef SPATIALQ_SRC_BINARY_IO_H_
#define SPATIALQ_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "spatialq/errors.h"

namespace spatialq::internal {

class ByteWriter {
 public:
  void Tag(const char (&tag)[5]) { bytes_.insert(bytes_.end(), tag, tag + 4); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void F32(float v) { U32(std::bit_cast<uint32_t>(v)); }

  void WriteTo(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes_.data()),
              static_cast<std::streamsize>(bytes_.size()));
    if (!out) throw DataError("write failed for " + path.string());
  }

 private:
  std::vector<uint8_t> bytes_;
};

class ByteReader {
 public:
  // `error` prefixes every failure message.
  ByteReader(const std::filesystem::path& path, std::string error)
      : error_(std::move(error)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    bytes_.assign(std::istreambuf_iterator<char>(in),
                  std::istreambuf_iterator<char>());
  }

  bool Tag(const char (&tag)[5]) {
    Need(4);
    const bool ok = std::memcmp(bytes_.data() + pos_, tag, 4) == 0;
    pos_ += 4;
    return ok;
  }
  uint32_t U32() {
    Need(4);
    const uint8_t* p = reinterpret_cast<const uint8_t*>(bytes_.data()) + pos_;
    pos_ += 4;
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) |
           (static_cast<uint32_t>(p[3]) << 24);
  }
  float F32() { return std::bit_cast<float>(U32()); }
  size_t remaining() const { return bytes_.size() - pos_; }
  [[noreturn]] void Fail(const std::string& why) const {
    throw DataError(error_ + ": " + why);
  }

 private:
  void Need(size_t n) const {
    if (bytes_.size() - pos_ < n) Fail("truncated file");
  }
  std::string error_;
  std::vector<char> bytes_;
  size_t pos_ = 0;
};

}  // namespace spatialq::internal

#endif  // SPATIALQ_SRC_BINARY_IO_H_
