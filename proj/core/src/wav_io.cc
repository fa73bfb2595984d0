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

#include "spatialq/wav_io.h"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "spatialq/errors.h"

namespace spatialq {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

// Trailing 14 bytes of the KSDATAFORMAT_SUBTYPE_* GUIDs.
constexpr std::array<uint8_t, 14> kGuidTail = {0x00, 0x00, 0x00, 0x00, 0x10,
                                               0x00, 0x80, 0x00, 0x00, 0xAA,
                                               0x00, 0x38, 0x9B, 0x71};

uint16_t LoadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}
uint32_t LoadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xFF));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
void PutTag(std::vector<uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

WavAudio ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError(name + ": not a RIFF/WAVE file");
  }

  uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    const uint32_t size = LoadU32(chunk + 4);
    const size_t body = pos + 8;
    const size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > avail) throw DataError(name + ": bad fmt chunk");
      const uint8_t* f = bytes.data() + body;
      format = LoadU16(f);
      channels = LoadU16(f + 2);
      rate = LoadU32(f + 4);
      block_align = LoadU16(f + 12);
      bits = LoadU16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw DataError(name + ": bad extensible fmt chunk");
        const uint8_t* guid = f + 24;
        if (std::memcmp(guid + 2, kGuidTail.data(), kGuidTail.size()) != 0) {
          throw DataError(name + ": unknown extensible subformat");
        }
        format = LoadU16(guid);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      // Streaming writers sometimes leave the size at 0 or 0xFFFFFFFF.
      data_size = (size == 0 || size > avail) ? avail : size;
    }
    pos = body + size + (size & 1u);
  }
  if (channels == 0 || data == nullptr) {
    throw DataError(name + ": missing fmt or data chunk");
  }
  const size_t width = bits / 8;
  if (width == 0 || block_align != channels * width) {
    throw DataError(name + ": inconsistent block alignment");
  }
  const bool is_float = format == kFormatFloat && (bits == 32 || bits == 64);
  const bool is_pcm =
      format == kFormatPcm && (bits == 16 || bits == 24 || bits == 32);
  if (!is_float && !is_pcm) {
    throw DataError(name + ": unsupported sample format " +
                    std::to_string(format) + "/" + std::to_string(bits));
  }

  WavAudio audio;
  audio.sample_rate = static_cast<int>(rate);
  const size_t frames = data_size / block_align;
  audio.channels.assign(channels, std::vector<double>(frames));
  for (size_t n = 0; n < frames; ++n) {
    for (size_t c = 0; c < channels; ++c) {
      const uint8_t* s = data + n * block_align + c * width;
      double v = 0.0;
      if (is_float && bits == 32) {
        v = std::bit_cast<float>(LoadU32(s));
      } else if (is_float) {
        const uint64_t lo = LoadU32(s), hi = LoadU32(s + 4);
        v = std::bit_cast<double>(lo | (hi << 32));
      } else if (bits == 16) {
        v = static_cast<int16_t>(LoadU16(s)) / 32768.0;
      } else if (bits == 24) {
        int32_t x = s[0] | (s[1] << 8) | (s[2] << 16);
        if (x & 0x800000) x -= 0x1000000;
        v = x / 8388608.0;
      } else {
        v = static_cast<int32_t>(LoadU32(s)) / 2147483648.0;
      }
      audio.channels[c][n] = v;
    }
  }
  return audio;
}

void WriteWav(const std::filesystem::path& path, const WavAudio& audio) {
  const size_t channels = audio.channels.size();
  if (channels == 0 || channels > 0xFFFF) {
    throw DataError("cannot write " + std::to_string(channels) + " channels");
  }
  const size_t frames = audio.num_frames();
  for (const auto& ch : audio.channels) {
    if (ch.size() != frames) throw DataError("ragged channel lengths");
  }
  const bool extensible = channels > 2;
  const uint32_t block_align = static_cast<uint32_t>(channels * 4);
  const uint32_t data_size = static_cast<uint32_t>(frames * block_align);
  const uint32_t fmt_size = extensible ? 40 : 16;

  std::vector<uint8_t> out;
  out.reserve(44 + 24 + data_size);
  PutTag(out, "RIFF");
  PutU32(out, 4 + (8 + fmt_size) + (8 + data_size));
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, fmt_size);
  PutU16(out, extensible ? kFormatExtensible : kFormatFloat);
  PutU16(out, static_cast<uint16_t>(channels));
  PutU32(out, static_cast<uint32_t>(audio.sample_rate));
  PutU32(out, static_cast<uint32_t>(audio.sample_rate) * block_align);
  PutU16(out, static_cast<uint16_t>(block_align));
  PutU16(out, 32);
  if (extensible) {
    PutU16(out, 22);
    PutU16(out, 32);
    PutU32(out, 0);
    PutU16(out, kFormatFloat);
    out.insert(out.end(), kGuidTail.begin(), kGuidTail.end());
  }
  PutTag(out, "data");
  PutU32(out, data_size);
  for (size_t n = 0; n < frames; ++n) {
    for (size_t c = 0; c < channels; ++c) {
      PutU32(out, std::bit_cast<uint32_t>(
                      static_cast<float>(audio.channels[c][n])));
    }
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw DataError("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw DataError("write failed for " + path.string());
}

}  // namespace spatialq
