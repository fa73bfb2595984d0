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

#include <gtest/gtest.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "spatialq/errors.h"
#include "test_util.h"

namespace spatialq {
namespace {

using testing::TempDir;

// Hand-assembled RIFF bytes.
class Bytes {
 public:
  void Tag(const char* t) { data_.append(t, 4); }
  void U16(uint16_t v) { Raw(&v, 2); }
  void U32(uint32_t v) { Raw(&v, 4); }
  void Raw(const void* p, size_t n) {
    data_.append(static_cast<const char*>(p), n);
  }
  void Save(const std::filesystem::path& path) const {
    std::ofstream(path, std::ios::binary).write(data_.data(), data_.size());
  }
  size_t size() const { return data_.size(); }

 private:
  std::string data_;
};

Bytes PcmFile(uint16_t format, uint16_t channels, uint16_t bits,
              const std::string& payload, bool extensible = false) {
  Bytes b;
  b.Tag("RIFF");
  b.U32(static_cast<uint32_t>(4 + 8 + (extensible ? 40 : 16) + 8 + payload.size()));
  b.Tag("WAVE");
  b.Tag("fmt ");
  b.U32(extensible ? 40 : 16);
  b.U16(extensible ? 0xFFFE : format);
  b.U16(channels);
  b.U32(48000);
  b.U32(48000u * channels * bits / 8);
  b.U16(static_cast<uint16_t>(channels * bits / 8));
  b.U16(bits);
  if (extensible) {
    b.U16(22);
    b.U16(bits);
    b.U32(0);
    b.U16(format);
    static const uint8_t kGuidTail[14] = {0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80,
                                          0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};
    b.Raw(kGuidTail, 14);
  }
  b.Tag("data");
  b.U32(static_cast<uint32_t>(payload.size()));
  b.Raw(payload.data(), payload.size());
  return b;
}

TEST(WavIoTest, FloatRoundTrip) {
  TempDir dir("wav");
  WavAudio a{44100, {{0.5, -0.25, 0.125}, {1.0, 0.0, -1.0}}};
  WriteWav(dir / "x.wav", a);
  const WavAudio b = ReadWav(dir / "x.wav");
  EXPECT_EQ(b.sample_rate, 44100);
  EXPECT_EQ(b.channels, a.channels);
}

TEST(WavIoTest, ManyChannelsRoundTrip) {
  TempDir dir("wav");
  WavAudio a{48000, std::vector<std::vector<double>>(16, {0.25, -0.5})};
  WriteWav(dir / "x.wav", a);
  EXPECT_EQ(ReadWav(dir / "x.wav").channels, a.channels);
}

TEST(WavIoTest, DeterministicBytes) {
  TempDir dir("wav");
  WavAudio a{48000, {{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}}};
  WriteWav(dir / "a.wav", a);
  WriteWav(dir / "b.wav", a);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir / "a.wav"), slurp(dir / "b.wav"));
}

TEST(WavIoTest, ReadsPcm16) {
  TempDir dir("wav");
  const int16_t samples[] = {16384, -32768, 0, 32767};
  std::string payload(reinterpret_cast<const char*>(samples), sizeof(samples));
  PcmFile(1, 2, 16, payload).Save(dir / "p.wav");
  const WavAudio a = ReadWav(dir / "p.wav");
  ASSERT_EQ(a.channels.size(), 2u);
  EXPECT_DOUBLE_EQ(a.channels[0][0], 0.5);
  EXPECT_DOUBLE_EQ(a.channels[1][0], -1.0);
  EXPECT_DOUBLE_EQ(a.channels[0][1], 0.0);
  EXPECT_DOUBLE_EQ(a.channels[1][1], 32767.0 / 32768.0);
}

TEST(WavIoTest, ReadsPcm24Extensible) {
  TempDir dir("wav");
  // 0x400000 = 0.5, 0xC00000 = -0.5
  const uint8_t samples[] = {0x00, 0x00, 0x40, 0x00, 0x00, 0xC0};
  std::string payload(reinterpret_cast<const char*>(samples), sizeof(samples));
  PcmFile(1, 1, 24, payload, true).Save(dir / "p.wav");
  const WavAudio a = ReadWav(dir / "p.wav");
  ASSERT_EQ(a.num_frames(), 2u);
  EXPECT_DOUBLE_EQ(a.channels[0][0], 0.5);
  EXPECT_DOUBLE_EQ(a.channels[0][1], -0.5);
}

TEST(WavIoTest, ReadsFloat64) {
  TempDir dir("wav");
  const double samples[] = {0.123456789012345, -0.75};
  std::string payload(reinterpret_cast<const char*>(samples), sizeof(samples));
  PcmFile(3, 1, 64, payload).Save(dir / "d.wav");
  const WavAudio a = ReadWav(dir / "d.wav");
  EXPECT_EQ(a.channels[0][0], samples[0]);
  EXPECT_EQ(a.channels[0][1], samples[1]);
}

TEST(WavIoTest, RejectsGarbage) {
  TempDir dir("wav");
  std::ofstream(dir / "bad.wav") << "not a wave file at all";
  EXPECT_THROW(ReadWav(dir / "bad.wav"), DataError);
  EXPECT_THROW(ReadWav(dir / "missing.wav"), DataError);
  // Unsupported 8-bit PCM.
  PcmFile(1, 1, 8, std::string(4, '\0')).Save(dir / "u8.wav");
  EXPECT_THROW(ReadWav(dir / "u8.wav"), DataError);
}

TEST(WavIoTest, PartialTrailingFrameDropped) {
  TempDir dir("wav");
  // 2 channels x float32 = 8-byte frames; 12 bytes hold one whole frame.
  const float samples[] = {0.5f, -0.5f, 0.25f};
  std::string payload(reinterpret_cast<const char*>(samples), sizeof(samples));
  PcmFile(3, 2, 32, payload).Save(dir / "t.wav");
  const WavAudio a = ReadWav(dir / "t.wav");
  ASSERT_EQ(a.num_frames(), 1u);
  EXPECT_EQ(a.channels[1][0], -0.5);
}

TEST(WavIoTest, MissingDataChunk) {
  TempDir dir("wav");
  Bytes b;
  b.Tag("RIFF");
  b.U32(4);
  b.Tag("WAVE");
  b.Save(dir / "e.wav");
  EXPECT_THROW(ReadWav(dir / "e.wav"), DataError);
}

}  // namespace
}  // namespace spatialq
