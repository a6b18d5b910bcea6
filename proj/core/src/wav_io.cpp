// core/src/wav_io.cpp

// Copyright 2026  fac contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "fac/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "fac/error.hpp"

namespace fac {

namespace {

uint32_t le32(const unsigned char *p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}
uint16_t le16(const unsigned char *p) {
  return static_cast<uint16_t>(p[0] | p[1] << 8);
}
void put32(std::vector<unsigned char> &buf, uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back((v >> (8 * i)) & 0xff);
}
void put16(std::vector<unsigned char> &buf, uint16_t v) {
  buf.push_back(v & 0xff);
  buf.push_back((v >> 8) & 0xff);
}

}  // namespace

Waveform read_wav(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    throw ParseError(where + ": not a RIFF/WAVE file");

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const unsigned char *pcm = nullptr;
  size_t pcm_bytes = 0;
  size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char *chunk = data.data() + pos;
    const uint32_t size = le32(chunk + 4);
    const size_t body = pos + 8;
    if (body + size > data.size())
      throw IntegrityError(where + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0 && size >= 16) {
      format = le16(chunk + 8);
      channels = le16(chunk + 10);
      rate = le32(chunk + 12);
      bits = le16(chunk + 22);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      pcm = chunk + 8;
      pcm_bytes = size;
    }
    pos = body + size + (size & 1);
  }
  if (!pcm || rate == 0) throw ParseError(where + ": missing fmt or data chunk");
  if (channels != 1)
    throw ValidationError(where + ": expected mono audio, got " +
                          std::to_string(channels) + " channels");

  Waveform wave;
  wave.sample_rate = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    wave.samples.resize(pcm_bytes / 2);
    for (size_t i = 0; i < wave.samples.size(); ++i)
      wave.samples[i] =
          static_cast<int16_t>(le16(pcm + 2 * i)) / 32768.0;
  } else if (format == 3 && bits == 32) {
    wave.samples.resize(pcm_bytes / 4);
    for (size_t i = 0; i < wave.samples.size(); ++i) {
      const uint32_t bitsv = le32(pcm + 4 * i);
      float f;
      std::memcpy(&f, &bitsv, 4);
      wave.samples[i] = f;
    }
  } else {
    throw ValidationError(where + ": unsupported sample format " +
                          std::to_string(format) + "/" + std::to_string(bits));
  }
  return wave;
}

void write_wav(const std::filesystem::path &path, const Waveform &wave) {
  wave.validate();
  const auto n = static_cast<uint32_t>(wave.samples.size());
  std::vector<unsigned char> buf;
  buf.reserve(44 + 2 * size_t(n));
  buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
  put32(buf, 36 + 2 * n);
  buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(buf, 16);
  put16(buf, 1);
  put16(buf, 1);
  put32(buf, static_cast<uint32_t>(wave.sample_rate));
  put32(buf, static_cast<uint32_t>(wave.sample_rate) * 2);
  put16(buf, 2);
  put16(buf, 16);
  buf.insert(buf.end(), {'d', 'a', 't', 'a'});
  put32(buf, 2 * n);
  for (double s : wave.samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<int16_t>(
        std::clamp(std::lround(clipped * 32767.0), -32768L, 32767L));
    put16(buf, static_cast<uint16_t>(q));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace fac
