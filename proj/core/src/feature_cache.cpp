// core/src/feature_cache.cpp

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

#include "fac/feature_cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "fac/error.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "feature cache I/O assumes a little-endian host");

namespace fac {

namespace {

template <typename T>
void put(std::vector<char> &buf, T v) {
  const char *p = reinterpret_cast<const char *>(&v);
  buf.insert(buf.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<char> &buf, size_t &pos) {
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

size_t dtype_size(CacheDtype d) { return d == CacheDtype::kFloat32 ? 4 : 8; }

}  // namespace

void write_feature_cache(const std::filesystem::path &path,
                         const FrameSequence &seq, CacheDtype dtype) {
  const auto frames = static_cast<uint64_t>(seq.num_frames());
  const auto channels = static_cast<uint64_t>(seq.num_channels());
  std::vector<char> buf;
  buf.reserve(kFeatureCacheHeaderBytes + frames * channels * dtype_size(dtype));
  buf.insert(buf.end(), {'F', 'A', 'C', 'F'});
  put<uint8_t>(buf, kFeatureCacheVersion);
  put<uint8_t>(buf, static_cast<uint8_t>(dtype));
  put<double>(buf, seq.frame_rate());
  put<uint64_t>(buf, frames);
  put<uint64_t>(buf, channels);
  const Matrix &v = seq.values();
  for (Index t = 0; t < v.rows(); ++t)
    for (Index c = 0; c < v.cols(); ++c) {
      if (dtype == CacheDtype::kFloat32)
        put<float>(buf, static_cast<float>(v(t, c)));
      else
        put<double>(buf, v(t, c));
    }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write feature cache " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to " + path.string());
}

FrameSequence read_feature_cache(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature cache " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (buf.size() < kFeatureCacheHeaderBytes)
    throw IntegrityError(where + ": truncated header");
  if (std::memcmp(buf.data(), "FACF", 4) != 0)
    throw IntegrityError(where + ": bad magic");
  size_t pos = 4;
  const auto version = get<uint8_t>(buf, pos);
  if (version != kFeatureCacheVersion)
    throw IntegrityError(where + ": unsupported version " +
                         std::to_string(version));
  const auto code = get<uint8_t>(buf, pos);
  if (code != static_cast<uint8_t>(CacheDtype::kFloat32) &&
      code != static_cast<uint8_t>(CacheDtype::kFloat64))
    throw IntegrityError(where + ": unknown dtype code " + std::to_string(code));
  const auto dtype = static_cast<CacheDtype>(code);
  const auto rate = get<double>(buf, pos);
  const auto frames = get<uint64_t>(buf, pos);
  const auto channels = get<uint64_t>(buf, pos);
  const size_t elem = dtype_size(dtype);
  if (channels != 0 && frames > (buf.size() / elem) / channels)
    throw IntegrityError(where + ": payload shorter than header dims");
  if (buf.size() - kFeatureCacheHeaderBytes != frames * channels * elem)
    throw IntegrityError(where + ": payload is " +
                         std::to_string(buf.size() - kFeatureCacheHeaderBytes) +
                         " bytes, header requires " +
                         std::to_string(frames * channels * elem));
  Matrix values(static_cast<Index>(frames), static_cast<Index>(channels));
  for (Index t = 0; t < values.rows(); ++t)
    for (Index c = 0; c < values.cols(); ++c)
      values(t, c) = dtype == CacheDtype::kFloat32 ? get<float>(buf, pos)
                                                   : get<double>(buf, pos);
  try {
    return FrameSequence(std::move(values), rate);
  } catch (const ValidationError &e) {
    throw IntegrityError(where + ": " + e.what());
  }
}

std::filesystem::path sidecar_path(const std::filesystem::path &cache_path) {
  auto p = cache_path;
  p += ".json";
  return p;
}

void write_feature_sidecar(const std::filesystem::path &cache_path,
                           const FeatureSidecar &meta) {
  nlohmann::json j = {{"channel_names", meta.channel_names},
                      {"provider_id", meta.provider_id},
                      {"utterance_id", meta.utterance_id}};
  if (!meta.row_labels.empty()) j["row_labels"] = meta.row_labels;
  std::ofstream out(sidecar_path(cache_path));
  if (!out) throw IoError("cannot write sidecar for " + cache_path.string());
  out << j.dump(2) << '\n';
}

FeatureSidecar read_feature_sidecar(const std::filesystem::path &cache_path) {
  std::ifstream in(sidecar_path(cache_path));
  if (!in) throw IoError("cannot open sidecar for " + cache_path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    FeatureSidecar meta;
    meta.channel_names =
        j.value("channel_names", std::vector<std::string>{});
    meta.provider_id = j.value("provider_id", "");
    meta.utterance_id = j.value("utterance_id", "");
    meta.row_labels = j.value("row_labels", std::vector<std::string>{});
    return meta;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(sidecar_path(cache_path).string() + ": " + e.what());
  }
}

FrameSequence feature_cache_roundtrip(const FrameSequence &seq,
                                      const std::filesystem::path &path,
                                      CacheDtype dtype) {
  write_feature_cache(path, seq, dtype);
  return read_feature_cache(path);
}

}  // namespace fac
