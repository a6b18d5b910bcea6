// core/include/fac/feature_cache.hpp

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

#ifndef FAC_FEATURE_CACHE_HPP_
#define FAC_FEATURE_CACHE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fac/frame_sequence.hpp"

namespace fac {

// Binary layout (little-endian):
//   "FACF" | version u8 | dtype u8 | frame_rate f64 | frames u64 |
//   channels u64 | row-major payload
// The payload length must equal frames * channels * sizeof(dtype).
inline constexpr uint8_t kFeatureCacheVersion = 1;
inline constexpr size_t kFeatureCacheHeaderBytes = 4 + 1 + 1 + 8 + 8 + 8;

enum class CacheDtype : uint8_t { kFloat32 = 1, kFloat64 = 2 };

/// f32 storage rounds each value to the nearest float; round trips are
/// bitwise only for float-representable values. Use kFloat64 otherwise.
void write_feature_cache(const std::filesystem::path &path,
                         const FrameSequence &seq,
                         CacheDtype dtype = CacheDtype::kFloat32);
/// Throws IntegrityError on a bad magic, version, dtype or payload length.
FrameSequence read_feature_cache(const std::filesystem::path &path);

/// Structured text stored next to the binary as "<path>.json".
struct FeatureSidecar {
  std::vector<std::string> channel_names;
  std::string provider_id;
  std::string utterance_id;
  std::vector<std::string> row_labels;  // optional, one per frame
};
std::filesystem::path sidecar_path(const std::filesystem::path &cache_path);
void write_feature_sidecar(const std::filesystem::path &cache_path,
                           const FeatureSidecar &meta);
FeatureSidecar read_feature_sidecar(const std::filesystem::path &cache_path);

FrameSequence feature_cache_roundtrip(const FrameSequence &seq,
                                      const std::filesystem::path &path,
                                      CacheDtype dtype = CacheDtype::kFloat32);

}  // namespace fac

#endif  // FAC_FEATURE_CACHE_HPP_
