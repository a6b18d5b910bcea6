// core/include/fac/wav_io.hpp

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

#ifndef FAC_WAV_IO_HPP_
#define FAC_WAV_IO_HPP_

#include <filesystem>

#include "fac/corpus.hpp"

namespace fac {

// RIFF/WAVE reading supports mono 16-bit PCM and 32-bit IEEE float.
// Writing always produces 16-bit PCM; samples are clipped to [-1, 1].
Waveform read_wav(const std::filesystem::path &path);
void write_wav(const std::filesystem::path &path, const Waveform &wave);

}  // namespace fac

#endif  // FAC_WAV_IO_HPP_
