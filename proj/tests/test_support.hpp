// tests/test_support.hpp

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

#ifndef FAC_TESTS_TEST_SUPPORT_HPP_
#define FAC_TESTS_TEST_SUPPORT_HPP_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fac/autograd.hpp"
#include "fac/corpus.hpp"
#include "fac/random.hpp"

namespace fac::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string &tag = "fac");
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

/// Deterministic speech-like test signal: a few harmonics with a slow
/// amplitude envelope, seeded phase and a little noise.
Waveform synth_waveform(double seconds, uint64_t seed, int sample_rate = 16000);

/// Writes a small parallel corpus: every speaker reads sentences 0..n-1
/// (same transcripts across speakers) into <dir>/audio/<spk>/<utt>.wav and
/// lists them in <dir>/manifest.jsonl with relative paths. Speakers named
/// in `l1_speakers` get native_language "en", the rest "l2". The last
/// utterance of each speaker is tagged dev when n >= 3.
struct Corpus {
  std::filesystem::path manifest;
  std::vector<UtteranceRecord> records;  // audio paths absolute
};
Corpus make_corpus(const std::filesystem::path &dir,
                   const std::vector<std::string> &speakers,
                   int utterances_per_speaker, double seconds, uint64_t seed,
                   const std::vector<std::string> &l1_speakers = {"BDL"});

/// Transcript used for sentence k by make_corpus.
std::string corpus_sentence(int k);

/// Central finite-difference gradient of a scalar function of a parameter.
Matrix numeric_gradient(nn::Parameter &p, const std::function<double()> &f,
                        double h = 1e-6);

/// max |a-b| / max(1e-8, max(|a|, |b|)) over all entries.
double max_relative_error(const Matrix &a, const Matrix &b);

}  // namespace fac::testing

#endif  // FAC_TESTS_TEST_SUPPORT_HPP_
