// core/include/fac/corpus.hpp

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

#ifndef FAC_CORPUS_HPP_
#define FAC_CORPUS_HPP_

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fac {

/// Mono audio. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
  /// Throws ValidationError on a non-positive rate or a non-finite sample.
  void validate() const;
};

enum class Split { kTrain, kDev, kTest, kHeldout };

std::string_view to_string(Split split);
/// Accepts "train", "dev", "test" and "heldout".
Split parse_split(std::string_view text);

struct UtteranceRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::string native_language;
  std::string transcript;
  std::filesystem::path audio_path;
  int sample_rate = 16000;
  Split split = Split::kTrain;

  void validate() const;
  bool operator==(const UtteranceRecord &) const = default;
};

struct DataSplits {
  std::vector<UtteranceRecord> train;
  std::vector<UtteranceRecord> dev;
  std::vector<UtteranceRecord> heldout;
  // Test-tagged records of speakers that are not held out.
  std::vector<UtteranceRecord> test;
  std::set<std::string> heldout_speakers;
};

// Manifest I/O. One JSON object per line with the keys utterance_id,
// speaker_id, native_language, transcript, audio_path, sample_rate, split.
// Blank lines are ignored. Relative audio paths are resolved against the
// manifest's directory by load_manifest (not by parse_manifest).
std::vector<UtteranceRecord> parse_manifest(std::istream &in);
std::vector<UtteranceRecord> load_manifest(const std::filesystem::path &path);
void write_manifest(std::ostream &out,
                    const std::vector<UtteranceRecord> &records);
std::string manifest_line(const UtteranceRecord &record);

/// Routes every record of a held-out speaker to heldout and partitions the
/// rest by their split tag.
DataSplits build_splits(const std::vector<UtteranceRecord> &records,
                        const std::set<std::string> &heldout_speakers);

/// Cuts into consecutive segments of round(segment_seconds * rate) samples,
/// zero padding the last one.
std::vector<Waveform> segment_waveform(const Waveform &wave,
                                       double segment_seconds = 2.0);

/// Lowercase, strip ASCII punctuation, collapse whitespace, trim.
std::string normalize_transcript(std::string_view text);

/// The L1 record whose normalized transcript equals that of l2_utt.
const UtteranceRecord &find_parallel_reference(
    const UtteranceRecord &l2_utt,
    const std::vector<UtteranceRecord> &l1_records);

}  // namespace fac

#endif  // FAC_CORPUS_HPP_
