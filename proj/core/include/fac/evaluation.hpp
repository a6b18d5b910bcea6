// core/include/fac/evaluation.hpp

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

#ifndef FAC_EVALUATION_HPP_
#define FAC_EVALUATION_HPP_

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fac/corpus.hpp"
#include "fac/embeddings.hpp"
#include "fac/frame_sequence.hpp"
#include "fac/providers.hpp"

namespace fac {

// --- mel cepstral distortion -----------------------------------------------

struct MelCepstra {
  Matrix values;  // frames x (order + 1), c0 in column 0
  int order = 13;
};

/// Orthonormal DCT-II of each log-mel frame, coefficients 0..order.
MelCepstra mel_cepstra(const FrameSequence &mel, int order = 13);

struct AlignmentPath {
  std::vector<std::pair<Index, Index>> pairs;  // (frame in a, frame in b)
  double total_cost = 0.0;
};

/// Euclidean distance over coefficients 1..order (c0 excluded).
double cepstral_distance(const MelCepstra &a, Index i, const MelCepstra &b,
                         Index j);

/// Minimum-cost monotone path with steps (1,0), (0,1), (1,1) from (0,0)
/// to (Ta-1, Tb-1). Diagonal steps win ties during backtracking.
AlignmentPath dtw_align(const MelCepstra &a, const MelCepstra &b);

/// (10 / ln 10) * sqrt(2).
inline constexpr double kMcdScale = 10.0 / std::numbers::ln10 * std::numbers::sqrt2;

struct MCDResult {
  double mcd_db = 0.0;
  Index aligned_frames = 0;  // frames of the converted utterance
  Index path_length = 0;     // aligned frame pairs
};

/// Mean over DTW-aligned pairs of kMcdScale * ||c_1..order - c'_1..order||.
MCDResult mcd(const FrameSequence &converted, const FrameSequence &reference,
              int order = 13);
MCDResult mcd_cepstra(const MelCepstra &converted, const MelCepstra &reference);

// --- word error rate ---------------------------------------------------------

struct WERResult {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_words = 0;
  double wer_percent = 0.0;

  int errors() const { return substitutions + deletions + insertions; }
};

/// Both texts go through normalize_transcript first. An empty normalized
/// reference is a ValidationError.
WERResult wer(const std::string &ref_text, const std::string &hyp_text);
WERResult wer_tokens(const std::vector<std::string> &ref,
                     const std::vector<std::string> &hyp);
std::vector<std::string> split_words(const std::string &text);

struct TranscriptionRequest {
  const Waveform *wave = nullptr;
  std::string utterance_id;
  /// Ground-truth text when known; only mock transcribers look at it.
  std::string attached_transcript;
};

class TranscriberProvider : public Provider {
 public:
  virtual std::string transcribe(const TranscriptionRequest &request) = 0;
  /// Requests the harness may keep in flight at once.
  virtual int max_in_flight() const { return 1; }
};

std::string transcribe(const Waveform &wave, TranscriberProvider &provider,
                       const std::string &utterance_id = "",
                       const std::string &attached_transcript = "");

/// Transcribes every request with at most provider.max_in_flight() calls
/// running at once. Results keep the request order.
std::vector<std::string> transcribe_all(
    const std::vector<TranscriptionRequest> &requests,
    TranscriberProvider &provider);

/// Returns the attached transcript unchanged.
class MockEchoTranscriber : public TranscriberProvider {
 public:
  explicit MockEchoTranscriber(bool loaded = true) : loaded_(loaded) {}
  std::string id() const override { return "mock-echo"; }
  bool ready() const override { return loaded_; }
  std::string transcribe(const TranscriptionRequest &request) override;

 private:
  bool loaded_;
};

/// Drops every second word (positions 1, 3, 5, ...) of the attached
/// transcript.
class MockGarblingTranscriber : public TranscriberProvider {
 public:
  std::string id() const override { return "mock-garbler"; }
  std::string transcribe(const TranscriptionRequest &request) override;
};

// --- correlation ---------------------------------------------------------

/// Pearson correlation; equal lengths >= 2, neither sequence constant.
double ppmc(std::span<const double> x, std::span<const double> y);
/// Mean over columns of the per-channel correlation.
double mean_channel_ppmc(const Matrix &estimate, const Matrix &reference);
double rmse(const Matrix &estimate, const Matrix &reference);

// --- speaker embedding clusters -----------------------------------------

enum class Condition { kOriginal, kConverted };
std::string_view to_string(Condition c);

using EmbeddingTable =
    std::map<std::pair<std::string, Condition>, std::vector<SpeakerEmbedding>>;

struct SpeakerCentroidDistance {
  std::string speaker_id;
  double distance = 0.0;
};

struct CentroidReport {
  std::vector<SpeakerCentroidDistance> per_speaker;  // sorted by speaker id
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Euclidean distance between the original and converted centroids of
/// each speaker, in the native embedding space.
CentroidReport centroid_report(const EmbeddingTable &embeddings);

/// One feature-cache file per (speaker, condition) named
/// "<speaker>.<condition>.facf", rows = embeddings, for external 2-D
/// projection. Returns the written paths.
std::vector<std::filesystem::path> export_embeddings(
    const EmbeddingTable &embeddings, const std::filesystem::path &dir);

}  // namespace fac

#endif  // FAC_EVALUATION_HPP_
