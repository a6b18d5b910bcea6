// core/src/evaluation.cpp

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

#include "fac/evaluation.hpp"

#include <fftw3.h>

#include <algorithm>
#include <future>
#include <limits>
#include <mutex>
#include <sstream>

#include "fac/error.hpp"
#include "fac/feature_cache.hpp"

namespace fac {

namespace {
std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

MelCepstra mel_cepstra(const FrameSequence &mel, int order) {
  const Index n = mel.num_channels();
  if (order < 1 || order >= n)
    throw ValidationError("cepstral order must lie in [1, " +
                          std::to_string(n - 1) + "], got " +
                          std::to_string(order));
  MelCepstra out;
  out.order = order;
  out.values.resize(mel.num_frames(), order + 1);
  if (mel.num_frames() == 0) return out;

  std::vector<double> in(static_cast<size_t>(n)), dct(static_cast<size_t>(n));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), dct.data(),
                            FFTW_REDFT10, FFTW_ESTIMATE);
  }
  // FFTW's REDFT10 is 2 * sum x_n cos(pi k (2n+1) / 2N); rescale to the
  // orthonormal basis.
  const double s0 = std::sqrt(1.0 / (4.0 * n));
  const double sk = std::sqrt(1.0 / (2.0 * n));
  for (Index t = 0; t < mel.num_frames(); ++t) {
    for (Index c = 0; c < n; ++c) in[size_t(c)] = mel.values()(t, c);
    fftw_execute(plan);
    out.values(t, 0) = dct[0] * s0;
    for (int k = 1; k <= order; ++k) out.values(t, k) = dct[size_t(k)] * sk;
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

double cepstral_distance(const MelCepstra &a, Index i, const MelCepstra &b,
                         Index j) {
  return (a.values.row(i).tail(a.order) - b.values.row(j).tail(b.order)).norm();
}

AlignmentPath dtw_align(const MelCepstra &a, const MelCepstra &b) {
  const Index ta = a.values.rows(), tb = b.values.rows();
  if (ta == 0 || tb == 0) throw ValidationError("dtw_align: empty input");
  if (a.order != b.order)
    throw ShapeError("dtw_align: cepstral orders differ");
  const double inf = std::numeric_limits<double>::infinity();
  Matrix acc = Matrix::Constant(ta, tb, inf);
  for (Index i = 0; i < ta; ++i)
    for (Index j = 0; j < tb; ++j) {
      const double d = cepstral_distance(a, i, b, j);
      if (i == 0 && j == 0) {
        acc(i, j) = d;
        continue;
      }
      double best = inf;
      if (i > 0 && j > 0) best = acc(i - 1, j - 1);
      if (i > 0) best = std::min(best, acc(i - 1, j));
      if (j > 0) best = std::min(best, acc(i, j - 1));
      acc(i, j) = d + best;
    }

  AlignmentPath path;
  path.total_cost = acc(ta - 1, tb - 1);
  Index i = ta - 1, j = tb - 1;
  path.pairs.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const double diag = acc(i - 1, j - 1);
      const double up = acc(i - 1, j);
      const double left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    } else if (i > 0) {
      --i;
    } else {
      --j;
    }
    path.pairs.emplace_back(i, j);
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

MCDResult mcd_cepstra(const MelCepstra &converted,
                      const MelCepstra &reference) {
  const AlignmentPath path = dtw_align(converted, reference);
  double sum = 0.0;
  for (const auto &[i, j] : path.pairs)
    sum += cepstral_distance(converted, i, reference, j);
  MCDResult r;
  r.path_length = static_cast<Index>(path.pairs.size());
  r.aligned_frames = converted.values.rows();
  r.mcd_db = kMcdScale * sum / static_cast<double>(r.path_length);
  return r;
}

MCDResult mcd(const FrameSequence &converted, const FrameSequence &reference,
              int order) {
  if (converted.empty() || reference.empty())
    throw ValidationError("mcd: empty input");
  return mcd_cepstra(mel_cepstra(converted, order),
                     mel_cepstra(reference, order));
}

// --- WER -----------------------------------------------------------------

std::vector<std::string> split_words(const std::string &text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

WERResult wer_tokens(const std::vector<std::string> &ref,
                     const std::vector<std::string> &hyp) {
  if (ref.empty()) throw ValidationError("wer: empty reference");
  const size_t n = ref.size(), m = hyp.size();
  // cost[i][j]: edit distance between ref[:i] and hyp[:j].
  std::vector<std::vector<int>> cost(n + 1, std::vector<int>(m + 1));
  for (size_t i = 0; i <= n; ++i) cost[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= m; ++j) cost[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i)
    for (size_t j = 1; j <= m; ++j)
      cost[i][j] = std::min({cost[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]),
                             cost[i - 1][j] + 1, cost[i][j - 1] + 1});
  WERResult r;
  r.ref_words = static_cast<int>(n);
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        cost[i][j] == cost[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])) {
      r.substitutions += ref[i - 1] != hyp[j - 1];
      --i;
      --j;
    } else if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++r.deletions;
      --i;
    } else {
      ++r.insertions;
      --j;
    }
  }
  r.wer_percent = 100.0 * r.errors() / r.ref_words;
  return r;
}

WERResult wer(const std::string &ref_text, const std::string &hyp_text) {
  return wer_tokens(split_words(normalize_transcript(ref_text)),
                    split_words(normalize_transcript(hyp_text)));
}

std::string transcribe(const Waveform &wave, TranscriberProvider &provider,
                       const std::string &utterance_id,
                       const std::string &attached_transcript) {
  TranscriptionRequest req{&wave, utterance_id, attached_transcript};
  return provider.invoke(
      utterance_id.empty() ? "transcribe" : utterance_id + "/transcribe",
      [&] { return provider.transcribe(req); });
}

std::vector<std::string> transcribe_all(
    const std::vector<TranscriptionRequest> &requests,
    TranscriberProvider &provider) {
  std::vector<std::string> out(requests.size());
  const size_t width =
      static_cast<size_t>(std::max(1, provider.max_in_flight()));
  for (size_t start = 0; start < requests.size(); start += width) {
    const size_t end = std::min(requests.size(), start + width);
    std::vector<std::future<std::string>> pending;
    for (size_t i = start; i < end; ++i) {
      const TranscriptionRequest &r = requests[i];
      if (r.wave == nullptr)
        throw ValidationError("transcription request without audio: " +
                              r.utterance_id);
      pending.push_back(std::async(std::launch::async, [&provider, &r] {
        return transcribe(*r.wave, provider, r.utterance_id,
                          r.attached_transcript);
      }));
    }
    for (size_t i = start; i < end; ++i) out[i] = pending[i - start].get();
  }
  return out;
}

std::string MockEchoTranscriber::transcribe(const TranscriptionRequest &r) {
  return r.attached_transcript;
}

std::string MockGarblingTranscriber::transcribe(const TranscriptionRequest &r) {
  const auto words = split_words(r.attached_transcript);
  std::string out;
  for (size_t i = 0; i < words.size(); i += 2) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

// --- correlation -------------------------------------------------------

double ppmc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ValidationError("ppmc: sequences differ in length");
  if (x.size() < 2) throw ValidationError("ppmc: need at least two samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ValidationError("ppmc: correlation undefined for a constant sequence");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double mean_channel_ppmc(const Matrix &estimate, const Matrix &reference) {
  if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
    throw ShapeError("mean_channel_ppmc: shape mismatch");
  if (estimate.cols() == 0) throw ShapeError("mean_channel_ppmc: no channels");
  double sum = 0.0;
  for (Index c = 0; c < estimate.cols(); ++c) {
    const Vector a = estimate.col(c), b = reference.col(c);
    sum += ppmc(std::span<const double>(a.data(), size_t(a.size())),
                std::span<const double>(b.data(), size_t(b.size())));
  }
  return sum / static_cast<double>(estimate.cols());
}

double rmse(const Matrix &estimate, const Matrix &reference) {
  if (estimate.rows() != reference.rows() || estimate.cols() != reference.cols())
    throw ShapeError("rmse: shape mismatch");
  if (estimate.size() == 0) throw ShapeError("rmse of an empty matrix");
  return std::sqrt((estimate - reference).squaredNorm() /
                   static_cast<double>(estimate.size()));
}

// --- centroids -----------------------------------------------------------

std::string_view to_string(Condition c) {
  return c == Condition::kOriginal ? "original" : "converted";
}

namespace {
Vector centroid(const std::vector<SpeakerEmbedding> &cell,
                const std::string &where) {
  if (cell.empty()) throw ValidationError("no embeddings for " + where);
  Vector sum = Vector::Zero(cell.front().vector.size());
  for (const auto &e : cell) {
    if (e.vector.size() != sum.size())
      throw ShapeError("embedding dimension mismatch in " + where);
    sum += e.vector;
  }
  return sum / static_cast<double>(cell.size());
}
}  // namespace

CentroidReport centroid_report(const EmbeddingTable &embeddings) {
  std::map<std::string, std::pair<const std::vector<SpeakerEmbedding> *,
                                  const std::vector<SpeakerEmbedding> *>>
      by_speaker;
  for (const auto &[key, cell] : embeddings) {
    auto &slot = by_speaker[key.first];
    (key.second == Condition::kOriginal ? slot.first : slot.second) = &cell;
  }
  if (by_speaker.empty()) throw ValidationError("centroid report: no speakers");
  CentroidReport r;
  for (const auto &[speaker, cells] : by_speaker) {
    if (!cells.first || !cells.second)
      throw ValidationError("speaker " + speaker + " lacks the " +
                            (cells.first ? "converted" : "original") +
                            " condition");
    const Vector a = centroid(*cells.first, speaker + "/original");
    const Vector b = centroid(*cells.second, speaker + "/converted");
    if (a.size() != b.size())
      throw ShapeError("embedding dimension mismatch for " + speaker);
    r.per_speaker.push_back({speaker, (a - b).norm()});
  }
  const auto n = static_cast<double>(r.per_speaker.size());
  for (const auto &d : r.per_speaker) r.mean += d.distance;
  r.mean /= n;
  double var = 0.0;
  for (const auto &d : r.per_speaker)
    var += (d.distance - r.mean) * (d.distance - r.mean);
  r.std = std::sqrt(var / n);
  return r;
}

std::vector<std::filesystem::path> export_embeddings(
    const EmbeddingTable &embeddings, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto &[key, cell] : embeddings) {
    if (cell.empty()) continue;
    Matrix rows(static_cast<Index>(cell.size()), cell.front().vector.size());
    FeatureSidecar meta;
    for (size_t i = 0; i < cell.size(); ++i) {
      rows.row(static_cast<Index>(i)) = cell[i].vector.transpose();
      meta.row_labels.push_back(cell[i].source_utterance_id);
    }
    meta.provider_id = "speaker-encoder";
    meta.utterance_id = key.first;
    const auto path =
        dir / (key.first + "." + std::string(to_string(key.second)) + ".facf");
    // One row per embedding; the rate field is unused and set to 1.
    write_feature_cache(path, FrameSequence(std::move(rows), 1.0),
                        CacheDtype::kFloat64);
    write_feature_sidecar(path, meta);
    written.push_back(path);
  }
  return written;
}

}  // namespace fac
