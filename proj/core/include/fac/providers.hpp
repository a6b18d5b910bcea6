// core/include/fac/providers.hpp

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

#ifndef FAC_PROVIDERS_HPP_
#define FAC_PROVIDERS_HPP_

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fac/corpus.hpp"
#include "fac/frame_sequence.hpp"

namespace fac {

enum class ProviderConcurrency { kThreadSafe, kSingleConsumer };

/// Common base of every pretrained-model adapter (feature extractors,
/// speaker encoder, vocoder, transcriber).
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string id() const = 0;
  virtual ProviderConcurrency concurrency() const {
    return ProviderConcurrency::kThreadSafe;
  }
  /// False until the underlying model is loaded.
  virtual bool ready() const { return true; }

  /// Runs fn under the provider's call policy: throws StateError if the
  /// provider is not ready, serializes single-consumer providers, and wraps
  /// anything fn throws in a ProviderError carrying `context`.
  template <typename Fn>
  auto invoke(const std::string &context, Fn &&fn) -> decltype(fn());

 private:
  std::mutex call_mutex_;
  [[noreturn]] void rethrow_wrapped(const std::string &context) const;
  void require_ready(const std::string &context) const;
};

template <typename Fn>
auto Provider::invoke(const std::string &context, Fn &&fn) -> decltype(fn()) {
  require_ready(context);
  std::unique_lock<std::mutex> lock(call_mutex_, std::defer_lock);
  if (concurrency() == ProviderConcurrency::kSingleConsumer) lock.lock();
  try {
    return fn();
  } catch (...) {
    rethrow_wrapped(context);
  }
}

class UpstreamProvider : public Provider {
 public:
  virtual FrameSequence embed(const Waveform &wave) = 0;
};

class PpgProvider : public Provider {
 public:
  virtual FrameSequence posteriors(const Waveform &wave) = 0;
};

class TvProvider : public Provider {
 public:
  virtual FrameSequence tract_variables(const Waveform &wave) = 0;
  virtual std::vector<std::string> channel_names() const {
    return default_tv_channel_names();
  }
};

// Ingestion. Each call validates the provider output against `geometry`.
// The frame count must be within one frame of duration x nominal rate.

UpstreamEmbedding get_upstream_embeddings(const Waveform &wave,
                                          UpstreamProvider &provider,
                                          const FeatureGeometry &geometry = {},
                                          const std::string &context = "");

/// Rows whose sum is off by at most kPpgRenormalizeTolerance are
/// renormalized; larger deviations or negative entries are errors.
inline constexpr double kPpgRenormalizeTolerance = 1e-3;
PosteriorgramTrack get_ppg_targets(const Waveform &wave, PpgProvider &provider,
                                   const FeatureGeometry &geometry = {},
                                   const std::string &context = "");

/// Raw, physical-scale tract variables.
TractVariableTrack get_tv_targets(const Waveform &wave, TvProvider &provider,
                                  const FeatureGeometry &geometry = {},
                                  const std::string &context = "");

enum class PpgTargetForm { kSoft, kHard };
/// One-hot rows at each frame's argmax (first index on ties).
PosteriorgramTrack harden_posteriors(const PosteriorgramTrack &track,
                                     const FeatureGeometry &geometry);

/// Per-channel min-max statistics of the training TVs.
struct TvNormalizationStats {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<std::string> channel_names;
  double range_lo = -0.95;
  double range_hi = 0.95;

  /// Throws ValidationError naming the first degenerate channel.
  void validate() const;
};

TvNormalizationStats compute_tv_stats(
    const std::vector<TractVariableTrack> &training_tracks,
    double range_lo = -0.95, double range_hi = 0.95);

/// Affine map of [min, max] onto [range_lo, range_hi] per channel; values
/// outside the training range clip to the ends.
TractVariableTrack normalize_tv_channels(const TractVariableTrack &track,
                                         const TvNormalizationStats &stats,
                                         const FeatureGeometry &geometry = {});
/// Inverse of normalize_tv_channels on the non-clipped region.
TractVariableTrack denormalize_tv_channels(const TractVariableTrack &track,
                                           const TvNormalizationStats &stats,
                                           const FeatureGeometry &geometry = {});

// ---------------------------------------------------------------------------
// Mock providers. Deterministic stand-ins used by tests, benchmarks and the
// `mock` provider ids of the CLI.

/// Frames of hop = sample_rate / upstream_rate samples. In kProjection mode
/// each frame is tanh(W x + b) for a fixed seeded W; kZeros emits zeros.
class MockUpstreamProvider : public UpstreamProvider {
 public:
  enum class Mode { kProjection, kZeros };
  MockUpstreamProvider(FeatureGeometry geometry = {}, int sample_rate = 16000,
                       Mode mode = Mode::kProjection, uint64_t seed = 1,
                       bool loaded = true);
  std::string id() const override { return "mock-upstream"; }
  bool ready() const override { return loaded_; }
  FrameSequence embed(const Waveform &wave) override;

 private:
  FeatureGeometry geometry_;
  int sample_rate_;
  Mode mode_;
  bool loaded_;
  Index hop_;
  Matrix projection_;  // hop x upstream_dim
  RowVector bias_;
};

/// Every entry 1 / ppg_dim.
class MockUniformPpgProvider : public PpgProvider {
 public:
  explicit MockUniformPpgProvider(FeatureGeometry geometry = {},
                                  int sample_rate = 16000);
  std::string id() const override { return "mock-ppg-uniform"; }
  FrameSequence posteriors(const Waveform &wave) override;

 private:
  FeatureGeometry geometry_;
  int sample_rate_;
};

/// Per-channel sinusoids on a physical-looking scale.
class MockSineTvProvider : public TvProvider {
 public:
  explicit MockSineTvProvider(FeatureGeometry geometry = {},
                              int sample_rate = 16000);
  std::string id() const override { return "mock-tv-sine"; }
  FrameSequence tract_variables(const Waveform &wave) override;

 private:
  FeatureGeometry geometry_;
  int sample_rate_;
};

/// Targets that are a fixed function of an upstream provider's embeddings,
/// repeated to the target rate: softmax(E W / temperature) for PPGs and
/// scale * (E W + b) + offset for TVs. Used to build learnable tasks.
class MockTeacherPpgProvider : public PpgProvider {
 public:
  MockTeacherPpgProvider(std::shared_ptr<UpstreamProvider> upstream,
                         FeatureGeometry geometry, uint64_t seed,
                         double temperature = 1.0);
  std::string id() const override { return "mock-ppg-teacher"; }
  FrameSequence posteriors(const Waveform &wave) override;

 private:
  std::shared_ptr<UpstreamProvider> upstream_;
  FeatureGeometry geometry_;
  Matrix weights_;
  double temperature_;
};

class MockTeacherTvProvider : public TvProvider {
 public:
  MockTeacherTvProvider(std::shared_ptr<UpstreamProvider> upstream,
                        FeatureGeometry geometry, uint64_t seed);
  std::string id() const override { return "mock-tv-teacher"; }
  FrameSequence tract_variables(const Waveform &wave) override;

 private:
  std::shared_ptr<UpstreamProvider> upstream_;
  FeatureGeometry geometry_;
  Matrix weights_;
  RowVector bias_;
};

/// Frames expected from a provider at `rate` for `wave`.
Index nominal_frames(const Waveform &wave, double rate);

}  // namespace fac

#endif  // FAC_PROVIDERS_HPP_
