// core/src/providers.cpp

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

#include "fac/providers.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#include "fac/error.hpp"
#include "fac/random.hpp"

namespace fac {

void Provider::rethrow_wrapped(const std::string &context) const {
  try {
    throw;
  } catch (const std::exception &e) {
    throw ProviderError(id(), context, e.what());
  } catch (...) {
    throw ProviderError(id(), context, "unknown exception");
  }
}

void Provider::require_ready(const std::string &context) const {
  if (!ready())
    throw StateError("provider '" + id() + "' is not initialized" +
                     (context.empty() ? "" : " (" + context + ")"));
}

Index nominal_frames(const Waveform &wave, double rate) {
  return static_cast<Index>(std::floor(
      static_cast<double>(wave.samples.size()) * rate / wave.sample_rate +
      1e-9));
}

namespace {

void check_frame_count(const FrameSequence &seq, const Waveform &wave,
                       const char *what) {
  const Index expected = nominal_frames(wave, seq.frame_rate());
  if (std::abs(seq.num_frames() - expected) > 1)
    throw ValidationError(std::string(what) + ": " +
                          std::to_string(seq.num_frames()) +
                          " frames, expected about " +
                          std::to_string(expected));
}

std::string label(const std::string &context, const char *what) {
  return context.empty() ? std::string(what) : context + "/" + what;
}

Matrix row_softmax(const Matrix &logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index t = 0; t < logits.rows(); ++t) {
    const double m = logits.row(t).maxCoeff();
    out.row(t) = (logits.row(t).array() - m).exp().matrix();
    out.row(t) /= out.row(t).sum();
  }
  return out;
}

Matrix repeat_rows(const Matrix &m, Index factor) {
  Matrix out(m.rows() * factor, m.cols());
  for (Index t = 0; t < m.rows(); ++t)
    for (Index k = 0; k < factor; ++k) out.row(t * factor + k) = m.row(t);
  return out;
}

}  // namespace

UpstreamEmbedding get_upstream_embeddings(const Waveform &wave,
                                          UpstreamProvider &provider,
                                          const FeatureGeometry &geometry,
                                          const std::string &context) {
  wave.validate();
  FrameSequence raw = provider.invoke(label(context, "upstream"),
                                      [&] { return provider.embed(wave); });
  UpstreamEmbedding out(std::move(raw), geometry);
  check_frame_count(out, wave, "upstream embedding");
  return out;
}

PosteriorgramTrack get_ppg_targets(const Waveform &wave, PpgProvider &provider,
                                   const FeatureGeometry &geometry,
                                   const std::string &context) {
  wave.validate();
  FrameSequence raw = provider.invoke(
      label(context, "ppg"), [&] { return provider.posteriors(wave); });
  Matrix values = raw.values();
  for (Index t = 0; t < values.rows(); ++t) {
    if (values.row(t).minCoeff() < 0.0)
      throw ValidationError("posteriorgram frame " + std::to_string(t) +
                            " has a negative probability");
    const double sum = values.row(t).sum();
    if (std::abs(sum - 1.0) > kPpgRenormalizeTolerance)
      throw ValidationError("posteriorgram frame " + std::to_string(t) +
                            " sums to " + std::to_string(sum) +
                            ", not a distribution");
    values.row(t) /= sum;
  }
  PosteriorgramTrack out(FrameSequence(std::move(values), raw.frame_rate()),
                         geometry);
  check_frame_count(out, wave, "posteriorgram");
  return out;
}

TractVariableTrack get_tv_targets(const Waveform &wave, TvProvider &provider,
                                  const FeatureGeometry &geometry,
                                  const std::string &context) {
  wave.validate();
  FrameSequence raw = provider.invoke(
      label(context, "tv"), [&] { return provider.tract_variables(wave); });
  auto names = provider.channel_names();
  if (static_cast<Index>(names.size()) != raw.num_channels())
    names.resize(static_cast<size_t>(raw.num_channels()));
  TractVariableTrack out(std::move(raw), std::move(names), geometry);
  check_frame_count(out, wave, "tract-variable track");
  return out;
}

PosteriorgramTrack harden_posteriors(const PosteriorgramTrack &track,
                                     const FeatureGeometry &geometry) {
  Matrix hard = Matrix::Zero(track.num_frames(), track.num_channels());
  for (Index t = 0; t < track.num_frames(); ++t) {
    Index k = 0;
    track.values().row(t).maxCoeff(&k);
    hard(t, k) = 1.0;
  }
  return PosteriorgramTrack(FrameSequence(std::move(hard), track.frame_rate()),
                            geometry);
}

void TvNormalizationStats::validate() const {
  if (min.size() != max.size() || min.empty())
    throw ValidationError("TV stats: min/max size mismatch");
  if (!(range_lo < range_hi && range_lo > -1.0 && range_hi < 1.0))
    throw ValidationError("TV stats: target range must lie inside (-1, 1)");
  for (size_t c = 0; c < min.size(); ++c) {
    if (!(max[c] > min[c])) {
      const std::string name =
          c < channel_names.size() ? channel_names[c] : std::to_string(c);
      throw ValidationError("TV channel " + name +
                            " is degenerate (max == min)");
    }
  }
}

TvNormalizationStats compute_tv_stats(
    const std::vector<TractVariableTrack> &training_tracks, double range_lo,
    double range_hi) {
  if (training_tracks.empty())
    throw ValidationError("TV stats need at least one training track");
  TvNormalizationStats stats;
  const Index channels = training_tracks.front().num_channels();
  stats.min.assign(static_cast<size_t>(channels),
                   std::numeric_limits<double>::infinity());
  stats.max.assign(static_cast<size_t>(channels),
                   -std::numeric_limits<double>::infinity());
  stats.channel_names = training_tracks.front().channel_names();
  stats.range_lo = range_lo;
  stats.range_hi = range_hi;
  for (const auto &track : training_tracks) {
    if (track.num_channels() != channels)
      throw ShapeError("TV tracks disagree on channel count");
    for (Index c = 0; c < channels && track.num_frames() > 0; ++c) {
      auto k = static_cast<size_t>(c);
      stats.min[k] = std::min(stats.min[k], track.values().col(c).minCoeff());
      stats.max[k] = std::max(stats.max[k], track.values().col(c).maxCoeff());
    }
  }
  stats.validate();
  return stats;
}

TractVariableTrack normalize_tv_channels(const TractVariableTrack &track,
                                         const TvNormalizationStats &stats,
                                         const FeatureGeometry &geometry) {
  stats.validate();
  if (static_cast<Index>(stats.min.size()) != track.num_channels())
    throw ShapeError("TV stats cover " + std::to_string(stats.min.size()) +
                     " channels, track has " +
                     std::to_string(track.num_channels()));
  Matrix out = track.values();
  const double span = stats.range_hi - stats.range_lo;
  for (Index c = 0; c < out.cols(); ++c) {
    const auto k = static_cast<size_t>(c);
    const double lo = stats.min[k], hi = stats.max[k];
    for (Index t = 0; t < out.rows(); ++t) {
      const double x = std::clamp(out(t, c), lo, hi);
      out(t, c) = stats.range_lo + (x - lo) / (hi - lo) * span;
    }
  }
  return TractVariableTrack(FrameSequence(std::move(out), track.frame_rate()),
                            track.channel_names(), geometry);
}

TractVariableTrack denormalize_tv_channels(const TractVariableTrack &track,
                                           const TvNormalizationStats &stats,
                                           const FeatureGeometry &geometry) {
  stats.validate();
  if (static_cast<Index>(stats.min.size()) != track.num_channels())
    throw ShapeError("TV stats / track channel mismatch");
  Matrix out = track.values();
  const double span = stats.range_hi - stats.range_lo;
  for (Index c = 0; c < out.cols(); ++c) {
    const auto k = static_cast<size_t>(c);
    for (Index t = 0; t < out.rows(); ++t)
      out(t, c) = stats.min[k] + (out(t, c) - stats.range_lo) / span *
                                     (stats.max[k] - stats.min[k]);
  }
  return TractVariableTrack(FrameSequence(std::move(out), track.frame_rate()),
                            track.channel_names(), geometry);
}

// --- mocks -----------------------------------------------------------------

MockUpstreamProvider::MockUpstreamProvider(FeatureGeometry geometry,
                                           int sample_rate, Mode mode,
                                           uint64_t seed, bool loaded)
    : geometry_(geometry), sample_rate_(sample_rate), mode_(mode),
      loaded_(loaded) {
  hop_ = static_cast<Index>(std::llround(sample_rate_ / geometry_.upstream_rate));
  Rng rng(mix_seed(seed, 0x5eed0001));
  projection_ = random_normal(hop_, geometry_.upstream_dim,
                              4.0 / std::sqrt(static_cast<double>(hop_)), rng);
  bias_ = random_normal(1, geometry_.upstream_dim, 0.1, rng);
}

FrameSequence MockUpstreamProvider::embed(const Waveform &wave) {
  if (wave.sample_rate != sample_rate_)
    throw ValidationError("mock upstream expects " +
                          std::to_string(sample_rate_) + " Hz audio");
  const Index frames = nominal_frames(wave, geometry_.upstream_rate);
  if (mode_ == Mode::kZeros)
    return FrameSequence(Matrix::Zero(frames, geometry_.upstream_dim),
                         geometry_.upstream_rate);
  Matrix framed = Matrix::Zero(frames, hop_);
  for (Index t = 0; t < frames; ++t)
    for (Index i = 0; i < hop_; ++i) {
      const auto s = static_cast<size_t>(t * hop_ + i);
      if (s < wave.samples.size()) framed(t, i) = wave.samples[s];
    }
  Matrix out = framed * projection_;
  out.rowwise() += bias_;
  out = out.array().tanh().matrix();
  return FrameSequence(std::move(out), geometry_.upstream_rate);
}

MockUniformPpgProvider::MockUniformPpgProvider(FeatureGeometry geometry,
                                               int sample_rate)
    : geometry_(geometry), sample_rate_(sample_rate) {}

FrameSequence MockUniformPpgProvider::posteriors(const Waveform &wave) {
  (void)sample_rate_;
  const Index frames = nominal_frames(wave, geometry_.target_rate);
  return FrameSequence(
      Matrix::Constant(frames, geometry_.ppg_dim,
                       1.0 / static_cast<double>(geometry_.ppg_dim)),
      geometry_.target_rate);
}

MockSineTvProvider::MockSineTvProvider(FeatureGeometry geometry,
                                       int sample_rate)
    : geometry_(geometry), sample_rate_(sample_rate) {}

FrameSequence MockSineTvProvider::tract_variables(const Waveform &wave) {
  (void)sample_rate_;
  const Index frames = nominal_frames(wave, geometry_.target_rate);
  Matrix out(frames, geometry_.tv_dim);
  for (Index t = 0; t < frames; ++t) {
    const double time = static_cast<double>(t) / geometry_.target_rate;
    for (Index c = 0; c < geometry_.tv_dim; ++c) {
      const double freq = 1.0 + 0.5 * static_cast<double>(c);
      out(t, c) = 5.0 * static_cast<double>(c + 1) *
                      std::sin(2.0 * std::numbers::pi * freq * time + 0.3 * c) +
                  10.0 * static_cast<double>(c);
    }
  }
  return FrameSequence(std::move(out), geometry_.target_rate);
}

namespace {
Index rate_factor(const FeatureGeometry &g) {
  return static_cast<Index>(std::llround(g.target_rate / g.upstream_rate));
}
}  // namespace

MockTeacherPpgProvider::MockTeacherPpgProvider(
    std::shared_ptr<UpstreamProvider> upstream, FeatureGeometry geometry,
    uint64_t seed, double temperature)
    : upstream_(std::move(upstream)), geometry_(geometry),
      temperature_(temperature) {
  Rng rng(mix_seed(seed, 0x5eed0002));
  weights_ = random_normal(geometry_.upstream_dim, geometry_.ppg_dim,
                           3.0 / std::sqrt(double(geometry_.upstream_dim)), rng);
}

FrameSequence MockTeacherPpgProvider::posteriors(const Waveform &wave) {
  const FrameSequence up = upstream_->embed(wave);
  Matrix logits = repeat_rows(up.values(), rate_factor(geometry_)) * weights_;
  return FrameSequence(row_softmax(logits / temperature_), geometry_.target_rate);
}

MockTeacherTvProvider::MockTeacherTvProvider(
    std::shared_ptr<UpstreamProvider> upstream, FeatureGeometry geometry,
    uint64_t seed)
    : upstream_(std::move(upstream)), geometry_(geometry) {
  Rng rng(mix_seed(seed, 0x5eed0003));
  weights_ = random_normal(geometry_.upstream_dim, geometry_.tv_dim,
                           1.0 / std::sqrt(double(geometry_.upstream_dim)), rng);
  bias_ = random_normal(1, geometry_.tv_dim, 0.1, rng);
}

FrameSequence MockTeacherTvProvider::tract_variables(const Waveform &wave) {
  const FrameSequence up = upstream_->embed(wave);
  Matrix out = repeat_rows(up.values(), rate_factor(geometry_)) * weights_;
  out.rowwise() += bias_;
  // Physical-looking units: a few millimetres around a channel offset.
  for (Index c = 0; c < out.cols(); ++c)
    out.col(c) = (out.col(c).array() * 8.0 + 5.0 * static_cast<double>(c)).matrix();
  return FrameSequence(std::move(out), geometry_.target_rate);
}

}  // namespace fac
