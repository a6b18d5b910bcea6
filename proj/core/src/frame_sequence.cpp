// core/src/frame_sequence.cpp

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

#include "fac/frame_sequence.hpp"

#include <cmath>

#include "fac/error.hpp"

namespace fac {

namespace {

std::string shape_str(const FrameSequence &s) {
  return std::to_string(s.num_frames()) + "x" +
         std::to_string(s.num_channels()) + " @" +
         std::to_string(s.frame_rate()) + " Hz";
}

void expect_geometry(const FrameSequence &s, Index channels, double rate,
                     const char *what) {
  if (s.num_channels() != channels || std::abs(s.frame_rate() - rate) > 1e-9)
    throw ValidationError(std::string(what) + " expects " +
                          std::to_string(channels) + " channels @" +
                          std::to_string(rate) + " Hz, got " + shape_str(s));
}

}  // namespace

FrameSequence::FrameSequence(Matrix values, double frame_rate)
    : values_(std::move(values)), frame_rate_(frame_rate) {
  if (!(frame_rate_ > 0.0) || !std::isfinite(frame_rate_))
    throw ValidationError("frame_rate must be positive");
  if (!values_.allFinite())
    throw ValidationError("frame sequence contains non-finite values");
}

FrameSequence FrameSequence::truncated(Index frames) const {
  if (frames < 0 || frames > num_frames())
    throw ShapeError("cannot truncate " + std::to_string(num_frames()) +
                     " frames to " + std::to_string(frames));
  FrameSequence out;
  out.values_ = values_.topRows(frames);
  out.frame_rate_ = frame_rate_;
  return out;
}

MelSpectrogram::MelSpectrogram(FrameSequence seq)
    : FrameSequence(std::move(seq)) {
  expect_geometry(*this, kMelChannels, kMelFrameRate, "mel spectrogram");
}

UpstreamEmbedding::UpstreamEmbedding(FrameSequence seq,
                                     const FeatureGeometry &geometry)
    : FrameSequence(std::move(seq)) {
  expect_geometry(*this, geometry.upstream_dim, geometry.upstream_rate,
                  "upstream embedding");
}

PosteriorgramTrack::PosteriorgramTrack(FrameSequence seq,
                                       const FeatureGeometry &geometry)
    : FrameSequence(std::move(seq)) {
  expect_geometry(*this, geometry.ppg_dim, geometry.target_rate,
                  "posteriorgram");
  for (Index t = 0; t < num_frames(); ++t) {
    const auto row = values().row(t);
    if (row.minCoeff() < 0.0)
      throw ValidationError("posteriorgram frame " + std::to_string(t) +
                            " has a negative probability");
    if (std::abs(row.sum() - 1.0) > kRowSumTolerance)
      throw ValidationError("posteriorgram frame " + std::to_string(t) +
                            " sums to " + std::to_string(row.sum()));
  }
}

TractVariableTrack::TractVariableTrack(FrameSequence seq,
                                       std::vector<std::string> channel_names,
                                       const FeatureGeometry &geometry)
    : FrameSequence(std::move(seq)), channel_names_(std::move(channel_names)) {
  expect_geometry(*this, geometry.tv_dim, geometry.target_rate,
                  "tract-variable track");
  if (static_cast<Index>(channel_names_.size()) != num_channels())
    throw ValidationError("tract-variable track has " +
                          std::to_string(num_channels()) + " channels but " +
                          std::to_string(channel_names_.size()) + " names");
}

std::vector<std::string> default_tv_channel_names() {
  return {"LA", "LP", "TBCL", "TBCD", "TTCL", "TTCD"};
}

}  // namespace fac
