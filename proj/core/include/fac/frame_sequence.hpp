// core/include/fac/frame_sequence.hpp

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

#ifndef FAC_FRAME_SEQUENCE_HPP_
#define FAC_FRAME_SEQUENCE_HPP_

#include <Eigen/Core>
#include <string>
#include <vector>

namespace fac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// A rate-stamped (frames x channels) array. Every feature track in the
/// pipeline is one of these with a fixed channel count and rate.
class FrameSequence {
 public:
  FrameSequence() = default;
  /// Throws ValidationError on a non-positive rate or non-finite values.
  FrameSequence(Matrix values, double frame_rate);

  const Matrix &values() const { return values_; }
  double frame_rate() const { return frame_rate_; }
  Index num_frames() const { return values_.rows(); }
  Index num_channels() const { return values_.cols(); }
  bool empty() const { return values_.rows() == 0; }

  /// First `frames` frames; frames must not exceed num_frames().
  FrameSequence truncated(Index frames) const;

 private:
  Matrix values_;
  double frame_rate_ = 100.0;
};

/// Channel counts and rates of the pretrained feature extractors. The
/// defaults are the production geometry; tests shrink the dimensions.
struct FeatureGeometry {
  Index upstream_dim = 1024;
  double upstream_rate = 50.0;
  Index ppg_dim = 5816;
  Index tv_dim = 6;
  double target_rate = 100.0;
};

inline constexpr Index kMelChannels = 80;
inline constexpr double kMelFrameRate = 100.0;

class MelSpectrogram : public FrameSequence {
 public:
  MelSpectrogram() : FrameSequence(Matrix(0, kMelChannels), kMelFrameRate) {}
  /// Requires 80 channels at 100 Hz.
  explicit MelSpectrogram(FrameSequence seq);
};

class UpstreamEmbedding : public FrameSequence {
 public:
  UpstreamEmbedding() = default;
  UpstreamEmbedding(FrameSequence seq, const FeatureGeometry &geometry);
};

/// Rows are probability distributions over senone classes.
class PosteriorgramTrack : public FrameSequence {
 public:
  static constexpr double kRowSumTolerance = 1e-4;

  PosteriorgramTrack() = default;
  PosteriorgramTrack(FrameSequence seq, const FeatureGeometry &geometry);
};

class TractVariableTrack : public FrameSequence {
 public:
  TractVariableTrack() = default;
  TractVariableTrack(FrameSequence seq, std::vector<std::string> channel_names,
                     const FeatureGeometry &geometry);

  const std::vector<std::string> &channel_names() const {
    return channel_names_;
  }

 private:
  std::vector<std::string> channel_names_;
};

/// LA, LP, TBCL, TBCD, TTCL, TTCD.
std::vector<std::string> default_tv_channel_names();

}  // namespace fac

#endif  // FAC_FRAME_SEQUENCE_HPP_
