// core/include/fac/prosody_encoder.hpp

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

#ifndef FAC_PROSODY_ENCODER_HPP_
#define FAC_PROSODY_ENCODER_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "fac/autograd.hpp"
#include "fac/embeddings.hpp"
#include "fac/frame_sequence.hpp"
#include "fac/parameters.hpp"
#include "json.hpp"

namespace fac {

/// Reference encoder: 1-D convolution over mel frames, ReLU, one LSTM,
/// mean over time, linear projection to the embedding.
struct ProsodyEncoderConfig {
  Index mel_dim = kMelChannels;
  Index conv_channels = 128;
  Index conv_kernel = 3;  // odd
  Index lstm_hidden = 128;
  Index prosody_dim = 128;

  void validate() const;
  nlohmann::json to_json() const;
  static ProsodyEncoderConfig from_json(const nlohmann::json &j);
};

class ProsodyEncoder {
 public:
  ProsodyEncoder() = default;
  explicit ProsodyEncoder(ProsodyEncoderConfig config);

  void initialize(uint64_t seed);
  bool initialized() const { return initialized_; }
  void mark_initialized() { initialized_ = true; }

  const ProsodyEncoderConfig &config() const { return config_; }
  nn::ParameterSet &parameters() { return params_; }
  const nn::ParameterSet &parameters() const { return params_; }

  /// 1 x prosody_dim node with parameters bound as gradient leaves.
  nn::Var build(nn::Graph &g, const Matrix &mel);
  /// Evaluation mode; deterministic.
  ProsodyEmbedding encode(const MelSpectrogram &mel) const;

  void save(const std::filesystem::path &dir) const;
  static ProsodyEncoder load(const std::filesystem::path &dir);

 private:
  template <typename Bind>
  nn::Var build_impl(nn::Graph &g, const Matrix &mel, Bind &&bind) const;

  ProsodyEncoderConfig config_;
  nn::ParameterSet params_;
  bool initialized_ = false;
};

/// Free-function form of ProsodyEncoder::encode.
ProsodyEmbedding encode_prosody(const MelSpectrogram &mel,
                                const ProsodyEncoder &encoder);

}  // namespace fac

#endif  // FAC_PROSODY_ENCODER_HPP_
