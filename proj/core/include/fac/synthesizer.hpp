// core/include/fac/synthesizer.hpp

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

#ifndef FAC_SYNTHESIZER_HPP_
#define FAC_SYNTHESIZER_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "fac/acoustic_model.hpp"
#include "fac/autograd.hpp"
#include "fac/embeddings.hpp"
#include "fac/frame_sequence.hpp"
#include "fac/parameters.hpp"
#include "json.hpp"

namespace fac {

/// Transformer encoder over bottleneck features; speaker and prosody
/// vectors are tiled over time, concatenated to the encoder output and
/// projected to the attention memory. The decoder is a pre-norm stack of
/// causal self-attention, cross-attention and feed-forward blocks fed by a
/// two-layer prenet over the previous mel frame.
struct SynthesizerConfig {
  Index bnf_dim = 256;
  Index speaker_dim = 256;
  Index prosody_dim = 128;
  Index mel_dim = kMelChannels;
  Index model_dim = 256;
  Index num_heads = 4;
  Index ffn_dim = 1024;
  Index prenet_dim = 256;
  int encoder_layers = 4;
  int decoder_layers = 4;
  Index max_decode_frames = 2000;
  double stop_threshold = 0.5;

  void validate() const;
  nlohmann::json to_json() const;
  static SynthesizerConfig from_json(const nlohmann::json &j);
};

enum class SynthesisMode { kTeacherForced, kAutoregressive };

struct SynthesisResult {
  MelSpectrogram mel;
  Vector stop_logits;     // one per output frame
  Index stop_frame = -1;  // first frame with p(stop) > threshold, else -1
  bool truncated = false; // autoregressive decode hit max_decode_frames
};

/// Anything that turns (BNF, speaker, prosody) into a mel spectrogram.
class MelSynthesizer {
 public:
  virtual ~MelSynthesizer() = default;
  virtual std::string id() const = 0;
  virtual std::string checkpoint_id() const = 0;
  /// kTeacherForced needs `target` and returns exactly its frame count.
  virtual SynthesisResult synthesize(const BottleneckFeatures &bnf,
                                     const SpeakerEmbedding &speaker,
                                     const ProsodyEmbedding &prosody,
                                     SynthesisMode mode,
                                     const MelSpectrogram *target = nullptr) const = 0;
};

class TransformerSynthesizer : public MelSynthesizer {
 public:
  struct Outputs {
    nn::Var mel;          // T x mel_dim
    nn::Var stop_logits;  // T x 1
  };

  TransformerSynthesizer() = default;
  explicit TransformerSynthesizer(SynthesizerConfig config);

  void initialize(uint64_t seed);
  bool initialized() const { return initialized_; }
  void mark_initialized() { initialized_ = true; }

  const SynthesizerConfig &config() const { return config_; }
  nn::ParameterSet &parameters() { return params_; }
  const nn::ParameterSet &parameters() const { return params_; }

  std::string id() const override { return "transformer"; }
  std::string checkpoint_id() const override;

  /// Teacher-forced training graph. speaker and prosody are 1 x dim nodes
  /// of the same graph.
  Outputs build(nn::Graph &g, const Matrix &bnf, nn::Var speaker,
                nn::Var prosody, const Matrix &target);

  SynthesisResult synthesize(const BottleneckFeatures &bnf,
                             const SpeakerEmbedding &speaker,
                             const ProsodyEmbedding &prosody, SynthesisMode mode,
                             const MelSpectrogram *target = nullptr) const override;

  void save(const std::filesystem::path &dir) const;
  static TransformerSynthesizer load(const std::filesystem::path &dir);

 private:
  template <typename Bind>
  nn::Var build_memory(nn::Graph &g, const Matrix &bnf, nn::Var speaker,
                       nn::Var prosody, Bind &&bind) const;
  template <typename Bind>
  Outputs build_decoder(nn::Graph &g, nn::Var memory, const Matrix &inputs,
                        Bind &&bind) const;
  void check_inputs(const BottleneckFeatures &bnf, const SpeakerEmbedding &spk,
                    const ProsodyEmbedding &pros) const;
  SynthesisResult decode_autoregressive(const Matrix &memory) const;

  SynthesizerConfig config_;
  nn::ParameterSet params_;
  bool initialized_ = false;
};

/// Uses 80-dim bottleneck features directly as the mel spectrogram and stops
/// on the last frame. For identity checks of the conversion wiring.
class PassThroughSynthesizer : public MelSynthesizer {
 public:
  std::string id() const override { return "mock-passthrough"; }
  std::string checkpoint_id() const override { return "mock-passthrough"; }
  SynthesisResult synthesize(const BottleneckFeatures &bnf,
                             const SpeakerEmbedding &speaker,
                             const ProsodyEmbedding &prosody, SynthesisMode mode,
                             const MelSpectrogram *target = nullptr) const override;
};

/// Decoder input for teacher forcing: a zero frame followed by all but the
/// last target frame.
Matrix teacher_forcing_inputs(const Matrix &target);

/// Sinusoidal position table, rows x dim.
Matrix positional_encoding(Index rows, Index dim);

/// Per-frame stop labels: 0 everywhere except 1 on the final frame.
Matrix stop_targets(Index frames);

std::string checksum_hex(uint64_t checksum);

}  // namespace fac

#endif  // FAC_SYNTHESIZER_HPP_
