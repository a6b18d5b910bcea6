// core/include/fac/conversion.hpp

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

#ifndef FAC_CONVERSION_HPP_
#define FAC_CONVERSION_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fac/acoustic_model.hpp"
#include "fac/acoustic_training.hpp"
#include "fac/corpus.hpp"
#include "fac/embeddings.hpp"
#include "fac/prosody_encoder.hpp"
#include "fac/providers.hpp"
#include "fac/synthesizer.hpp"
#include "fac/trainer.hpp"
#include "json.hpp"

namespace fac {

// --- speaker encoder --------------------------------------------------------

/// What a speaker encoder may look at. Either representation can be absent;
/// implementations state which one they need.
struct SpeakerEncoderInput {
  std::string utterance_id;
  std::string speaker_id;
  const Waveform *wave = nullptr;
  const MelSpectrogram *mel = nullptr;
};

class SpeakerEncoderProvider : public Provider {
 public:
  virtual Index dim() const = 0;
  virtual Vector embed(const SpeakerEncoderInput &input) = 0;
  /// Changes iff the encoder's weights change.
  virtual uint64_t parameter_checksum() const = 0;
};

/// Runs the provider and tags the vector with its source utterance.
SpeakerEmbedding encode_speaker(const SpeakerEncoderInput &input,
                                SpeakerEncoderProvider &provider);

/// Unit vector seeded by a hash of speaker_id; ignores the audio.
class MockHashSpeakerEncoder : public SpeakerEncoderProvider {
 public:
  explicit MockHashSpeakerEncoder(Index dim = 256, bool loaded = true)
      : dim_(dim), loaded_(loaded) {}
  std::string id() const override { return "mock-hash"; }
  bool ready() const override { return loaded_; }
  Index dim() const override { return dim_; }
  Vector embed(const SpeakerEncoderInput &input) override;
  uint64_t parameter_checksum() const override;

 private:
  Index dim_;
  bool loaded_;
};

/// Fixed random projection of per-channel mel mean and standard deviation,
/// L2-normalised. Reads the mel input; computes it from the waveform when
/// only audio is given.
class MockSpectralSpeakerEncoder : public SpeakerEncoderProvider {
 public:
  explicit MockSpectralSpeakerEncoder(Index dim = 256, uint64_t seed = 7);
  std::string id() const override { return "mock-spectral"; }
  Index dim() const override { return projection_.cols(); }
  Vector embed(const SpeakerEncoderInput &input) override;
  uint64_t parameter_checksum() const override;

 private:
  Matrix projection_;  // 160 x dim
};

// --- vocoder ------------------------------------------------------------------

class VocoderProvider : public Provider {
 public:
  virtual int sample_rate() const = 0;
  virtual Waveform synthesize(const MelSpectrogram &mel) = 0;
};

/// One sinusoid per frame at the centre frequency of the loudest mel band,
/// amplitude from frame energy, continuous phase; 10 ms per frame.
class MockSineVocoder : public VocoderProvider {
 public:
  explicit MockSineVocoder(int sample_rate = 16000, bool loaded = true)
      : sample_rate_(sample_rate), loaded_(loaded) {}
  std::string id() const override { return "mock-sine"; }
  bool ready() const override { return loaded_; }
  int sample_rate() const override { return sample_rate_; }
  Waveform synthesize(const MelSpectrogram &mel) override;

 private:
  int sample_rate_;
  bool loaded_;
};

/// Requires an 80-channel sequence at 100 Hz (ShapeError otherwise).
Waveform vocode(const FrameSequence &mel, VocoderProvider &provider);

// --- bottleneck features --------------------------------------------------

class BnfExtractor {
 public:
  virtual ~BnfExtractor() = default;
  virtual Index bnf_dim() const = 0;
  virtual std::string checkpoint_id() const = 0;
  virtual uint64_t parameter_checksum() const = 0;
  virtual BottleneckFeatures extract(const UtteranceRecord &record,
                                     const Waveform &wave) = 0;
};

/// Upstream provider followed by a frozen acoustic model.
class AcousticModelBnfExtractor : public BnfExtractor {
 public:
  AcousticModelBnfExtractor(const AcousticModel &model,
                            UpstreamProvider &upstream);
  Index bnf_dim() const override { return model_.config().bnf_dim; }
  std::string checkpoint_id() const override;
  uint64_t parameter_checksum() const override;
  BottleneckFeatures extract(const UtteranceRecord &record,
                             const Waveform &wave) override;

 private:
  const AcousticModel &model_;
  UpstreamProvider &upstream_;
};

/// The utterance's own log-mel spectrogram. Pairs with
/// PassThroughSynthesizer for identity checks.
class MelBnfExtractor : public BnfExtractor {
 public:
  Index bnf_dim() const override { return kMelChannels; }
  std::string checkpoint_id() const override { return "mock-mel"; }
  uint64_t parameter_checksum() const override { return 0; }
  BottleneckFeatures extract(const UtteranceRecord &record,
                             const Waveform &wave) override;
};

/// Precomputed features at <dir>/<utterance_id>.facf.
class CachedBnfExtractor : public BnfExtractor {
 public:
  CachedBnfExtractor(std::filesystem::path dir, Index bnf_dim,
                     std::string checkpoint_id);
  Index bnf_dim() const override { return bnf_dim_; }
  std::string checkpoint_id() const override { return checkpoint_id_; }
  uint64_t parameter_checksum() const override { return 0; }
  BottleneckFeatures extract(const UtteranceRecord &record,
                             const Waveform &wave) override;

 private:
  std::filesystem::path dir_;
  Index bnf_dim_;
  std::string checkpoint_id_;
};

std::filesystem::path bnf_cache_path(const std::filesystem::path &dir,
                                     const std::string &utterance_id);

// --- synthesizer training ------------------------------------------------------

/// Which utterance fed each branch of one training step.
struct TrainingProvenance {
  std::string speaker_id;
  std::string bnf_utterance;
  std::string prosody_utterance;
  std::string target_utterance;
  std::string speaker_utterance;
};

struct SynthStepResult {
  double loss = 0.0;       // mel_loss + stop_loss
  double mel_loss = 0.0;   // mean absolute error
  double stop_loss = 0.0;  // binary cross entropy
  TrainingProvenance provenance;
};

/// Throws WiringError unless a and c are distinct utterances of one speaker.
void check_training_pair(const UtteranceRecord &a, const UtteranceRecord &c);

/// Components borrowed by the trainer. The BNF extractor and speaker
/// encoder stay frozen; prosody encoder and synthesizer are trained.
struct SynthesisComponents {
  BnfExtractor *bnf = nullptr;
  SpeakerEncoderProvider *speaker = nullptr;
  ProsodyEncoder *prosody = nullptr;
  TransformerSynthesizer *synthesizer = nullptr;
  WaveformLoader loader = load_record_audio;
};

class SynthesizerTrainer {
 public:
  SynthesizerTrainer(SynthesisComponents components, OptimizerSpec optimizer,
                     double learning_rate);

  /// One update from (A, C): BNF, prosody and target mel from A, speaker
  /// embedding from C.
  SynthStepResult train_step(const UtteranceRecord &a, const UtteranceRecord &c);
  /// Same loss without touching any parameter.
  SynthStepResult evaluate(const UtteranceRecord &a, const UtteranceRecord &c);

  long steps() const { return prosody_opt_.steps(); }
  void set_learning_rate(double lr) { learning_rate_ = lr; }
  double learning_rate() const { return learning_rate_; }

 private:
  SynthStepResult run(const UtteranceRecord &a, const UtteranceRecord &c,
                      bool update);

  SynthesisComponents c_;
  double learning_rate_;
  AdamOptimizer prosody_opt_;
  AdamOptimizer synth_opt_;
};

/// Free-function form of SynthesizerTrainer::train_step.
SynthStepResult train_synth_step(const UtteranceRecord &a,
                                 const UtteranceRecord &c,
                                 SynthesizerTrainer &trainer);

/// Draws `count` (A, C) pairs: A uniformly from records whose speaker has
/// at least two utterances, C uniformly among that speaker's others.
std::vector<std::pair<size_t, size_t>> sample_training_pairs(
    const std::vector<UtteranceRecord> &records, size_t count, uint64_t seed);

// --- conversion ------------------------------------------------------------

struct ConversionRequest {
  UtteranceRecord l2_utterance;
  UtteranceRecord l1_reference;
};

struct ConversionProvenance {
  std::string bnf_utterance;
  std::string bnf_speaker;
  std::string prosody_utterance;
  std::string speaker_utterance;
  std::map<std::string, std::string> checkpoints;  // branch -> checkpoint id

  nlohmann::json to_json() const;
  static ConversionProvenance from_json(const nlohmann::json &j);
};

struct ConversionModels {
  BnfExtractor *bnf = nullptr;
  const ProsodyEncoder *prosody = nullptr;
  SpeakerEncoderProvider *speaker = nullptr;
  const MelSynthesizer *synthesizer = nullptr;
  VocoderProvider *vocoder = nullptr;
  WaveformLoader loader = load_record_audio;
  /// When non-empty the L1 reference must come from this speaker.
  std::string l1_reference_speaker;
};

struct ConversionResult {
  MelSpectrogram mel;
  Waveform wave;
  Index stop_frame = -1;
  bool truncated = false;
  ConversionProvenance provenance;
};

/// BNF from the L1 reference, prosody and speaker embedding from the L2
/// utterance, autoregressive synthesis, vocoder. Transcripts must match
/// under normalize_transcript; that is checked before any model runs.
ConversionResult convert(const ConversionRequest &request,
                         ConversionModels &models);

/// "<audio>.provenance.json".
std::filesystem::path provenance_path(const std::filesystem::path &audio);
/// Writes the waveform and its provenance sidecar; returns both paths.
std::vector<std::filesystem::path> write_conversion(
    const std::filesystem::path &audio, const ConversionResult &result);
ConversionProvenance read_provenance(const std::filesystem::path &audio);

}  // namespace fac

#endif  // FAC_CONVERSION_HPP_
