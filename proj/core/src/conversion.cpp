// core/src/conversion.cpp

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

#include "fac/conversion.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "fac/error.hpp"
#include "fac/feature_cache.hpp"
#include "fac/mel.hpp"
#include "fac/random.hpp"
#include "fac/wav_io.hpp"

namespace fac {
namespace {

uint64_t fnv1a(const std::string &s, uint64_t h = 1469598103934665603ULL) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

Vector unit(Vector v) {
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

// Runs one branch of the conversion pipeline, tagging failures with the
// branch name.
template <typename Fn>
auto branch(const std::string &name, const std::string &component, Fn &&fn)
    -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception &e) {
    throw ProviderError(component, name + " branch", e.what());
  }
}

}  // namespace

// --- speaker encoder ----------------------------------------------------------

SpeakerEmbedding encode_speaker(const SpeakerEncoderInput &input,
                                SpeakerEncoderProvider &provider) {
  Vector v = provider.invoke("speaker embedding of " + input.utterance_id,
                             [&] { return provider.embed(input); });
  if (v.size() != provider.dim())
    throw ShapeError("speaker encoder '" + provider.id() + "' returned " +
                     std::to_string(v.size()) + " values, expected " +
                     std::to_string(provider.dim()));
  if (!v.allFinite())
    throw ValidationError("speaker encoder '" + provider.id() +
                          "' returned non-finite values");
  return SpeakerEmbedding{std::move(v), input.utterance_id};
}

Vector MockHashSpeakerEncoder::embed(const SpeakerEncoderInput &input) {
  if (input.speaker_id.empty())
    throw ValidationError("mock-hash speaker encoder needs a speaker id");
  Rng rng(fnv1a(input.speaker_id));
  return unit(random_normal(dim_, 1, 1.0, rng).col(0));
}

uint64_t MockHashSpeakerEncoder::parameter_checksum() const {
  return fnv1a("mock-hash:" + std::to_string(dim_));
}

MockSpectralSpeakerEncoder::MockSpectralSpeakerEncoder(Index dim, uint64_t seed) {
  if (dim < 1) throw ConfigError("speaker encoder dim must be >= 1");
  Rng rng(mix_seed(seed, 0x5bea));
  projection_ = random_normal(2 * kMelChannels, dim,
                              1.0 / std::sqrt(2.0 * kMelChannels), rng);
}

Vector MockSpectralSpeakerEncoder::embed(const SpeakerEncoderInput &input) {
  MelSpectrogram computed;
  const MelSpectrogram *mel = input.mel;
  if (mel == nullptr) {
    if (input.wave == nullptr)
      throw ValidationError("mock-spectral speaker encoder needs audio or mel");
    computed = compute_mel(*input.wave);
    mel = &computed;
  }
  if (mel->empty()) throw ValidationError("speaker encoder: empty mel");
  const Matrix &m = mel->values();
  RowVector stats(2 * kMelChannels);
  const RowVector mean = m.colwise().mean();
  stats.head(kMelChannels) = mean;
  stats.tail(kMelChannels) =
      ((m.rowwise() - mean).array().square().colwise().mean()).sqrt().matrix();
  return unit((stats * projection_).transpose());
}

uint64_t MockSpectralSpeakerEncoder::parameter_checksum() const {
  const auto *bytes = reinterpret_cast<const char *>(projection_.data());
  return fnv1a(std::string(bytes, bytes + projection_.size() * sizeof(double)));
}

// --- vocoder ------------------------------------------------------------------

Waveform MockSineVocoder::synthesize(const MelSpectrogram &mel) {
  // Centre frequencies of the 80 HTK-mel bands over 0..8 kHz.
  const double top = hz_to_mel(8000.0);
  const Index hop = sample_rate_ / 100;
  Waveform w;
  w.sample_rate = sample_rate_;
  w.samples.reserve(static_cast<size_t>(mel.num_frames() * hop));
  double phase = 0.0;
  for (Index t = 0; t < mel.num_frames(); ++t) {
    Index k = 0;
    mel.values().row(t).maxCoeff(&k);
    const double freq = mel_to_hz(top * double(k + 1) / double(kMelChannels + 1));
    const double energy = mel.values().row(t).array().exp().mean();
    const double amp = 0.5 * std::tanh(std::sqrt(energy));
    const double step = 2.0 * std::numbers::pi * freq / sample_rate_;
    for (Index i = 0; i < hop; ++i) {
      w.samples.push_back(amp * std::sin(phase));
      phase = std::fmod(phase + step, 2.0 * std::numbers::pi);
    }
  }
  return w;
}

Waveform vocode(const FrameSequence &mel, VocoderProvider &provider) {
  if (mel.num_channels() != kMelChannels)
    throw ShapeError("vocoder expects 80-channel mel, got " +
                     std::to_string(mel.num_channels()));
  const MelSpectrogram m(mel);
  Waveform w = provider.invoke("vocoder", [&] { return provider.synthesize(m); });
  if (w.sample_rate != provider.sample_rate())
    throw ValidationError("vocoder '" + provider.id() +
                          "' returned audio at an unexpected rate");
  return w;
}

// --- bottleneck features ----------------------------------------------------

AcousticModelBnfExtractor::AcousticModelBnfExtractor(const AcousticModel &model,
                                                     UpstreamProvider &upstream)
    : model_(model), upstream_(upstream) {
  if (!model.initialized()) throw StateError("acoustic model is not initialized");
}

std::string AcousticModelBnfExtractor::checkpoint_id() const {
  return "acoustic-" + checksum_hex(parameter_checksum());
}

uint64_t AcousticModelBnfExtractor::parameter_checksum() const {
  return model_.parameters().checksum();
}

BottleneckFeatures AcousticModelBnfExtractor::extract(const UtteranceRecord &record,
                                                      const Waveform &wave) {
  const UpstreamEmbedding emb = get_upstream_embeddings(
      wave, upstream_, model_.config().geometry(), record.utterance_id);
  return model_.extract_bnf(emb);
}

BottleneckFeatures MelBnfExtractor::extract(const UtteranceRecord &,
                                            const Waveform &wave) {
  return BottleneckFeatures{compute_mel(wave)};
}

std::filesystem::path bnf_cache_path(const std::filesystem::path &dir,
                                     const std::string &utterance_id) {
  return dir / (utterance_id + ".facf");
}

CachedBnfExtractor::CachedBnfExtractor(std::filesystem::path dir, Index bnf_dim,
                                       std::string checkpoint_id)
    : dir_(std::move(dir)), bnf_dim_(bnf_dim), checkpoint_id_(std::move(checkpoint_id)) {}

BottleneckFeatures CachedBnfExtractor::extract(const UtteranceRecord &record,
                                               const Waveform &) {
  const auto path = bnf_cache_path(dir_, record.utterance_id);
  if (!std::filesystem::exists(path))
    throw NotFoundError("no cached bottleneck features for " + record.utterance_id +
                        " in " + dir_.string());
  FrameSequence seq = read_feature_cache(path);
  if (seq.num_channels() != bnf_dim_)
    throw ShapeError(path.string() + ": expected " + std::to_string(bnf_dim_) +
                     " channels, found " + std::to_string(seq.num_channels()));
  return BottleneckFeatures{std::move(seq)};
}

// --- synthesizer training -------------------------------------------------------

void check_training_pair(const UtteranceRecord &a, const UtteranceRecord &c) {
  if (a.utterance_id == c.utterance_id)
    throw WiringError("speaker reference must be a different utterance than '" +
                      a.utterance_id + "'");
  if (a.speaker_id != c.speaker_id)
    throw WiringError("speaker reference '" + c.utterance_id + "' (" + c.speaker_id +
                      ") is not from the speaker of '" + a.utterance_id + "' (" +
                      a.speaker_id + ")");
}

SynthesizerTrainer::SynthesizerTrainer(SynthesisComponents components,
                                       OptimizerSpec optimizer,
                                       double learning_rate)
    : c_(std::move(components)),
      learning_rate_(learning_rate),
      prosody_opt_(c_.prosody->parameters(), optimizer),
      synth_opt_(c_.synthesizer->parameters(), optimizer) {
  if (!c_.bnf || !c_.speaker || !c_.prosody || !c_.synthesizer)
    throw StateError("synthesizer trainer needs every component");
  if (!c_.loader) throw StateError("synthesizer trainer needs a waveform loader");
  const SynthesizerConfig &sc = c_.synthesizer->config();
  if (c_.bnf->bnf_dim() != sc.bnf_dim)
    throw ShapeError("bnf_dim mismatch: extractor " + std::to_string(c_.bnf->bnf_dim()) +
                     ", synthesizer " + std::to_string(sc.bnf_dim));
  if (c_.speaker->dim() != sc.speaker_dim)
    throw ShapeError("speaker_dim mismatch: encoder " + std::to_string(c_.speaker->dim()) +
                     ", synthesizer " + std::to_string(sc.speaker_dim));
  if (c_.prosody->config().prosody_dim != sc.prosody_dim)
    throw ShapeError("prosody_dim mismatch between prosody encoder and synthesizer");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

SynthStepResult SynthesizerTrainer::run(const UtteranceRecord &a,
                                        const UtteranceRecord &c, bool update) {
  check_training_pair(a, c);
  const Waveform wave_a = c_.loader(a);
  const Waveform wave_c = c_.loader(c);
  const MelSpectrogram mel_a = compute_mel(wave_a);
  const MelSpectrogram mel_c = compute_mel(wave_c);
  const BottleneckFeatures bnf = c_.bnf->extract(a, wave_a);
  const SpeakerEmbedding spk = encode_speaker(
      SpeakerEncoderInput{c.utterance_id, c.speaker_id, &wave_c, &mel_c}, *c_.speaker);

  nn::Graph g(update);
  nn::Var pros = c_.prosody->build(g, mel_a.values());
  auto out = c_.synthesizer->build(g, bnf.values.values(),
                                   g.constant(spk.vector.transpose()), pros,
                                   mel_a.values());
  nn::Var mel_loss = nn::l1_loss(out.mel, mel_a.values());
  nn::Var stop_loss = nn::bce_with_logits(out.stop_logits, stop_targets(mel_a.num_frames()));
  nn::Var loss = nn::add(mel_loss, stop_loss);

  SynthStepResult r;
  r.loss = loss.value()(0, 0);
  r.mel_loss = mel_loss.value()(0, 0);
  r.stop_loss = stop_loss.value()(0, 0);
  r.provenance = TrainingProvenance{a.speaker_id, a.utterance_id, a.utterance_id,
                                    a.utterance_id, spk.source_utterance_id};
  if (!std::isfinite(r.loss))
    throw DivergenceError("synthesizer loss is not finite at step " +
                          std::to_string(steps()));
  if (update) {
    c_.prosody->parameters().zero_grad();
    c_.synthesizer->parameters().zero_grad();
    g.backward(loss);
    prosody_opt_.step(learning_rate_);
    synth_opt_.step(learning_rate_);
  }
  return r;
}

SynthStepResult SynthesizerTrainer::train_step(const UtteranceRecord &a,
                                               const UtteranceRecord &c) {
  return run(a, c, true);
}

SynthStepResult SynthesizerTrainer::evaluate(const UtteranceRecord &a,
                                             const UtteranceRecord &c) {
  return run(a, c, false);
}

SynthStepResult train_synth_step(const UtteranceRecord &a, const UtteranceRecord &c,
                                 SynthesizerTrainer &trainer) {
  return trainer.train_step(a, c);
}

std::vector<std::pair<size_t, size_t>> sample_training_pairs(
    const std::vector<UtteranceRecord> &records, size_t count, uint64_t seed) {
  std::map<std::string, std::vector<size_t>> by_speaker;
  for (size_t i = 0; i < records.size(); ++i)
    by_speaker[records[i].speaker_id].push_back(i);
  std::vector<size_t> eligible;
  for (size_t i = 0; i < records.size(); ++i)
    if (by_speaker[records[i].speaker_id].size() >= 2) eligible.push_back(i);
  if (eligible.empty())
    throw ValidationError("no speaker has two or more utterances to pair");
  Rng rng(mix_seed(seed, 0x9a1));
  std::vector<std::pair<size_t, size_t>> pairs;
  pairs.reserve(count);
  for (size_t n = 0; n < count; ++n) {
    const size_t a = eligible[std::uniform_int_distribution<size_t>(0, eligible.size() - 1)(rng)];
    const auto &same = by_speaker[records[a].speaker_id];
    size_t c = a;
    while (c == a) c = same[std::uniform_int_distribution<size_t>(0, same.size() - 1)(rng)];
    pairs.emplace_back(a, c);
  }
  return pairs;
}

// --- conversion -------------------------------------------------------------

nlohmann::json ConversionProvenance::to_json() const {
  return {{"bnf", {{"utterance_id", bnf_utterance}, {"speaker_id", bnf_speaker}}},
          {"prosody", {{"utterance_id", prosody_utterance}}},
          {"speaker", {{"utterance_id", speaker_utterance}}},
          {"checkpoints", checkpoints}};
}

ConversionProvenance ConversionProvenance::from_json(const nlohmann::json &j) {
  try {
    ConversionProvenance p;
    p.bnf_utterance = j.at("bnf").at("utterance_id").get<std::string>();
    p.bnf_speaker = j.at("bnf").at("speaker_id").get<std::string>();
    p.prosody_utterance = j.at("prosody").at("utterance_id").get<std::string>();
    p.speaker_utterance = j.at("speaker").at("utterance_id").get<std::string>();
    p.checkpoints = j.at("checkpoints").get<std::map<std::string, std::string>>();
    return p;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("provenance: ") + e.what());
  }
}

ConversionResult convert(const ConversionRequest &request, ConversionModels &models) {
  const UtteranceRecord &l2 = request.l2_utterance;
  const UtteranceRecord &l1 = request.l1_reference;
  if (normalize_transcript(l2.transcript) != normalize_transcript(l1.transcript))
    throw ValidationError("transcript mismatch between '" + l2.utterance_id +
                          "' and reference '" + l1.utterance_id + "'");
  if (!models.bnf || !models.prosody || !models.speaker || !models.synthesizer ||
      !models.vocoder || !models.loader)
    throw StateError("conversion needs every model handle");
  if (!models.l1_reference_speaker.empty() && l1.speaker_id != models.l1_reference_speaker)
    throw WiringError("reference '" + l1.utterance_id + "' is from speaker " +
                      l1.speaker_id + ", expected " + models.l1_reference_speaker);

  const BottleneckFeatures bnf = branch("bnf", models.bnf->checkpoint_id(), [&] {
    return models.bnf->extract(l1, models.loader(l1));
  });
  const Waveform l2_wave = branch("prosody", "loader", [&] { return models.loader(l2); });
  const MelSpectrogram l2_mel =
      branch("prosody", "mel", [&] { return compute_mel(l2_wave); });
  const ProsodyEmbedding pros =
      branch("prosody", "prosody-encoder", [&] { return models.prosody->encode(l2_mel); });
  const SpeakerEmbedding spk = branch("speaker", models.speaker->id(), [&] {
    return encode_speaker(
        SpeakerEncoderInput{l2.utterance_id, l2.speaker_id, &l2_wave, &l2_mel},
        *models.speaker);
  });
  SynthesisResult syn = branch("synthesizer", models.synthesizer->id(), [&] {
    return models.synthesizer->synthesize(bnf, spk, pros, SynthesisMode::kAutoregressive);
  });
  Waveform wave = branch("vocoder", models.vocoder->id(),
                         [&] { return vocode(syn.mel, *models.vocoder); });

  ConversionResult r;
  r.mel = std::move(syn.mel);
  r.wave = std::move(wave);
  r.stop_frame = syn.stop_frame;
  r.truncated = syn.truncated;
  r.provenance.bnf_utterance = l1.utterance_id;
  r.provenance.bnf_speaker = l1.speaker_id;
  r.provenance.prosody_utterance = l2.utterance_id;
  r.provenance.speaker_utterance = spk.source_utterance_id;
  r.provenance.checkpoints = {
      {"bnf", models.bnf->checkpoint_id()},
      {"prosody", "prosody-" + checksum_hex(models.prosody->parameters().checksum())},
      {"speaker", models.speaker->id() + "-" +
                      checksum_hex(models.speaker->parameter_checksum())},
      {"synthesizer", models.synthesizer->checkpoint_id()},
      {"vocoder", models.vocoder->id()}};
  return r;
}

std::filesystem::path provenance_path(const std::filesystem::path &audio) {
  return audio.string() + ".provenance.json";
}

std::vector<std::filesystem::path> write_conversion(const std::filesystem::path &audio,
                                                    const ConversionResult &result) {
  if (audio.has_parent_path()) std::filesystem::create_directories(audio.parent_path());
  write_wav(audio, result.wave);
  const auto sidecar = provenance_path(audio);
  std::ofstream out(sidecar);
  if (!out) throw IoError("cannot write " + sidecar.string());
  nlohmann::json j = result.provenance.to_json();
  j["mel_frames"] = result.mel.num_frames();
  j["stop_frame"] = result.stop_frame;
  j["truncated"] = result.truncated;
  j["sample_rate"] = result.wave.sample_rate;
  j["samples"] = result.wave.samples.size();
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + sidecar.string());
  return {audio, sidecar};
}

ConversionProvenance read_provenance(const std::filesystem::path &audio) {
  const auto sidecar = provenance_path(audio);
  std::ifstream in(sidecar);
  if (!in) throw IoError("cannot read " + sidecar.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(sidecar.string() + ": " + e.what());
  }
  return ConversionProvenance::from_json(j);
}

}  // namespace fac
