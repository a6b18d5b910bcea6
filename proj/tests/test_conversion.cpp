// tests/test_conversion.cpp

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

#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "fac/conversion.hpp"
#include "fac/error.hpp"
#include "fac/feature_cache.hpp"
#include "fac/mel.hpp"
#include "fac/prosody_encoder.hpp"
#include "fac/random.hpp"
#include "fac/synthesizer.hpp"
#include "fac/wav_io.hpp"
#include "test_support.hpp"

using namespace fac;

namespace {

SynthesizerConfig tiny_synth(Index bnf_dim = 8) {
  SynthesizerConfig c;
  c.bnf_dim = bnf_dim;
  c.speaker_dim = 6;
  c.prosody_dim = 4;
  c.model_dim = 16;
  c.num_heads = 2;
  c.ffn_dim = 32;
  c.prenet_dim = 16;
  c.encoder_layers = 1;
  c.decoder_layers = 2;
  c.max_decode_frames = 30;
  return c;
}

ProsodyEncoderConfig tiny_prosody() {
  ProsodyEncoderConfig c;
  c.conv_channels = 8;
  c.lstm_hidden = 6;
  c.prosody_dim = 4;
  return c;
}

FeatureGeometry tiny_geometry() {
  FeatureGeometry g;
  g.upstream_dim = 8;
  g.ppg_dim = 7;
  return g;
}

AcousticModelConfig tiny_acoustic() {
  AcousticModelConfig c;
  c.input_dim = 8;
  c.bilstm_hidden = 4;
  c.bnf_dim = 8;
  c.ppg_dim = 7;
  return c;
}

MelSpectrogram random_mel(Index frames, uint64_t seed) {
  Rng rng(seed);
  return MelSpectrogram(FrameSequence(random_normal(frames, 80, 1.0, rng), 100.0));
}

BottleneckFeatures random_bnf(Index frames, Index dim, uint64_t seed) {
  Rng rng(seed);
  return {FrameSequence(random_normal(frames, dim, 1.0, rng), 100.0)};
}

SpeakerEmbedding random_speaker(Index dim, uint64_t seed) {
  Rng rng(seed);
  return {random_normal(dim, 1, 1.0, rng).col(0), "spk-src"};
}

ProsodyEmbedding random_prosody(Index dim, uint64_t seed) {
  Rng rng(seed);
  return {random_normal(dim, 1, 1.0, rng).col(0)};
}

struct FailingVocoder : VocoderProvider {
  std::string id() const override { return "failing-vocoder"; }
  int sample_rate() const override { return 16000; }
  Waveform synthesize(const MelSpectrogram &) override { throw std::runtime_error("no gpu"); }
};

// Everything needed for conversion on a small generated corpus.
struct ConversionRig {
  testing::TempDir dir{"conv"};
  testing::Corpus corpus;
  MelBnfExtractor bnf;
  ProsodyEncoder prosody{tiny_prosody()};
  MockSpectralSpeakerEncoder speaker{6};
  PassThroughSynthesizer synth;
  MockSineVocoder vocoder;
  ConversionRig() {
    corpus = testing::make_corpus(dir.path(), {"BDL", "NJS"}, 2, 0.6, 5);
    prosody.initialize(3);
  }
  ConversionModels models() {
    ConversionModels m;
    m.bnf = &bnf;
    m.prosody = &prosody;
    m.speaker = &speaker;
    m.synthesizer = &synth;
    m.vocoder = &vocoder;
    m.l1_reference_speaker = "BDL";
    return m;
  }
  const UtteranceRecord &record(const std::string &id) const {
    for (const auto &r : corpus.records)
      if (r.utterance_id == id) return r;
    throw NotFoundError(id);
  }
};

}  // namespace

TEST_CASE("prosody encoder: shape, determinism and errors") {
  ProsodyEncoder uninit(tiny_prosody());
  CHECK_THROWS_AS(uninit.encode(random_mel(10, 1)), StateError);
  ProsodyEncoder enc(tiny_prosody());
  enc.initialize(1);
  const auto mel = random_mel(198, 2);
  const auto a = encode_prosody(mel, enc);
  CHECK(a.vector.size() == 4);
  CHECK(a.vector == encode_prosody(mel, enc).vector);
  CHECK(a.vector != encode_prosody(random_mel(198, 3), enc).vector);
  CHECK_THROWS_AS(encode_prosody(MelSpectrogram(), enc), ValidationError);

  ProsodyEncoder full;
  full = ProsodyEncoder(ProsodyEncoderConfig{});
  full.initialize(1);
  CHECK(full.encode(mel).vector.size() == 128);

  testing::TempDir dir;
  enc.save(dir / "p");
  const auto back = ProsodyEncoder::load(dir / "p");
  CHECK(back.encode(mel).vector == a.vector);
}

TEST_CASE("prosody encoder: gradients match finite differences") {
  ProsodyEncoder enc(tiny_prosody());
  enc.initialize(4);
  const Matrix mel = random_mel(6, 5).values();
  Rng rng(6);
  const Matrix w = random_normal(1, 4, 1.0, rng);
  auto value = [&] {
    nn::Graph g(false);
    return (enc.build(g, mel).value().array() * w.array()).sum();
  };
  enc.parameters().zero_grad();
  nn::Graph g;
  const auto out = enc.build(g, mel);
  g.backward(nn::sum_all(nn::mask_mul(out, w)));
  for (auto &p : enc.parameters().items()) {
    const Matrix num = testing::numeric_gradient(p, value);
    INFO(p.name);
    CHECK((num - p.grad).cwiseAbs().maxCoeff() / std::max(1.0, num.cwiseAbs().maxCoeff()) < 1e-5);
  }
}

TEST_CASE("speaker encoders") {
  const Waveform w1 = testing::synth_waveform(0.5, 1), w2 = testing::synth_waveform(0.5, 2);
  MockHashSpeakerEncoder hash;
  const auto a = encode_speaker({"u1", "NJS", &w1, nullptr}, hash);
  const auto b = encode_speaker({"u2", "NJS", &w2, nullptr}, hash);
  const auto c = encode_speaker({"u3", "BDL", &w1, nullptr}, hash);
  CHECK(a.vector.size() == 256);
  CHECK(a.vector == b.vector);
  CHECK(a.vector != c.vector);
  CHECK(a.source_utterance_id == "u1");
  CHECK(a.vector.norm() == doctest::Approx(1.0));
  MockHashSpeakerEncoder unloaded(256, false);
  CHECK_THROWS_AS(encode_speaker({"u1", "NJS", &w1, nullptr}, unloaded), StateError);
  CHECK_THROWS_AS(encode_speaker({"u1", "", &w1, nullptr}, hash), ProviderError);

  MockSpectralSpeakerEncoder spectral(32);
  const auto from_wave = encode_speaker({"u1", "NJS", &w1, nullptr}, spectral);
  const MelSpectrogram mel = compute_mel(w1);
  const auto from_mel = encode_speaker({"u1", "NJS", nullptr, &mel}, spectral);
  CHECK(from_wave.vector.size() == 32);
  CHECK((from_wave.vector - from_mel.vector).norm() < 1e-12);
  CHECK(encode_speaker({"u2", "NJS", &w2, nullptr}, spectral).vector != from_wave.vector);
  CHECK_THROWS_AS(encode_speaker({"u1", "NJS", nullptr, nullptr}, spectral), ProviderError);
}

TEST_CASE("vocoder: duration, determinism and shape checks") {
  MockSineVocoder voc;
  const auto mel = random_mel(200, 1);
  const Waveform w = vocode(mel, voc);
  CHECK(std::abs(static_cast<double>(w.samples.size()) / 16000.0 - 2.0) <= 0.01);
  CHECK(vocode(mel, voc).samples == w.samples);
  CHECK_THROWS_AS(vocode(FrameSequence(Matrix::Zero(200, 40), 100.0), voc), ShapeError);
  MockSineVocoder off(16000, false);
  CHECK_THROWS_AS(vocode(mel, off), StateError);
  // The dominant band drives the pitch: band 40 is near 2 kHz.
  Matrix m = Matrix::Constant(50, 80, -5.0);
  m.col(40).setConstant(3.0);
  const Waveform tone = vocode(FrameSequence(m, 100.0), voc);
  int crossings = 0;
  for (size_t i = 1; i < tone.samples.size(); ++i)
    if ((tone.samples[i - 1] < 0) != (tone.samples[i] < 0)) ++crossings;
  const double hz = crossings / 2.0 / 0.5;
  const double mlo = hz_to_mel(0), mhi = hz_to_mel(8000);
  const double centre = mel_to_hz(mlo + (mhi - mlo) * 41 / 81.0);
  CHECK(std::abs(hz - centre) < 20.0);
}

TEST_CASE("synthesizer: teacher forcing length and autoregressive consistency") {
  TransformerSynthesizer s(tiny_synth());
  s.initialize(2);
  const auto bnf = random_bnf(12, 8, 1);
  const auto spk = random_speaker(6, 2);
  const auto pros = random_prosody(4, 3);
  for (Index frames : {1, 7, 200}) {
    const auto target = random_mel(frames, 4);
    const auto r = s.synthesize(bnf, spk, pros, SynthesisMode::kTeacherForced, &target);
    CHECK(r.mel.num_frames() == frames);
    CHECK(r.stop_logits.size() == frames);
    CHECK(r.mel.frame_rate() == 100.0);
  }
  CHECK_THROWS_AS(s.synthesize(bnf, spk, pros, SynthesisMode::kTeacherForced), ValidationError);

  // Feeding the autoregressive output back as the teacher-forcing target
  // reproduces it: the KV-cached decoder and the full graph agree.
  const auto ar = s.synthesize(bnf, spk, pros, SynthesisMode::kAutoregressive);
  REQUIRE(ar.mel.num_frames() >= 1);
  CHECK(ar.mel.num_frames() <= 30);
  const auto tf = s.synthesize(bnf, spk, pros, SynthesisMode::kTeacherForced, &ar.mel);
  CHECK((tf.mel.values() - ar.mel.values()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((tf.stop_logits - ar.stop_logits).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("synthesizer: stop behaviour and truncation cap") {
  TransformerSynthesizer s(tiny_synth());
  s.initialize(5);
  const auto bnf = random_bnf(5, 8, 1);
  const auto spk = random_speaker(6, 2);
  const auto pros = random_prosody(4, 3);
  s.parameters().at("out.stop.b").value.setConstant(-1e6);
  auto r = s.synthesize(bnf, spk, pros, SynthesisMode::kAutoregressive);
  CHECK(r.mel.num_frames() == 30);
  CHECK(r.truncated);
  CHECK(r.stop_frame == -1);

  SynthesizerConfig c = tiny_synth();
  c.max_decode_frames = 10;
  TransformerSynthesizer capped(c);
  capped.initialize(5);
  capped.parameters().at("out.stop.b").value.setConstant(-1e6);
  r = capped.synthesize(bnf, spk, pros, SynthesisMode::kAutoregressive);
  CHECK(r.mel.num_frames() == 10);
  CHECK(r.mel.num_channels() == 80);
  CHECK(r.truncated);

  s.parameters().at("out.stop.b").value.setConstant(1e6);
  r = s.synthesize(bnf, spk, pros, SynthesisMode::kAutoregressive);
  CHECK(r.mel.num_frames() == 1);
  CHECK(r.stop_frame == 0);
  CHECK_FALSE(r.truncated);
}

TEST_CASE("synthesizer: dimension checks, state and checkpoints") {
  TransformerSynthesizer s(tiny_synth());
  CHECK_THROWS_AS(s.synthesize(random_bnf(5, 8, 1), random_speaker(6, 2), random_prosody(4, 3),
                               SynthesisMode::kAutoregressive),
                  StateError);
  s.initialize(1);
  CHECK_THROWS_AS(s.synthesize(random_bnf(5, 9, 1), random_speaker(6, 2), random_prosody(4, 3),
                               SynthesisMode::kAutoregressive),
                  ShapeError);
  CHECK_THROWS_AS(s.synthesize(random_bnf(5, 8, 1), random_speaker(5, 2), random_prosody(4, 3),
                               SynthesisMode::kAutoregressive),
                  ShapeError);
  CHECK_THROWS_AS(s.synthesize(random_bnf(5, 8, 1), random_speaker(6, 2), random_prosody(3, 3),
                               SynthesisMode::kAutoregressive),
                  ShapeError);
  SynthesizerConfig bad = tiny_synth();
  bad.mel_dim = 40;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny_synth();
  bad.num_heads = 3;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  testing::TempDir dir;
  s.save(dir / "s");
  const auto back = TransformerSynthesizer::load(dir / "s");
  CHECK(back.checkpoint_id() == s.checkpoint_id());
  CHECK(back.config().to_json() == s.config().to_json());
  const auto x = back.synthesize(random_bnf(5, 8, 1), random_speaker(6, 2), random_prosody(4, 3),
                                 SynthesisMode::kAutoregressive);
  const auto y = s.synthesize(random_bnf(5, 8, 1), random_speaker(6, 2), random_prosody(4, 3),
                              SynthesisMode::kAutoregressive);
  CHECK(x.mel.values() == y.mel.values());
}

TEST_CASE("synthesizer: gradients match finite differences") {
  SynthesizerConfig c = tiny_synth(3);
  c.model_dim = 4;
  c.ffn_dim = 6;
  c.prenet_dim = 5;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  TransformerSynthesizer s(c);
  s.initialize(9);
  Rng rng(10);
  // Zero biases would put the prenet exactly on the ReLU kink for the
  // all-zero first decoder input.
  for (auto &p : s.parameters().items()) p.value += random_normal(p.value.rows(), p.value.cols(), 0.1, rng);
  const Matrix bnf = random_normal(4, 3, 1.0, rng);
  const Matrix spk = random_normal(1, 6, 1.0, rng);
  const Matrix pros = random_normal(1, 4, 1.0, rng);
  const Matrix target = random_normal(3, 80, 1.0, rng);
  const Matrix wm = random_normal(3, 80, 1.0, rng);
  const Matrix ws = random_normal(3, 1, 1.0, rng);
  auto objective = [&](nn::Graph &g) {
    const auto out = s.build(g, bnf, g.constant(spk), g.constant(pros), target);
    return nn::add(nn::sum_all(nn::mask_mul(out.mel, wm)), nn::sum_all(nn::mask_mul(out.stop_logits, ws)));
  };
  s.parameters().zero_grad();
  nn::Graph g;
  g.backward(objective(g));
  for (auto &p : s.parameters().items()) {
    const Matrix num = testing::numeric_gradient(p, [&] {
      nn::Graph h(false);
      return objective(h).value()(0, 0);
    });
    INFO(p.name);
    CHECK((num - p.grad).cwiseAbs().maxCoeff() / std::max(1.0, num.cwiseAbs().maxCoeff()) < 1e-5);
  }
}

TEST_CASE("synthesizer helpers") {
  Matrix t(3, 2);
  t << 1, 2, 3, 4, 5, 6;
  Matrix expect(3, 2);
  expect << 0, 0, 1, 2, 3, 4;
  CHECK(teacher_forcing_inputs(t) == expect);
  const Matrix st = stop_targets(4);
  CHECK(st.sum() == 1.0);
  CHECK(st(3, 0) == 1.0);
  const Matrix pe = positional_encoding(5, 6);
  CHECK(pe(0, 0) == 0.0);
  CHECK(pe(0, 1) == 1.0);
  CHECK(pe(3, 2) == doctest::Approx(std::sin(3.0 / std::pow(10000.0, 2.0 / 6))));
  CHECK(checksum_hex(255) == "00000000000000ff");
}

TEST_CASE("pass-through synthesizer") {
  PassThroughSynthesizer p;
  const auto mel = random_mel(12, 3);
  const auto r = p.synthesize({mel}, {}, {}, SynthesisMode::kAutoregressive);
  CHECK(r.mel.values() == mel.values());
  CHECK(r.stop_frame == 11);
  CHECK_THROWS_AS(p.synthesize(random_bnf(3, 8, 1), {}, {}, SynthesisMode::kAutoregressive), ShapeError);
}

TEST_CASE("training wiring: pair checks, provenance and frozen components") {
  testing::TempDir dir;
  const auto corpus = testing::make_corpus(dir.path(), {"BDL", "NJS", "TXHC"}, 3, 0.4, 7);
  auto upstream = MockUpstreamProvider(tiny_geometry());
  AcousticModel am(tiny_acoustic());
  am.initialize(1);
  AcousticModelBnfExtractor bnf(am, upstream);
  MockSpectralSpeakerEncoder spk(6);
  ProsodyEncoder pros(tiny_prosody());
  pros.initialize(2);
  TransformerSynthesizer synth(tiny_synth());
  synth.initialize(3);
  OptimizerSpec opt;
  SynthesizerTrainer trainer({&bnf, &spk, &pros, &synth}, opt, 1e-3);

  const auto &recs = corpus.records;
  CHECK_THROWS_AS(train_synth_step(recs[0], recs[0], trainer), WiringError);
  CHECK_THROWS_AS(train_synth_step(recs[0], recs[3], trainer), WiringError);
  CHECK(trainer.steps() == 0);

  const uint64_t am_sum = am.parameters().checksum();
  const uint64_t spk_sum = spk.parameter_checksum();
  const auto pairs = sample_training_pairs(recs, 12, 4);
  CHECK(pairs.size() == 12);
  std::set<std::string> speakers;
  uint64_t synth_sum = synth.parameters().checksum();
  uint64_t pros_sum = pros.parameters().checksum();
  for (const auto &[ia, ic] : pairs) {
    const auto r = train_synth_step(recs[ia], recs[ic], trainer);
    CHECK(std::isfinite(r.loss));
    CHECK(r.loss == doctest::Approx(r.mel_loss + r.stop_loss));
    const auto &p = r.provenance;
    CHECK(p.bnf_utterance == recs[ia].utterance_id);
    CHECK(p.prosody_utterance == p.bnf_utterance);
    CHECK(p.target_utterance == p.bnf_utterance);
    CHECK(p.speaker_utterance == recs[ic].utterance_id);
    CHECK(p.speaker_utterance != p.bnf_utterance);
    CHECK(recs[ia].speaker_id == recs[ic].speaker_id);
    speakers.insert(p.speaker_id);
    CHECK(am.parameters().checksum() == am_sum);
    CHECK(spk.parameter_checksum() == spk_sum);
    CHECK(synth.parameters().checksum() != synth_sum);
    CHECK(pros.parameters().checksum() != pros_sum);
    synth_sum = synth.parameters().checksum();
    pros_sum = pros.parameters().checksum();
  }
  CHECK(speakers.size() > 1);
  CHECK(trainer.steps() == 12);
  const auto before = synth.parameters().checksum();
  trainer.evaluate(recs[0], recs[1]);
  CHECK(synth.parameters().checksum() == before);
}

TEST_CASE("training: repeated steps on one pair reduce the loss") {
  testing::TempDir dir;
  const auto corpus = testing::make_corpus(dir.path(), {"NJS"}, 2, 0.3, 9);
  MelBnfExtractor bnf;
  MockHashSpeakerEncoder spk(6);
  ProsodyEncoder pros(tiny_prosody());
  pros.initialize(2);
  TransformerSynthesizer synth(tiny_synth(80));
  synth.initialize(3);
  SynthesizerTrainer trainer({&bnf, &spk, &pros, &synth}, OptimizerSpec{}, 3e-3);
  const auto &a = corpus.records[0], &c = corpus.records[1];
  const double first = trainer.evaluate(a, c).loss;
  for (int i = 0; i < 40; ++i) trainer.train_step(a, c);
  CHECK(trainer.evaluate(a, c).loss < 0.7 * first);
}

TEST_CASE("sample_training_pairs") {
  std::vector<UtteranceRecord> recs;
  for (const auto &[id, spk] : std::vector<std::pair<std::string, std::string>>{
           {"a1", "A"}, {"a2", "A"}, {"a3", "A"}, {"b1", "B"}, {"c1", "C"}, {"c2", "C"}}) {
    UtteranceRecord r;
    r.utterance_id = id;
    r.speaker_id = spk;
    recs.push_back(r);
  }
  const auto pairs = sample_training_pairs(recs, 500, 1);
  std::map<std::string, int> seen;
  for (const auto &[a, c] : pairs) {
    CHECK(a != c);
    CHECK(recs[a].speaker_id == recs[c].speaker_id);
    CHECK(recs[a].speaker_id != "B");
    ++seen[recs[a].utterance_id];
  }
  CHECK(seen.size() == 5);
  CHECK(sample_training_pairs(recs, 500, 1) == pairs);
  CHECK_THROWS(sample_training_pairs({recs[3]}, 5, 1));
}

TEST_CASE("convert: wiring and provenance") {
  ConversionRig rig;
  auto models = rig.models();
  const auto &l2 = rig.record("NJS_0");
  const auto &l1 = rig.record("BDL_0");
  const auto r = convert({l2, l1}, models);
  CHECK(r.provenance.bnf_utterance == "BDL_0");
  CHECK(r.provenance.bnf_speaker == "BDL");
  CHECK(r.provenance.prosody_utterance == "NJS_0");
  CHECK(r.provenance.speaker_utterance == "NJS_0");
  CHECK(r.provenance.checkpoints.at("bnf") == "mock-mel");
  CHECK(r.provenance.checkpoints.at("synthesizer") == "mock-passthrough");
  // Pass-through: output mel is the reference mel, 10 ms per frame.
  const auto ref_mel = compute_mel(read_wav(l1.audio_path));
  CHECK(r.mel.values() == ref_mel.values());
  CHECK(std::abs(static_cast<double>(r.wave.samples.size()) -
                 160.0 * static_cast<double>(r.mel.num_frames())) <= 160.0);

  const auto files = write_conversion(rig.dir / "out/conv.wav", r);
  CHECK(files.size() == 2);
  CHECK(std::filesystem::exists(provenance_path(rig.dir / "out/conv.wav")));
  const auto back = read_provenance(rig.dir / "out/conv.wav");
  CHECK(back.to_json() == r.provenance.to_json());
  CHECK(read_wav(rig.dir / "out/conv.wav").samples.size() == r.wave.samples.size());
}

TEST_CASE("convert: identity on the same utterance") {
  ConversionRig rig;
  auto models = rig.models();
  const auto &u = rig.record("BDL_1");
  const auto r = convert({u, u}, models);
  CHECK(r.mel.values() == compute_mel(read_wav(u.audio_path)).values());
}

TEST_CASE("convert: guards run before any model") {
  ConversionRig rig;
  UtteranceRecord l2 = rig.record("NJS_0");
  const auto &l1 = rig.record("BDL_1");
  ConversionModels empty;
  CHECK_THROWS_AS(convert({l2, l1}, empty), ValidationError);
  int loads = 0;
  auto models = rig.models();
  models.loader = [&](const UtteranceRecord &r) {
    ++loads;
    return load_record_audio(r);
  };
  CHECK_THROWS_AS(convert({l2, l1}, models), ValidationError);
  CHECK(loads == 0);
  CHECK_THROWS_AS(convert({l2, l2}, models), WiringError);
  CHECK(loads == 0);
  CHECK_THROWS_AS(convert({l2, rig.record("BDL_0")}, empty), StateError);
}

TEST_CASE("convert: provider failures name the branch") {
  ConversionRig rig;
  auto models = rig.models();
  FailingVocoder bad;
  models.vocoder = &bad;
  try {
    convert({rig.record("NJS_0"), rig.record("BDL_0")}, models);
    FAIL("expected ProviderError");
  } catch (const ProviderError &e) {
    CHECK(e.context().find("vocoder") != std::string::npos);
    CHECK(std::string(e.what()).find("no gpu") != std::string::npos);
  }
  models = rig.models();
  MockHashSpeakerEncoder unloaded(6, false);
  models.speaker = &unloaded;
  try {
    convert({rig.record("NJS_0"), rig.record("BDL_0")}, models);
    FAIL("expected ProviderError");
  } catch (const ProviderError &e) {
    CHECK(e.context().find("speaker") != std::string::npos);
  }
  models = rig.models();
  CachedBnfExtractor cached(rig.dir / "nocache", 80, "cache");
  models.bnf = &cached;
  try {
    convert({rig.record("NJS_0"), rig.record("BDL_0")}, models);
    FAIL("expected ProviderError");
  } catch (const ProviderError &e) {
    CHECK(e.context().find("bnf") != std::string::npos);
  }
}

TEST_CASE("convert: transformer synthesizer respects the decode cap") {
  ConversionRig rig;
  auto models = rig.models();
  SynthesizerConfig c = tiny_synth(80);
  c.max_decode_frames = 12;
  TransformerSynthesizer synth(c);
  synth.initialize(1);
  synth.parameters().at("out.stop.b").value.setConstant(-1e6);
  models.synthesizer = &synth;
  const auto r = convert({rig.record("NJS_0"), rig.record("BDL_0")}, models);
  CHECK(r.truncated);
  CHECK(r.mel.num_frames() == 12);
  CHECK(r.provenance.checkpoints.at("synthesizer") == synth.checkpoint_id());
}

TEST_CASE("cached BNF extractor reads precomputed features") {
  testing::TempDir dir;
  const auto seq = random_bnf(20, 8, 1).values;
  write_feature_cache(bnf_cache_path(dir.path(), "u1"), seq, CacheDtype::kFloat64);
  CachedBnfExtractor ex(dir.path(), 8, "acoustic-x");
  UtteranceRecord r;
  r.utterance_id = "u1";
  CHECK(ex.extract(r, Waveform{}).values.values() == seq.values());
  CachedBnfExtractor wrong(dir.path(), 9, "acoustic-x");
  CHECK_THROWS_AS(wrong.extract(r, Waveform{}), ShapeError);
  r.utterance_id = "u2";
  CHECK_THROWS_AS(ex.extract(r, Waveform{}), NotFoundError);
}
