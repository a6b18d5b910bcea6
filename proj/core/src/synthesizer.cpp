// core/src/synthesizer.cpp

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

#include "fac/synthesizer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fac/error.hpp"
#include "fac/random.hpp"

namespace fac {
namespace {

constexpr double kLayerNormEps = 1e-5;

std::string layer(const char *stack, int l, const char *rest) {
  return std::string(stack) + "." + std::to_string(l) + "." + rest;
}

// --- plain-matrix mirrors of the graph ops, for incremental decoding ---

RowVector layer_norm_row(const RowVector &x, const Matrix &gain,
                         const Matrix &bias) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  RowVector y = ((x.array() - mean) / std::sqrt(var + kLayerNormEps)).matrix();
  return (y.array() * gain.row(0).array()).matrix() + bias.row(0);
}

RowVector softmax_row(const RowVector &z) {
  const double m = z.maxCoeff();
  RowVector e = (z.array() - m).exp().matrix();
  return e / e.sum();
}

// One query row against cached keys/values, split into heads.
RowVector attend_row(const RowVector &q, const Matrix &keys,
                     const Matrix &values, Index heads) {
  const Index dh = q.size() / heads;
  const double s = 1.0 / std::sqrt(static_cast<double>(dh));
  RowVector out(q.size());
  for (Index h = 0; h < heads; ++h) {
    RowVector scores =
        (q.segment(h * dh, dh) * keys.middleCols(h * dh, dh).transpose()) * s;
    out.segment(h * dh, dh) = softmax_row(scores) * values.middleCols(h * dh, dh);
  }
  return out;
}

}  // namespace

void SynthesizerConfig::validate() const {
  auto positive = [](Index v, const char *field) {
    if (v < 1) throw ConfigError(std::string("synthesizer.") + field + " must be >= 1");
  };
  positive(bnf_dim, "bnf_dim");
  positive(speaker_dim, "speaker_dim");
  positive(prosody_dim, "prosody_dim");
  positive(model_dim, "model_dim");
  positive(num_heads, "num_heads");
  positive(ffn_dim, "ffn_dim");
  positive(prenet_dim, "prenet_dim");
  positive(max_decode_frames, "max_decode_frames");
  if (mel_dim != kMelChannels) throw ConfigError("synthesizer.mel_dim must be 80");
  if (model_dim % num_heads != 0)
    throw ConfigError("synthesizer.model_dim must be divisible by num_heads");
  if (encoder_layers < 0) throw ConfigError("synthesizer.encoder_layers must be >= 0");
  if (decoder_layers < 1) throw ConfigError("synthesizer.decoder_layers must be >= 1");
  if (!(stop_threshold > 0.0 && stop_threshold < 1.0))
    throw ConfigError("synthesizer.stop_threshold must be in (0, 1)");
}

nlohmann::json SynthesizerConfig::to_json() const {
  return {{"bnf_dim", bnf_dim},
          {"speaker_dim", speaker_dim},
          {"prosody_dim", prosody_dim},
          {"mel_dim", mel_dim},
          {"model_dim", model_dim},
          {"num_heads", num_heads},
          {"ffn_dim", ffn_dim},
          {"prenet_dim", prenet_dim},
          {"encoder_layers", encoder_layers},
          {"decoder_layers", decoder_layers},
          {"max_decode_frames", max_decode_frames},
          {"stop_threshold", stop_threshold}};
}

SynthesizerConfig SynthesizerConfig::from_json(const nlohmann::json &j) {
  SynthesizerConfig c;
  try {
    c.bnf_dim = j.value("bnf_dim", c.bnf_dim);
    c.speaker_dim = j.value("speaker_dim", c.speaker_dim);
    c.prosody_dim = j.value("prosody_dim", c.prosody_dim);
    c.mel_dim = j.value("mel_dim", c.mel_dim);
    c.model_dim = j.value("model_dim", c.model_dim);
    c.num_heads = j.value("num_heads", c.num_heads);
    c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
    c.prenet_dim = j.value("prenet_dim", c.prenet_dim);
    c.encoder_layers = j.value("encoder_layers", c.encoder_layers);
    c.decoder_layers = j.value("decoder_layers", c.decoder_layers);
    c.max_decode_frames = j.value("max_decode_frames", c.max_decode_frames);
    c.stop_threshold = j.value("stop_threshold", c.stop_threshold);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("synthesizer: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

RowVector positional_row(Index t, Index dim) {
  RowVector pe(dim);
  for (Index i = 0; i < dim; ++i) {
    const double freq = std::pow(10000.0, -2.0 * double(i / 2) / double(dim));
    pe(i) = i % 2 == 0 ? std::sin(t * freq) : std::cos(t * freq);
  }
  return pe;
}

}  // namespace

Matrix positional_encoding(Index rows, Index dim) {
  Matrix pe(rows, dim);
  for (Index t = 0; t < rows; ++t) pe.row(t) = positional_row(t, dim);
  return pe;
}

Matrix teacher_forcing_inputs(const Matrix &target) {
  Matrix in = Matrix::Zero(target.rows(), target.cols());
  if (target.rows() > 1) in.bottomRows(target.rows() - 1) = target.topRows(target.rows() - 1);
  return in;
}

Matrix stop_targets(Index frames) {
  Matrix s = Matrix::Zero(frames, 1);
  if (frames > 0) s(frames - 1, 0) = 1.0;
  return s;
}

std::string checksum_hex(uint64_t checksum) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(checksum));
  return buf;
}

TransformerSynthesizer::TransformerSynthesizer(SynthesizerConfig config)
    : config_(config) {
  config_.validate();
  const Index d = config_.model_dim, f = config_.ffn_dim;
  auto dense = [&](const std::string &p, Index in, Index out) {
    params_.add(p + ".w", Matrix::Zero(in, out));
    params_.add(p + ".b", Matrix::Zero(1, out));
  };
  auto norm = [&](const std::string &p) {
    params_.add(p + ".g", Matrix::Ones(1, d));
    params_.add(p + ".b", Matrix::Zero(1, d));
  };
  auto attn = [&](const std::string &p) {
    params_.add(p + ".wq", Matrix::Zero(d, d));
    params_.add(p + ".wk", Matrix::Zero(d, d));
    params_.add(p + ".wv", Matrix::Zero(d, d));
    dense(p + ".out", d, d);
  };
  dense("enc.in", config_.bnf_dim, d);
  for (int l = 0; l < config_.encoder_layers; ++l) {
    norm(layer("enc", l, "ln1"));
    attn(layer("enc", l, "attn"));
    norm(layer("enc", l, "ln2"));
    dense(layer("enc", l, "ffn1"), d, f);
    dense(layer("enc", l, "ffn2"), f, d);
  }
  norm("enc.ln");
  dense("cond", d + config_.speaker_dim + config_.prosody_dim, d);
  dense("dec.pre1", config_.mel_dim, config_.prenet_dim);
  dense("dec.pre2", config_.prenet_dim, d);
  for (int l = 0; l < config_.decoder_layers; ++l) {
    norm(layer("dec", l, "ln1"));
    attn(layer("dec", l, "self"));
    norm(layer("dec", l, "ln2"));
    attn(layer("dec", l, "cross"));
    norm(layer("dec", l, "ln3"));
    dense(layer("dec", l, "ffn1"), d, f);
    dense(layer("dec", l, "ffn2"), f, d);
  }
  norm("dec.ln");
  dense("out.mel", d, config_.mel_dim);
  dense("out.stop", d, 1);
}

void TransformerSynthesizer::initialize(uint64_t seed) {
  if (params_.empty()) throw StateError("synthesizer has no configuration");
  Rng rng(mix_seed(seed, 0x5e9));
  for (auto &p : params_.items()) {
    const auto dot = p.name.rfind('.');
    const std::string leaf = p.name.substr(dot + 1);
    const std::string owner = p.name.substr(0, dot);
    const bool is_norm = owner.substr(owner.rfind('.') + 1).rfind("ln", 0) == 0;
    if (is_norm) {
      p.value.setConstant(leaf == "g" ? 1.0 : 0.0);
    } else if (leaf == "b") {
      p.value.setZero();
    } else {
      // Glorot uniform.
      const double bound = std::sqrt(6.0 / double(p.value.rows() + p.value.cols()));
      p.value = random_uniform(p.value.rows(), p.value.cols(), -bound, bound, rng);
    }
  }
  params_.zero_grad();
  initialized_ = true;
}

std::string TransformerSynthesizer::checkpoint_id() const {
  return "transformer-" + checksum_hex(params_.checksum());
}

namespace {

template <typename Bind>
nn::Var attention_block(nn::Var q_in, nn::Var kv_in, const std::string &p,
                        Index heads, bool causal, Bind &bind) {
  nn::Var q = nn::matmul(q_in, bind(p + ".wq"));
  nn::Var k = nn::matmul(kv_in, bind(p + ".wk"));
  nn::Var v = nn::matmul(kv_in, bind(p + ".wv"));
  const Index dh = q.cols() / heads;
  const double s = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<nn::Var> outs;
  for (Index h = 0; h < heads; ++h) {
    nn::Var qh = nn::slice_cols(q, h * dh, dh);
    nn::Var kh = nn::slice_cols(k, h * dh, dh);
    nn::Var vh = nn::slice_cols(v, h * dh, dh);
    nn::Var w = nn::softmax_rows(nn::scale(nn::matmul(qh, nn::transpose(kh)), s), causal);
    outs.push_back(nn::matmul(w, vh));
  }
  return nn::linear(nn::concat_cols(outs), bind(p + ".out.w"), bind(p + ".out.b"));
}

template <typename Bind>
nn::Var norm_block(nn::Var x, const std::string &p, Bind &bind) {
  return nn::layer_norm(x, bind(p + ".g"), bind(p + ".b"), kLayerNormEps);
}

template <typename Bind>
nn::Var ffn_block(nn::Var x, const std::string &p1, const std::string &p2,
                  Bind &bind) {
  nn::Var h = nn::relu(nn::linear(x, bind(p1 + ".w"), bind(p1 + ".b")));
  return nn::linear(h, bind(p2 + ".w"), bind(p2 + ".b"));
}

}  // namespace

template <typename Bind>
nn::Var TransformerSynthesizer::build_memory(nn::Graph &g, const Matrix &bnf,
                                             nn::Var speaker, nn::Var prosody,
                                             Bind &&bind) const {
  const Index T = bnf.rows(), d = config_.model_dim;
  nn::Var x = nn::linear(g.constant(bnf), bind("enc.in.w"), bind("enc.in.b"));
  x = nn::add(x, g.constant(positional_encoding(T, d)));
  for (int l = 0; l < config_.encoder_layers; ++l) {
    nn::Var y = norm_block(x, layer("enc", l, "ln1"), bind);
    x = nn::add(x, attention_block(y, y, layer("enc", l, "attn"), config_.num_heads,
                                   false, bind));
    y = norm_block(x, layer("enc", l, "ln2"), bind);
    x = nn::add(x, ffn_block(y, layer("enc", l, "ffn1"), layer("enc", l, "ffn2"), bind));
  }
  x = norm_block(x, "enc.ln", bind);
  nn::Var cond = nn::concat_cols(
      {x, nn::broadcast_rows(speaker, T), nn::broadcast_rows(prosody, T)});
  return nn::linear(cond, bind("cond.w"), bind("cond.b"));
}

template <typename Bind>
TransformerSynthesizer::Outputs TransformerSynthesizer::build_decoder(
    nn::Graph &g, nn::Var memory, const Matrix &inputs, Bind &&bind) const {
  nn::Var x = g.constant(inputs);
  x = nn::relu(nn::linear(x, bind("dec.pre1.w"), bind("dec.pre1.b")));
  x = nn::relu(nn::linear(x, bind("dec.pre2.w"), bind("dec.pre2.b")));
  x = nn::add(x, g.constant(positional_encoding(inputs.rows(), config_.model_dim)));
  for (int l = 0; l < config_.decoder_layers; ++l) {
    nn::Var y = norm_block(x, layer("dec", l, "ln1"), bind);
    x = nn::add(x, attention_block(y, y, layer("dec", l, "self"), config_.num_heads,
                                   true, bind));
    y = norm_block(x, layer("dec", l, "ln2"), bind);
    x = nn::add(x, attention_block(y, memory, layer("dec", l, "cross"),
                                   config_.num_heads, false, bind));
    y = norm_block(x, layer("dec", l, "ln3"), bind);
    x = nn::add(x, ffn_block(y, layer("dec", l, "ffn1"), layer("dec", l, "ffn2"), bind));
  }
  x = norm_block(x, "dec.ln", bind);
  return Outputs{nn::linear(x, bind("out.mel.w"), bind("out.mel.b")),
                 nn::linear(x, bind("out.stop.w"), bind("out.stop.b"))};
}

TransformerSynthesizer::Outputs TransformerSynthesizer::build(
    nn::Graph &g, const Matrix &bnf, nn::Var speaker, nn::Var prosody,
    const Matrix &target) {
  if (!initialized_) throw StateError("synthesizer is not initialized");
  if (bnf.rows() == 0) throw ValidationError("synthesizer: empty bottleneck features");
  if (bnf.cols() != config_.bnf_dim)
    throw ShapeError("synthesizer expects bnf_dim " + std::to_string(config_.bnf_dim) +
                     ", got " + std::to_string(bnf.cols()));
  if (speaker.rows() != 1 || speaker.cols() != config_.speaker_dim)
    throw ShapeError("synthesizer expects a 1x" + std::to_string(config_.speaker_dim) +
                     " speaker embedding");
  if (prosody.rows() != 1 || prosody.cols() != config_.prosody_dim)
    throw ShapeError("synthesizer expects a 1x" + std::to_string(config_.prosody_dim) +
                     " prosody embedding");
  if (target.rows() == 0) throw ValidationError("synthesizer: empty target mel");
  if (target.cols() != config_.mel_dim) throw ShapeError("synthesizer: target is not 80-channel");
  auto bind = [&](const std::string &n) { return g.param(params_.at(n)); };
  nn::Var memory = build_memory(g, bnf, speaker, prosody, bind);
  return build_decoder(g, memory, teacher_forcing_inputs(target), bind);
}

void TransformerSynthesizer::check_inputs(const BottleneckFeatures &bnf,
                                          const SpeakerEmbedding &spk,
                                          const ProsodyEmbedding &pros) const {
  if (!initialized_) throw StateError("synthesizer is not initialized");
  if (bnf.values.empty()) throw ValidationError("synthesizer: empty bottleneck features");
  if (bnf.values.num_channels() != config_.bnf_dim)
    throw ShapeError("synthesizer expects bnf_dim " + std::to_string(config_.bnf_dim) +
                     ", got " + std::to_string(bnf.values.num_channels()));
  if (spk.vector.size() != config_.speaker_dim)
    throw ShapeError("synthesizer expects speaker_dim " +
                     std::to_string(config_.speaker_dim) + ", got " +
                     std::to_string(spk.vector.size()));
  if (pros.vector.size() != config_.prosody_dim)
    throw ShapeError("synthesizer expects prosody_dim " +
                     std::to_string(config_.prosody_dim) + ", got " +
                     std::to_string(pros.vector.size()));
}

SynthesisResult TransformerSynthesizer::synthesize(
    const BottleneckFeatures &bnf, const SpeakerEmbedding &speaker,
    const ProsodyEmbedding &prosody, SynthesisMode mode,
    const MelSpectrogram *target) const {
  check_inputs(bnf, speaker, prosody);
  nn::Graph g(false);
  auto bind = [&](const std::string &n) { return g.constant(params_.at(n).value); };
  nn::Var memory = build_memory(g, bnf.values.values(),
                                g.constant(speaker.vector.transpose()),
                                g.constant(prosody.vector.transpose()), bind);
  if (mode == SynthesisMode::kAutoregressive)
    return decode_autoregressive(memory.value());

  if (target == nullptr) throw ValidationError("teacher-forced synthesis needs a target mel");
  if (target->empty()) throw ValidationError("synthesizer: empty target mel");
  const Outputs out = build_decoder(g, memory, teacher_forcing_inputs(target->values()), bind);
  SynthesisResult r;
  r.mel = MelSpectrogram(FrameSequence(out.mel.value(), kMelFrameRate));
  r.stop_logits = out.stop_logits.value().col(0);
  const double logit = std::log(config_.stop_threshold / (1.0 - config_.stop_threshold));
  for (Index t = 0; t < r.stop_logits.size(); ++t)
    if (r.stop_logits(t) > logit) {
      r.stop_frame = t;
      break;
    }
  return r;
}

SynthesisResult TransformerSynthesizer::decode_autoregressive(
    const Matrix &memory) const {
  const Index d = config_.model_dim, H = config_.num_heads;
  const Index max_frames = config_.max_decode_frames;
  auto P = [&](const std::string &n) -> const Matrix & { return params_.at(n).value; };
  struct LayerCache {
    Matrix self_k, self_v, cross_k, cross_v;
  };
  std::vector<LayerCache> cache(config_.decoder_layers);
  for (int l = 0; l < config_.decoder_layers; ++l) {
    cache[l].cross_k = memory * P(layer("dec", l, "cross.wk"));
    cache[l].cross_v = memory * P(layer("dec", l, "cross.wv"));
    cache[l].self_k.resize(max_frames, d);
    cache[l].self_v.resize(max_frames, d);
  }
  auto dense = [&](const RowVector &x, const std::string &p) -> RowVector {
    return x * P(p + ".w") + P(p + ".b");
  };
  auto norm = [&](const RowVector &x, const std::string &p) {
    return layer_norm_row(x, P(p + ".g"), P(p + ".b"));
  };

  Matrix mel(max_frames, config_.mel_dim);
  Vector stops(max_frames);
  const double logit = std::log(config_.stop_threshold / (1.0 - config_.stop_threshold));
  RowVector prev = RowVector::Zero(config_.mel_dim);
  Index produced = 0;
  Index stop_frame = -1;
  for (Index t = 0; t < max_frames; ++t) {
    RowVector x = dense(prev, "dec.pre1").cwiseMax(0.0);
    x = dense(x, "dec.pre2").cwiseMax(0.0);
    x += positional_row(t, d);
    for (int l = 0; l < config_.decoder_layers; ++l) {
      LayerCache &c = cache[l];
      RowVector y = norm(x, layer("dec", l, "ln1"));
      c.self_k.row(t) = y * P(layer("dec", l, "self.wk"));
      c.self_v.row(t) = y * P(layer("dec", l, "self.wv"));
      RowVector a = attend_row(y * P(layer("dec", l, "self.wq")),
                               c.self_k.topRows(t + 1), c.self_v.topRows(t + 1), H);
      x += dense(a, layer("dec", l, "self.out"));
      y = norm(x, layer("dec", l, "ln2"));
      a = attend_row(y * P(layer("dec", l, "cross.wq")), c.cross_k, c.cross_v, H);
      x += dense(a, layer("dec", l, "cross.out"));
      y = norm(x, layer("dec", l, "ln3"));
      x += dense(dense(y, layer("dec", l, "ffn1")).cwiseMax(0.0), layer("dec", l, "ffn2"));
    }
    x = norm(x, "dec.ln");
    mel.row(t) = dense(x, "out.mel");
    stops(t) = dense(x, "out.stop")(0);
    prev = mel.row(t);
    produced = t + 1;
    if (stops(t) > logit) {
      stop_frame = t;
      break;
    }
  }
  SynthesisResult r;
  r.mel = MelSpectrogram(FrameSequence(mel.topRows(produced), kMelFrameRate));
  r.stop_logits = stops.head(produced);
  r.stop_frame = stop_frame;
  r.truncated = stop_frame < 0;
  return r;
}

void TransformerSynthesizer::save(const std::filesystem::path &dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "config.json");
  if (!out) throw IoError("cannot write " + (dir / "config.json").string());
  out << nlohmann::json{{"synthesizer", config_.to_json()}}.dump(2) << "\n";
  params_.save(dir / "parameters.bin");
}

TransformerSynthesizer TransformerSynthesizer::load(const std::filesystem::path &dir) {
  std::ifstream in(dir / "config.json");
  if (!in) throw IoError("cannot read " + (dir / "config.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError((dir / "config.json").string() + ": " + e.what());
  }
  if (!j.contains("synthesizer")) throw ConfigError("checkpoint has no synthesizer section");
  TransformerSynthesizer s(SynthesizerConfig::from_json(j["synthesizer"]));
  s.params_.load(dir / "parameters.bin");
  s.initialized_ = true;
  return s;
}

SynthesisResult PassThroughSynthesizer::synthesize(
    const BottleneckFeatures &bnf, const SpeakerEmbedding &,
    const ProsodyEmbedding &, SynthesisMode mode,
    const MelSpectrogram *target) const {
  if (bnf.values.num_channels() != kMelChannels)
    throw ShapeError("pass-through synthesizer needs 80-dim bottleneck features");
  if (bnf.values.empty()) throw ValidationError("synthesizer: empty bottleneck features");
  if (mode == SynthesisMode::kTeacherForced) {
    if (target == nullptr) throw ValidationError("teacher-forced synthesis needs a target mel");
    if (target->num_frames() != bnf.values.num_frames())
      throw ShapeError("pass-through synthesizer: target length differs from input");
  }
  SynthesisResult r;
  r.mel = MelSpectrogram(FrameSequence(bnf.values.values(), kMelFrameRate));
  const Index T = bnf.values.num_frames();
  r.stop_logits = Vector::Constant(T, -10.0);
  r.stop_logits(T - 1) = 10.0;
  r.stop_frame = T - 1;
  return r;
}

}  // namespace fac
