// core/src/prosody_encoder.cpp

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

#include "fac/prosody_encoder.hpp"

#include <cmath>
#include <fstream>

#include "fac/error.hpp"
#include "fac/random.hpp"

namespace fac {

void ProsodyEncoderConfig::validate() const {
  if (mel_dim != kMelChannels)
    throw ConfigError("prosody_encoder.mel_dim must be 80");
  if (conv_channels < 1) throw ConfigError("prosody_encoder.conv_channels must be >= 1");
  if (conv_kernel < 1 || conv_kernel % 2 == 0)
    throw ConfigError("prosody_encoder.conv_kernel must be odd and positive");
  if (lstm_hidden < 1) throw ConfigError("prosody_encoder.lstm_hidden must be >= 1");
  if (prosody_dim < 1) throw ConfigError("prosody_encoder.prosody_dim must be >= 1");
}

nlohmann::json ProsodyEncoderConfig::to_json() const {
  return {{"mel_dim", mel_dim},         {"conv_channels", conv_channels},
          {"conv_kernel", conv_kernel}, {"lstm_hidden", lstm_hidden},
          {"prosody_dim", prosody_dim}};
}

ProsodyEncoderConfig ProsodyEncoderConfig::from_json(const nlohmann::json &j) {
  ProsodyEncoderConfig c;
  try {
    c.mel_dim = j.value("mel_dim", c.mel_dim);
    c.conv_channels = j.value("conv_channels", c.conv_channels);
    c.conv_kernel = j.value("conv_kernel", c.conv_kernel);
    c.lstm_hidden = j.value("lstm_hidden", c.lstm_hidden);
    c.prosody_dim = j.value("prosody_dim", c.prosody_dim);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("prosody_encoder: ") + e.what());
  }
  c.validate();
  return c;
}

ProsodyEncoder::ProsodyEncoder(ProsodyEncoderConfig config)
    : config_(config) {
  config_.validate();
  const Index C = config_.conv_channels, H = config_.lstm_hidden;
  params_.add("prosody.conv.w", Matrix::Zero(config_.conv_kernel * config_.mel_dim, C));
  params_.add("prosody.conv.b", Matrix::Zero(1, C));
  params_.add("prosody.lstm.w_ih", Matrix::Zero(C, 4 * H));
  params_.add("prosody.lstm.w_hh", Matrix::Zero(H, 4 * H));
  params_.add("prosody.lstm.b", Matrix::Zero(1, 4 * H));
  params_.add("prosody.proj.w", Matrix::Zero(H, config_.prosody_dim));
  params_.add("prosody.proj.b", Matrix::Zero(1, config_.prosody_dim));
}

void ProsodyEncoder::initialize(uint64_t seed) {
  if (params_.empty()) throw StateError("prosody encoder has no configuration");
  Rng rng(mix_seed(seed, 0x960));
  const double conv = 1.0 / std::sqrt(double(config_.conv_kernel * config_.mel_dim));
  const double hidden = 1.0 / std::sqrt(double(config_.lstm_hidden));
  for (auto &p : params_.items()) {
    const double bound = p.name.rfind("prosody.conv", 0) == 0 ? conv : hidden;
    p.value = random_uniform(p.value.rows(), p.value.cols(), -bound, bound, rng);
  }
  params_.zero_grad();
  initialized_ = true;
}

template <typename Bind>
nn::Var ProsodyEncoder::build_impl(nn::Graph &g, const Matrix &mel,
                                   Bind &&bind) const {
  if (mel.rows() == 0) throw ValidationError("prosody encoder: empty mel");
  if (mel.cols() != config_.mel_dim)
    throw ShapeError("prosody encoder expects " + std::to_string(config_.mel_dim) +
                     "-channel mel, got " + std::to_string(mel.cols()));
  nn::Var x = nn::frame_stack(g.constant(mel), config_.conv_kernel);
  x = nn::relu(nn::linear(x, bind("prosody.conv.w"), bind("prosody.conv.b")));
  nn::Var xp = nn::linear(x, bind("prosody.lstm.w_ih"), bind("prosody.lstm.b"));
  nn::Var h = nn::lstm(xp, bind("prosody.lstm.w_hh"), false);
  return nn::linear(nn::mean_rows(h), bind("prosody.proj.w"), bind("prosody.proj.b"));
}

nn::Var ProsodyEncoder::build(nn::Graph &g, const Matrix &mel) {
  if (!initialized_) throw StateError("prosody encoder is not initialized");
  return build_impl(g, mel, [&](const std::string &n) { return g.param(params_.at(n)); });
}

ProsodyEmbedding ProsodyEncoder::encode(const MelSpectrogram &mel) const {
  if (!initialized_) throw StateError("prosody encoder is not initialized");
  nn::Graph g(false);
  nn::Var v = build_impl(g, mel.values(), [&](const std::string &n) {
    return g.constant(params_.at(n).value);
  });
  return ProsodyEmbedding{v.value().row(0).transpose()};
}

void ProsodyEncoder::save(const std::filesystem::path &dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "config.json");
  if (!out) throw IoError("cannot write " + (dir / "config.json").string());
  out << nlohmann::json{{"prosody_encoder", config_.to_json()}}.dump(2) << "\n";
  params_.save(dir / "parameters.bin");
}

ProsodyEncoder ProsodyEncoder::load(const std::filesystem::path &dir) {
  std::ifstream in(dir / "config.json");
  if (!in) throw IoError("cannot read " + (dir / "config.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError((dir / "config.json").string() + ": " + e.what());
  }
  if (!j.contains("prosody_encoder"))
    throw ConfigError("checkpoint has no prosody_encoder section");
  ProsodyEncoder enc(ProsodyEncoderConfig::from_json(j["prosody_encoder"]));
  enc.params_.load(dir / "parameters.bin");
  enc.initialized_ = true;
  return enc;
}

ProsodyEmbedding encode_prosody(const MelSpectrogram &mel,
                                const ProsodyEncoder &encoder) {
  return encoder.encode(mel);
}

}  // namespace fac
