// core/src/acoustic_model.cpp

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

#include "fac/acoustic_model.hpp"

#include <cmath>
#include <fstream>

#include "fac/error.hpp"
#include "fac/random.hpp"

namespace fac {

using nlohmann::json;

void AcousticModelConfig::validate() const {
  if (input_dim <= 0 || bilstm_hidden <= 0 || bnf_dim <= 0 || ppg_dim <= 0 ||
      tv_dim <= 0)
    throw ConfigError("acoustic model dimensions must be positive");
  if (num_bilstm_layers < 1)
    throw ConfigError("num_bilstm_layers must be at least 1");
  if (upsample_factor < 1) throw ConfigError("upsample_factor must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw ConfigError("dropout_rate must lie in [0, 1)");
  if (!(input_rate > 0.0)) throw ConfigError("input_rate must be positive");
}

FeatureGeometry AcousticModelConfig::geometry() const {
  FeatureGeometry g;
  g.upstream_dim = input_dim;
  g.upstream_rate = input_rate;
  g.ppg_dim = ppg_dim;
  g.tv_dim = tv_dim;
  g.target_rate = output_rate();
  return g;
}

json AcousticModelConfig::to_json() const {
  return {{"input_dim", input_dim},
          {"input_rate", input_rate},
          {"bilstm_hidden", bilstm_hidden},
          {"num_bilstm_layers", num_bilstm_layers},
          {"upsample_factor", upsample_factor},
          {"dropout_rate", dropout_rate},
          {"bnf_dim", bnf_dim},
          {"ppg_dim", ppg_dim},
          {"tv_dim", tv_dim}};
}

AcousticModelConfig AcousticModelConfig::from_json(const json &j) {
  AcousticModelConfig c;
  try {
    c.input_dim = j.value("input_dim", c.input_dim);
    c.input_rate = j.value("input_rate", c.input_rate);
    c.bilstm_hidden = j.value("bilstm_hidden", c.bilstm_hidden);
    c.num_bilstm_layers = j.value("num_bilstm_layers", c.num_bilstm_layers);
    c.upsample_factor = j.value("upsample_factor", c.upsample_factor);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
    c.bnf_dim = j.value("bnf_dim", c.bnf_dim);
    c.ppg_dim = j.value("ppg_dim", c.ppg_dim);
    c.tv_dim = j.value("tv_dim", c.tv_dim);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("acoustic model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string_view to_string(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kPpgOnly: return "ppg_only";
    case ModelVariant::kTvOnly: return "tv_only";
    case ModelVariant::kCombined: return "combined";
  }
  return "combined";
}

ModelVariant parse_variant(std::string_view name) {
  if (name == "ppg_only") return ModelVariant::kPpgOnly;
  if (name == "tv_only") return ModelVariant::kTvOnly;
  if (name == "combined") return ModelVariant::kCombined;
  throw ConfigError("unknown model variant '" + std::string(name) +
                    "' (expected ppg_only, tv_only or combined)");
}

void LossWeights::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ValidationError("alpha must lie in [0, 1], got " +
                          std::to_string(alpha));
}

LossWeights LossWeights::for_variant(ModelVariant variant) {
  switch (variant) {
    case ModelVariant::kPpgOnly: return {0.0};
    case ModelVariant::kTvOnly: return {1.0};
    case ModelVariant::kCombined: return {0.4};
  }
  return {0.4};
}

std::pair<AcousticModelConfig, LossWeights> make_variant(
    ModelVariant variant, const AcousticModelConfig &base) {
  base.validate();
  return {base, LossWeights::for_variant(variant)};
}

std::pair<AcousticModelConfig, LossWeights> make_variant(
    std::string_view name, const AcousticModelConfig &base) {
  return make_variant(parse_variant(name), base);
}

FrameSequence upsample_frames(const FrameSequence &seq, Index factor) {
  if (factor < 1)
    throw ValidationError("upsample factor must be >= 1, got " +
                          std::to_string(factor));
  const Matrix &v = seq.values();
  Matrix out(v.rows() * factor, v.cols());
  for (Index t = 0; t < v.rows(); ++t)
    for (Index k = 0; k < factor; ++k) out.row(t * factor + k) = v.row(t);
  return FrameSequence(std::move(out), seq.frame_rate() * factor);
}

double combine_losses(double tv_loss, double ppg_loss, double alpha) {
  return alpha * tv_loss + (1.0 - alpha) * ppg_loss;
}

namespace {

Index common_frames(Index out, Index ppg, Index tv) {
  const Index lo = std::min({out, ppg, tv});
  const Index hi = std::max({out, ppg, tv});
  if (hi - lo > kFrameMismatchTolerance)
    throw ShapeError("frame counts differ by more than " +
                     std::to_string(kFrameMismatchTolerance) + " (output " +
                     std::to_string(out) + ", ppg " + std::to_string(ppg) +
                     ", tv " + std::to_string(tv) + ")");
  return lo;
}

void check_tv_range(const Matrix &tv) {
  if (tv.size() > 0 && tv.cwiseAbs().maxCoeff() > 1.0)
    throw ValidationError(
        "TV targets must be normalized into [-1, 1] before computing the loss");
}

}  // namespace

CombinedLossReport combined_loss(const MultiTaskOutput &output,
                                 const FrameSequence &ppg_target,
                                 const FrameSequence &tv_target,
                                 const LossWeights &weights) {
  weights.validate();
  if (ppg_target.num_channels() != output.ppg_logits.num_channels() ||
      tv_target.num_channels() != output.tv_estimates.num_channels())
    throw ShapeError("target channel counts do not match the model heads");
  const Index n = common_frames(output.ppg_logits.num_frames(),
                                ppg_target.num_frames(), tv_target.num_frames());
  if (n == 0) throw ShapeError("combined loss over zero frames");
  const Matrix tv_est = output.tv_estimates.values().topRows(n);
  const Matrix tv_ref = tv_target.values().topRows(n);
  check_tv_range(tv_ref);
  const Matrix logits = output.ppg_logits.values().topRows(n);
  const Matrix ppg_ref = ppg_target.values().topRows(n);

  CombinedLossReport r;
  r.alpha = weights.alpha;
  r.frames = n;
  r.tv_loss = (tv_est - tv_ref).cwiseAbs().mean();
  double ce = 0.0;
  for (Index t = 0; t < n; ++t) {
    const double m = logits.row(t).maxCoeff();
    const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
    ce -= ppg_ref.row(t).dot((logits.row(t).array() - lse).matrix());
  }
  r.ppg_loss = ce / static_cast<double>(n);
  r.combined = combine_losses(r.tv_loss, r.ppg_loss, r.alpha);
  return r;
}

LossNodes combined_loss_nodes(const AcousticModel::Heads &heads,
                              const Matrix &ppg_target, const Matrix &tv_target,
                              const LossWeights &weights) {
  weights.validate();
  check_tv_range(tv_target);
  LossNodes n;
  n.tv_loss = nn::l1_loss(heads.tv_estimates, tv_target);
  n.ppg_loss = nn::softmax_cross_entropy(heads.ppg_logits, ppg_target);
  n.combined = nn::add(nn::scale(n.tv_loss, weights.alpha),
                       nn::scale(n.ppg_loss, 1.0 - weights.alpha));
  return n;
}

// --- model -----------------------------------------------------------------

namespace {
std::string lstm_name(int layer, bool backward, const char *what) {
  return "bilstm" + std::to_string(layer) + (backward ? ".bw." : ".fw.") + what;
}
}  // namespace

AcousticModel::AcousticModel(AcousticModelConfig config)
    : config_(std::move(config)) {
  config_.validate();
  const Index H = config_.bilstm_hidden;
  for (int layer = 0; layer < config_.num_bilstm_layers; ++layer) {
    const Index in = layer == 0 ? config_.input_dim : 2 * H;
    for (bool bw : {false, true}) {
      params_.add(lstm_name(layer, bw, "w_ih"), Matrix::Zero(in, 4 * H));
      params_.add(lstm_name(layer, bw, "w_hh"), Matrix::Zero(H, 4 * H));
      params_.add(lstm_name(layer, bw, "b"), Matrix::Zero(1, 4 * H));
    }
  }
  params_.add("trunk.fc.w", Matrix::Zero(2 * H, config_.bnf_dim));
  params_.add("trunk.fc.b", Matrix::Zero(1, config_.bnf_dim));
  params_.add("ppg_head.w", Matrix::Zero(config_.bnf_dim, config_.ppg_dim));
  params_.add("ppg_head.b", Matrix::Zero(1, config_.ppg_dim));
  params_.add("tv_head.w", Matrix::Zero(config_.bnf_dim, config_.tv_dim));
  params_.add("tv_head.b", Matrix::Zero(1, config_.tv_dim));
}

void AcousticModel::initialize(uint64_t seed) {
  if (params_.empty()) throw StateError("acoustic model has no configuration");
  Rng rng(mix_seed(seed, 0xac0));
  const double lstm_bound = 1.0 / std::sqrt(double(config_.bilstm_hidden));
  for (auto &p : params_.items()) {
    double bound;
    if (p.name.rfind("bilstm", 0) == 0)
      bound = lstm_bound;
    else if (p.name == "trunk.fc.w" || p.name == "trunk.fc.b")
      bound = 1.0 / std::sqrt(double(2 * config_.bilstm_hidden));
    else
      bound = 1.0 / std::sqrt(double(config_.bnf_dim));
    p.value = random_uniform(p.value.rows(), p.value.cols(), -bound, bound, rng);
  }
  params_.zero_grad();
  initialized_ = true;
}

bool AcousticModel::is_tv_head_parameter(const std::string &name) {
  return name.rfind("tv_head.", 0) == 0;
}
bool AcousticModel::is_ppg_head_parameter(const std::string &name) {
  return name.rfind("ppg_head.", 0) == 0;
}

void AcousticModel::check_input(const FrameSequence &embeddings) const {
  if (!initialized_) throw StateError("acoustic model is not initialized");
  if (embeddings.num_channels() != config_.input_dim)
    throw ShapeError("acoustic model expects " +
                     std::to_string(config_.input_dim) +
                     "-channel input, got " +
                     std::to_string(embeddings.num_channels()));
  if (std::abs(embeddings.frame_rate() - config_.input_rate) > 1e-9)
    throw ShapeError("acoustic model expects input at " +
                     std::to_string(config_.input_rate) + " Hz");
}

template <typename Bind>
AcousticModel::Heads AcousticModel::build_impl(nn::Graph &g,
                                               const Matrix &input,
                                               const ForwardOptions &opts,
                                               Bind &&bind) const {
  if (input.cols() != config_.input_dim)
    throw ShapeError("acoustic model expects " +
                     std::to_string(config_.input_dim) + "-channel input, got " +
                     std::to_string(input.cols()));
  nn::Var x = g.constant(input);
  for (int layer = 0; layer < config_.num_bilstm_layers; ++layer) {
    std::vector<nn::Var> dirs;
    for (bool bw : {false, true}) {
      nn::Var xproj = nn::linear(x, bind(lstm_name(layer, bw, "w_ih")),
                                 bind(lstm_name(layer, bw, "b")));
      dirs.push_back(nn::lstm(xproj, bind(lstm_name(layer, bw, "w_hh")), bw));
    }
    x = nn::concat_cols(dirs);
  }
  x = nn::repeat_rows(x, config_.upsample_factor);
  if (opts.training && config_.dropout_rate > 0.0) {
    Rng rng(mix_seed(opts.dropout_seed, 0xd0));
    std::bernoulli_distribution keep(1.0 - config_.dropout_rate);
    Matrix mask(x.rows(), x.cols());
    const double s = 1.0 / (1.0 - config_.dropout_rate);
    for (Index j = 0; j < mask.cols(); ++j)
      for (Index i = 0; i < mask.rows(); ++i) mask(i, j) = keep(rng) ? s : 0.0;
    x = nn::mask_mul(x, mask);
  }
  Heads h;
  h.bnf = nn::linear(x, bind("trunk.fc.w"), bind("trunk.fc.b"));
  h.ppg_logits = nn::linear(h.bnf, bind("ppg_head.w"), bind("ppg_head.b"));
  h.tv_estimates =
      nn::tanh(nn::linear(h.bnf, bind("tv_head.w"), bind("tv_head.b")));
  return h;
}

AcousticModel::Heads AcousticModel::build(nn::Graph &g, const Matrix &input,
                                          const ForwardOptions &opts) {
  if (!initialized_) throw StateError("acoustic model is not initialized");
  return build_impl(g, input, opts, [&](const std::string &name) {
    return g.param(params_.at(name));
  });
}

MultiTaskOutput AcousticModel::forward(const FrameSequence &embeddings,
                                       const ForwardOptions &opts) const {
  check_input(embeddings);
  nn::Graph g(false);
  const Heads h = build_impl(g, embeddings.values(), opts,
                             [&](const std::string &name) {
                               return g.constant(params_.at(name).value);
                             });
  const double rate = config_.output_rate();
  return MultiTaskOutput{FrameSequence(h.ppg_logits.value(), rate),
                         FrameSequence(h.tv_estimates.value(), rate),
                         BottleneckFeatures{FrameSequence(h.bnf.value(), rate)}};
}

BottleneckFeatures AcousticModel::extract_bnf(
    const FrameSequence &embeddings) const {
  return forward(embeddings).bnf;
}

void AcousticModel::save(const std::filesystem::path &dir,
                         const LossWeights &weights,
                         const json &metadata) const {
  if (!initialized_) throw StateError("cannot save an uninitialized model");
  std::filesystem::create_directories(dir);
  json j = {{"model", config_.to_json()},
            {"alpha", weights.alpha},
            {"metadata", metadata},
            {"parameters", "parameters.bin"}};
  std::ofstream out(dir / "config.json");
  if (!out) throw IoError("cannot write " + (dir / "config.json").string());
  out << j.dump(2) << '\n';
  params_.save(dir / "parameters.bin");
}

AcousticModel::Loaded AcousticModel::load(const std::filesystem::path &dir) {
  std::ifstream in(dir / "config.json");
  if (!in) throw IoError("cannot open " + (dir / "config.json").string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw ParseError((dir / "config.json").string() + ": " + e.what());
  }
  Loaded loaded{AcousticModel(AcousticModelConfig::from_json(j.at("model"))),
                LossWeights{j.value("alpha", 0.4)},
                j.value("metadata", json::object())};
  loaded.weights.validate();
  loaded.model.params_.load(dir / j.value("parameters", "parameters.bin"));
  loaded.model.initialized_ = true;
  return loaded;
}

}  // namespace fac
