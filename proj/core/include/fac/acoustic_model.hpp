// core/include/fac/acoustic_model.hpp

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

#ifndef FAC_ACOUSTIC_MODEL_HPP_
#define FAC_ACOUSTIC_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "fac/autograd.hpp"
#include "fac/frame_sequence.hpp"
#include "fac/parameters.hpp"
#include "fac/providers.hpp"
#include "json.hpp"

namespace fac {

/// Shared trunk: BiLSTM x num_bilstm_layers -> frame repetition ->
/// dropout -> linear (the bottleneck). Heads: linear PPG logits and
/// tanh TV estimates, both fed from the bottleneck.
struct AcousticModelConfig {
  Index input_dim = 1024;
  double input_rate = 50.0;
  Index bilstm_hidden = 256;  // per direction
  int num_bilstm_layers = 2;
  Index upsample_factor = 2;
  double dropout_rate = 0.2;
  Index bnf_dim = 256;
  Index ppg_dim = 5816;
  Index tv_dim = 6;

  void validate() const;
  double output_rate() const { return input_rate * upsample_factor; }
  /// Geometry of the features this model consumes and predicts.
  FeatureGeometry geometry() const;

  nlohmann::json to_json() const;
  static AcousticModelConfig from_json(const nlohmann::json &j);
};

enum class ModelVariant { kPpgOnly, kTvOnly, kCombined };

std::string_view to_string(ModelVariant variant);
/// "ppg_only", "tv_only" or "combined"; anything else is a ConfigError.
ModelVariant parse_variant(std::string_view name);

struct LossWeights {
  double alpha = 0.4;
  void validate() const;  // 0 <= alpha <= 1
  static LossWeights for_variant(ModelVariant variant);
};

/// The three named variants share one architecture and differ in alpha:
/// ppg_only 0, combined 0.4, tv_only 1.
std::pair<AcousticModelConfig, LossWeights> make_variant(
    ModelVariant variant, const AcousticModelConfig &base = {});
std::pair<AcousticModelConfig, LossWeights> make_variant(
    std::string_view name, const AcousticModelConfig &base = {});

struct BottleneckFeatures {
  FrameSequence values;
};

struct MultiTaskOutput {
  FrameSequence ppg_logits;
  FrameSequence tv_estimates;
  BottleneckFeatures bnf;
};

struct CombinedLossReport {
  double tv_loss = 0.0;   // mean absolute error
  double ppg_loss = 0.0;  // cross entropy, nats per frame
  double combined = 0.0;  // alpha * tv_loss + (1 - alpha) * ppg_loss
  double alpha = 0.0;
  Index frames = 0;       // after common-minimum truncation
};

/// Nearest-neighbour repetition: each frame duplicated `factor` times.
FrameSequence upsample_frames(const FrameSequence &seq, Index factor);

/// Output and targets may disagree by this many frames; all are truncated
/// to the shortest. Larger gaps are a ShapeError.
inline constexpr Index kFrameMismatchTolerance = 2;

/// Evaluates the combined objective on plain matrices.
CombinedLossReport combined_loss(const MultiTaskOutput &output,
                                 const FrameSequence &ppg_target,
                                 const FrameSequence &tv_target,
                                 const LossWeights &weights);
/// Same objective on precomputed parts.
double combine_losses(double tv_loss, double ppg_loss, double alpha);

struct ForwardOptions {
  bool training = false;  // enables dropout
  uint64_t dropout_seed = 0;
};

class AcousticModel {
 public:
  /// Graph nodes of one forward pass.
  struct Heads {
    nn::Var ppg_logits;
    nn::Var tv_estimates;
    nn::Var bnf;
  };

  /// Uninitialized: forward/extract_bnf throw StateError.
  AcousticModel() = default;
  /// Declares all parameters (zero-valued, still uninitialized).
  explicit AcousticModel(AcousticModelConfig config);

  /// Seeded uniform initialisation in [-1/sqrt(fan), 1/sqrt(fan)].
  void initialize(uint64_t seed);
  bool initialized() const { return initialized_; }
  /// Marks externally loaded parameters as usable.
  void mark_initialized() { initialized_ = true; }

  const AcousticModelConfig &config() const { return config_; }
  nn::ParameterSet &parameters() { return params_; }
  const nn::ParameterSet &parameters() const { return params_; }

  /// Builds the forward pass into g with parameters bound as gradient
  /// leaves. `input` is T x input_dim.
  Heads build(nn::Graph &g, const Matrix &input, const ForwardOptions &opts = {});

  /// Evaluation (or seeded-dropout) forward pass without gradients.
  MultiTaskOutput forward(const FrameSequence &embeddings,
                          const ForwardOptions &opts = {}) const;
  /// Trunk output at the output rate, eval mode.
  BottleneckFeatures extract_bnf(const FrameSequence &embeddings) const;

  static bool is_tv_head_parameter(const std::string &name);
  static bool is_ppg_head_parameter(const std::string &name);

  // Checkpoint: <dir>/config.json + <dir>/parameters.bin.
  void save(const std::filesystem::path &dir, const LossWeights &weights,
            const nlohmann::json &metadata = nlohmann::json::object()) const;
  struct Loaded;
  static Loaded load(const std::filesystem::path &dir);

 private:
  void check_input(const FrameSequence &embeddings) const;
  template <typename Bind>
  Heads build_impl(nn::Graph &g, const Matrix &input, const ForwardOptions &opts,
                   Bind &&bind) const;

  AcousticModelConfig config_;
  nn::ParameterSet params_;
  bool initialized_ = false;
};

struct AcousticModel::Loaded {
  AcousticModel model;
  LossWeights weights;
  nlohmann::json metadata;
};

/// Graph version of the combined objective for training. Targets must
/// already be truncated to the output length.
struct LossNodes {
  nn::Var tv_loss;
  nn::Var ppg_loss;
  nn::Var combined;
};
LossNodes combined_loss_nodes(const AcousticModel::Heads &heads,
                              const Matrix &ppg_target, const Matrix &tv_target,
                              const LossWeights &weights);

}  // namespace fac

#endif  // FAC_ACOUSTIC_MODEL_HPP_
