// core/include/fac/acoustic_training.hpp

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

#ifndef FAC_ACOUSTIC_TRAINING_HPP_
#define FAC_ACOUSTIC_TRAINING_HPP_

#include <functional>
#include <string>
#include <vector>

#include "fac/acoustic_model.hpp"
#include "fac/corpus.hpp"
#include "fac/providers.hpp"
#include "fac/trainer.hpp"

namespace fac {

/// One fixed-length segment with its model input and targets. Targets are
/// truncated to `frames()` and TVs are already normalized.
struct AcousticExample {
  std::string id;
  Matrix embeddings;  // T_in x input_dim
  Matrix ppg_target;  // frames x ppg_dim
  Matrix tv_target;   // frames x tv_dim
  Index frames() const { return ppg_target.rows(); }
};

struct AcousticDataset {
  std::vector<AcousticExample> train;
  std::vector<AcousticExample> dev;
  TvNormalizationStats tv_stats;
  FeatureGeometry geometry;
};

struct AcousticProviders {
  UpstreamProvider *upstream = nullptr;
  PpgProvider *ppg = nullptr;
  TvProvider *tv = nullptr;
};

using WaveformLoader = std::function<Waveform(const UtteranceRecord &)>;

/// read_wav plus a sample-rate check against the record.
Waveform load_record_audio(const UtteranceRecord &record);

struct DatasetOptions {
  double segment_seconds = 2.0;
  PpgTargetForm ppg_form = PpgTargetForm::kSoft;
  Index upsample_factor = 2;
  FeatureGeometry geometry;
};

/// Segments every train/dev utterance, runs the three extractors, aligns
/// lengths and normalizes TVs with statistics of the train split only.
AcousticDataset build_acoustic_dataset(const DataSplits &splits,
                                       const AcousticProviders &providers,
                                       const DatasetOptions &options,
                                       const WaveformLoader &loader =
                                           load_record_audio);

/// Builds one example from a segment; tv_target is left unnormalized.
AcousticExample make_acoustic_example(const std::string &id,
                                      const Waveform &segment,
                                      const AcousticProviders &providers,
                                      const DatasetOptions &options);

class AcousticTrainingTask : public TrainingTask {
 public:
  AcousticTrainingTask(AcousticModel &model, LossWeights weights,
                       const AcousticDataset &data);

  nn::ParameterSet &parameters() override { return model_.parameters(); }
  size_t num_train_examples() const override { return data_.train.size(); }
  size_t num_dev_examples() const override { return data_.dev.size(); }
  LossBreakdown train_batch(std::span<const size_t> batch,
                            uint64_t dropout_seed) override;
  LossBreakdown validate() override;

 private:
  AcousticModel &model_;
  LossWeights weights_;
  const AcousticDataset &data_;
};

struct AcousticDevMetrics {
  double tv_ppmc = 0.0;   // mean over channels, all dev frames pooled
  double tv_mae = 0.0;
  double ppg_rmse = 0.0;  // over posteriors (softmax of logits)
  double ppg_cross_entropy = 0.0;
};

AcousticDevMetrics evaluate_acoustic_model(
    const AcousticModel &model, const std::vector<AcousticExample> &examples);

struct GridSearchSpace {
  std::vector<double> alpha_grid{0.0, 0.2, 0.3, 0.4, 0.5, 0.7, 1.0};
  std::vector<double> lr_grid{1e-2, 1e-3, 1e-4, 3e-4};
  std::vector<Index> batch_grid{4, 8, 12, 16};
  void validate() const;
};

struct AlphaCandidate {
  double alpha = 0.0;
  double tv_ppmc = 0.0;
  double ppg_rmse = 0.0;
  double score = 0.0;  // filled by select_alpha
};

struct AlphaSelection {
  std::vector<AlphaCandidate> candidates;
  double selected_alpha = 0.0;
};

/// Preferred alpha when scores tie.
inline constexpr double kAlphaTieBreak = 0.4;

/// score = minmax(ppmc) - minmax(rmse) over the grid (a metric with no
/// spread normalizes to 0). Highest score wins; ties go to the alpha
/// closest to kAlphaTieBreak, then to the smaller alpha.
AlphaSelection select_alpha(std::vector<AlphaCandidate> candidates);

/// Trains one model per alpha from the same initialisation and ranks them
/// with select_alpha on dev metrics.
AlphaSelection grid_search_alpha(const GridSearchSpace &space,
                                 const AcousticDataset &data,
                                 const AcousticModelConfig &config,
                                 const FitOptions &options,
                                 uint64_t init_seed);

struct HyperparameterCandidate {
  double learning_rate = 0.0;
  Index batch_size = 0;
  double best_val_loss = 0.0;
};

struct HyperparameterSelection {
  std::vector<HyperparameterCandidate> candidates;
  double learning_rate = 0.0;
  Index batch_size = 0;
};

/// Exhaustive lr x batch grid; lowest best validation loss wins (first in
/// grid order on ties).
HyperparameterSelection grid_search_hyperparameters(
    const GridSearchSpace &space, const AcousticDataset &data,
    const AcousticModelConfig &config, const LossWeights &weights,
    const FitOptions &options, uint64_t init_seed);

}  // namespace fac

#endif  // FAC_ACOUSTIC_TRAINING_HPP_
