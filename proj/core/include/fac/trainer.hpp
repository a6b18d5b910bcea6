// core/include/fac/trainer.hpp

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

#ifndef FAC_TRAINER_HPP_
#define FAC_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fac/error.hpp"
#include "fac/parameters.hpp"
#include "json.hpp"

namespace fac {

struct OptimizerSpec {
  std::string algorithm = "adam";
  double learning_rate = 1e-4;
  Index batch_size = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// Exponential decay applied once per epoch.
struct ScheduleSpec {
  double decay_factor = 0.5;
  void validate() const;
};

/// learning_rate * decay_factor ^ epoch.
double lr_at_epoch(const OptimizerSpec &spec, const ScheduleSpec &schedule,
                   int epoch);

struct EarlyStopState {
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int epochs_since_improvement = 0;
  int patience = 6;
  int epochs_seen = 0;
};

enum class EarlyStopDecision { kContinue, kStop };

/// Records one epoch's validation loss. A strictly lower loss resets the
/// counter; stop is returned once the counter exceeds the patience.
/// A NaN loss throws DivergenceError.
std::pair<EarlyStopState, EarlyStopDecision> early_stop_update(
    EarlyStopState state, double val_loss);

/// Adam without weight decay, bias-corrected moments.
class AdamOptimizer {
 public:
  AdamOptimizer(nn::ParameterSet &params, const OptimizerSpec &spec);
  /// Applies one update from the gradients currently in the parameter set.
  void step(double learning_rate);
  long steps() const { return t_; }

 private:
  nn::ParameterSet &params_;
  OptimizerSpec spec_;
  std::vector<Matrix> m_, v_;
  long t_ = 0;
};

struct LossBreakdown {
  double loss = 0.0;
  double tv_loss = std::numeric_limits<double>::quiet_NaN();
  double ppg_loss = std::numeric_limits<double>::quiet_NaN();
};

/// What fit() trains. train_batch must leave gradients of the mean batch
/// loss in parameters() (fit zeroes them beforehand).
class TrainingTask {
 public:
  virtual ~TrainingTask() = default;
  virtual nn::ParameterSet &parameters() = 0;
  virtual size_t num_train_examples() const = 0;
  virtual size_t num_dev_examples() const = 0;
  virtual LossBreakdown train_batch(std::span<const size_t> batch,
                                    uint64_t dropout_seed) = 0;
  /// Loss over the full dev set, evaluation mode.
  virtual LossBreakdown validate() = 0;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double tv_loss = 0.0;   // validation components
  double ppg_loss = 0.0;
  double lr = 0.0;
};

struct FitOptions {
  OptimizerSpec optimizer;
  ScheduleSpec schedule;
  int patience = 6;
  int max_epochs = 100;
  uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; bad values are ConfigErrors.
  static FitOptions from_json(const nlohmann::json &j);
};

struct FitResult {
  LossBreakdown initial_val;  // before the first update
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_val_loss = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
};

/// Thrown when a train or validation loss becomes NaN/inf.
class TrainingDivergedError : public DivergenceError {
 public:
  TrainingDivergedError(const std::string &what,
                        std::vector<EpochRecord> history)
      : DivergenceError(what), history_(std::move(history)) {}
  const std::vector<EpochRecord> &history() const { return history_; }

 private:
  std::vector<EpochRecord> history_;
};

/// Seeded epoch loop: shuffled mini-batches, Adam at lr_at_epoch(epoch),
/// one validation pass per epoch, early stopping, best-epoch restore.
FitResult fit(TrainingTask &task, const FitOptions &options);

/// One JSON object per epoch: epoch, train_loss, val_loss, tv_loss,
/// ppg_loss, lr.
void write_history(const std::filesystem::path &path,
                   const std::vector<EpochRecord> &history);
std::vector<EpochRecord> read_history(const std::filesystem::path &path);

}  // namespace fac

#endif  // FAC_TRAINER_HPP_
