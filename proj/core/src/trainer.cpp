// core/src/trainer.cpp

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

#include "fac/trainer.hpp"

#include <cmath>
#include <fstream>
#include <algorithm>
#include <numeric>
#include <tuple>

#include "fac/random.hpp"

namespace fac {

using nlohmann::json;

void OptimizerSpec::validate() const {
  if (algorithm != "adam")
    throw ConfigError("optimizer.algorithm: only 'adam' is supported, got '" +
                      algorithm + "'");
  if (!(learning_rate > 0.0))
    throw ConfigError("optimizer.learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("optimizer.batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("optimizer betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("optimizer.epsilon must be positive");
}

void ScheduleSpec::validate() const {
  if (!(decay_factor > 0.0 && decay_factor <= 1.0))
    throw ConfigError("schedule.decay_factor must lie in (0, 1]");
}

double lr_at_epoch(const OptimizerSpec &spec, const ScheduleSpec &schedule,
                   int epoch) {
  if (epoch < 0)
    throw ValidationError("epoch must be non-negative, got " +
                          std::to_string(epoch));
  spec.validate();
  schedule.validate();
  return spec.learning_rate * std::pow(schedule.decay_factor, epoch);
}

std::pair<EarlyStopState, EarlyStopDecision> early_stop_update(
    EarlyStopState state, double val_loss) {
  if (std::isnan(val_loss))
    throw DivergenceError("validation loss is NaN at epoch " +
                          std::to_string(state.epochs_seen));
  const int epoch = state.epochs_seen++;
  if (val_loss < state.best_val_loss) {
    state.best_val_loss = val_loss;
    state.best_epoch = epoch;
    state.epochs_since_improvement = 0;
  } else {
    ++state.epochs_since_improvement;
  }
  const auto decision = state.epochs_since_improvement > state.patience
                            ? EarlyStopDecision::kStop
                            : EarlyStopDecision::kContinue;
  return {state, decision};
}

AdamOptimizer::AdamOptimizer(nn::ParameterSet &params,
                             const OptimizerSpec &spec)
    : params_(params), spec_(spec) {
  spec_.validate();
  for (const auto &p : params_.items()) {
    m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void AdamOptimizer::step(double learning_rate) {
  ++t_;
  const double c1 = 1.0 - std::pow(spec_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(spec_.beta2, static_cast<double>(t_));
  size_t i = 0;
  for (auto &p : params_.items()) {
    Matrix &m = m_[i], &v = v_[i];
    ++i;
    if (p.grad.size() != p.value.size()) continue;
    m = spec_.beta1 * m + (1.0 - spec_.beta1) * p.grad;
    v = spec_.beta2 * v + (1.0 - spec_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= learning_rate * (m.array() / c1) /
                       ((v.array() / c2).sqrt() + spec_.epsilon);
  }
}

void FitOptions::validate() const {
  optimizer.validate();
  schedule.validate();
  if (patience < 0) throw ConfigError("patience must be >= 0");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
}

json FitOptions::to_json() const {
  return {{"optimizer",
           {{"algorithm", optimizer.algorithm},
            {"learning_rate", optimizer.learning_rate},
            {"batch_size", optimizer.batch_size},
            {"beta1", optimizer.beta1},
            {"beta2", optimizer.beta2},
            {"epsilon", optimizer.epsilon}}},
          {"schedule", {{"kind", "exponential"},
                        {"decay_factor", schedule.decay_factor}}},
          {"patience", patience},
          {"max_epochs", max_epochs},
          {"seed", seed}};
}

FitOptions FitOptions::from_json(const json &j) {
  FitOptions o;
  try {
    if (j.contains("optimizer")) {
      const auto &op = j.at("optimizer");
      o.optimizer.algorithm = op.value("algorithm", o.optimizer.algorithm);
      o.optimizer.learning_rate =
          op.value("learning_rate", o.optimizer.learning_rate);
      o.optimizer.batch_size = op.value("batch_size", o.optimizer.batch_size);
      o.optimizer.beta1 = op.value("beta1", o.optimizer.beta1);
      o.optimizer.beta2 = op.value("beta2", o.optimizer.beta2);
      o.optimizer.epsilon = op.value("epsilon", o.optimizer.epsilon);
    }
    if (j.contains("schedule")) {
      const auto &s = j.at("schedule");
      if (s.value("kind", std::string("exponential")) != "exponential")
        throw ConfigError("schedule.kind: only 'exponential' is supported");
      o.schedule.decay_factor = s.value("decay_factor", o.schedule.decay_factor);
    }
    o.patience = j.value("patience", o.patience);
    o.max_epochs = j.value("max_epochs", o.max_epochs);
    o.seed = j.value("seed", o.seed);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  o.validate();
  return o;
}

namespace {
bool finite(const LossBreakdown &l) { return std::isfinite(l.loss); }
}  // namespace

FitResult fit(TrainingTask &task, const FitOptions &options) {
  options.validate();
  if (task.num_train_examples() == 0)
    throw ValidationError("fit: the training split is empty");
  if (task.num_dev_examples() == 0)
    throw ValidationError("fit: the dev split is empty");

  nn::ParameterSet &params = task.parameters();
  AdamOptimizer adam(params, options.optimizer);
  FitResult result;
  result.initial_val = task.validate();
  if (!finite(result.initial_val))
    throw TrainingDivergedError("initial validation loss is not finite", {});

  EarlyStopState stop;
  stop.patience = options.patience;
  std::vector<Matrix> best = params.snapshot();
  std::vector<size_t> order(task.num_train_examples());
  const auto batch = static_cast<size_t>(options.optimizer.batch_size);

  for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
    const double lr = lr_at_epoch(options.optimizer, options.schedule, epoch);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng rng(mix_seed(options.seed, 1000 + static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double train_sum = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < order.size(); start += batch) {
      const size_t n = std::min(batch, order.size() - start);
      params.zero_grad();
      const uint64_t dropout_seed = mix_seed(options.seed, (uint64_t(epoch) << 32) + batches);
      const LossBreakdown l = task.train_batch(
          std::span<const size_t>(order.data() + start, n), dropout_seed);
      if (!finite(l))
        throw TrainingDivergedError(
            "training loss diverged at epoch " + std::to_string(epoch),
            result.history);
      adam.step(lr);
      train_sum += l.loss;
      ++batches;
    }

    const LossBreakdown val = task.validate();
    EpochRecord rec{epoch, train_sum / static_cast<double>(batches), val.loss,
                    val.tv_loss, val.ppg_loss, lr};
    result.history.push_back(rec);
    if (!finite(val))
      throw TrainingDivergedError(
          "validation loss diverged at epoch " + std::to_string(epoch),
          result.history);

    EarlyStopDecision decision;
    std::tie(stop, decision) = early_stop_update(stop, val.loss);
    if (stop.best_epoch == epoch) best = params.snapshot();
    if (decision == EarlyStopDecision::kStop) {
      result.stopped_early = true;
      break;
    }
  }
  params.restore(best);
  params.zero_grad();
  result.best_epoch = stop.best_epoch;
  result.best_val_loss = stop.best_val_loss;
  return result;
}

namespace {
json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double from_nan_safe(const json &v) {
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN()
                     : v.get<double>();
}
}  // namespace

void write_history(const std::filesystem::path &path,
                   const std::vector<EpochRecord> &history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto &r : history)
    out << json{{"epoch", r.epoch},
                {"train_loss", nan_safe(r.train_loss)},
                {"val_loss", nan_safe(r.val_loss)},
                {"tv_loss", nan_safe(r.tv_loss)},
                {"ppg_loss", nan_safe(r.ppg_loss)},
                {"lr", r.lr}}
               .dump()
        << '\n';
}

std::vector<EpochRecord> read_history(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<EpochRecord> out;
  std::string line;
  size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = json::parse(line);
      out.push_back({j.at("epoch").get<int>(), from_nan_safe(j.at("train_loss")),
                     from_nan_safe(j.at("val_loss")),
                     from_nan_safe(j.at("tv_loss")),
                     from_nan_safe(j.at("ppg_loss")), j.at("lr").get<double>()});
    } catch (const json::exception &e) {
      throw ParseError(path.string() + " line " + std::to_string(n) + ": " +
                       e.what());
    }
  }
  return out;
}

}  // namespace fac
