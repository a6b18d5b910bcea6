// core/src/acoustic_training.cpp

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

#include "fac/acoustic_training.hpp"

#include <cmath>
#include <limits>

#include "fac/error.hpp"
#include "fac/evaluation.hpp"
#include "fac/wav_io.hpp"

namespace fac {

Waveform load_record_audio(const UtteranceRecord &record) {
  Waveform wave = read_wav(record.audio_path);
  if (wave.sample_rate != record.sample_rate)
    throw ValidationError("utterance " + record.utterance_id + ": audio is " +
                          std::to_string(wave.sample_rate) +
                          " Hz, manifest says " +
                          std::to_string(record.sample_rate));
  return wave;
}

AcousticExample make_acoustic_example(const std::string &id,
                                      const Waveform &segment,
                                      const AcousticProviders &providers,
                                      const DatasetOptions &options) {
  if (!providers.upstream || !providers.ppg || !providers.tv)
    throw StateError("acoustic dataset needs upstream, PPG and TV providers");
  const auto &geo = options.geometry;
  const UpstreamEmbedding up =
      get_upstream_embeddings(segment, *providers.upstream, geo, id);
  PosteriorgramTrack ppg = get_ppg_targets(segment, *providers.ppg, geo, id);
  if (options.ppg_form == PpgTargetForm::kHard)
    ppg = harden_posteriors(ppg, geo);
  const TractVariableTrack tv = get_tv_targets(segment, *providers.tv, geo, id);

  const Index out_frames = up.num_frames() * options.upsample_factor;
  const Index lo = std::min({out_frames, ppg.num_frames(), tv.num_frames()});
  const Index hi = std::max({out_frames, ppg.num_frames(), tv.num_frames()});
  if (hi - lo > kFrameMismatchTolerance)
    throw ShapeError(id + ": model output (" + std::to_string(out_frames) +
                     "), PPG (" + std::to_string(ppg.num_frames()) +
                     ") and TV (" + std::to_string(tv.num_frames()) +
                     ") frame counts disagree");
  return AcousticExample{id, up.values(), ppg.values().topRows(lo),
                         tv.values().topRows(lo)};
}

AcousticDataset build_acoustic_dataset(const DataSplits &splits,
                                       const AcousticProviders &providers,
                                       const DatasetOptions &options,
                                       const WaveformLoader &loader) {
  AcousticDataset data;
  data.geometry = options.geometry;
  auto collect = [&](const std::vector<UtteranceRecord> &records,
                     std::vector<AcousticExample> &out) {
    for (const auto &r : records) {
      const auto segments =
          segment_waveform(loader(r), options.segment_seconds);
      for (size_t k = 0; k < segments.size(); ++k)
        out.push_back(make_acoustic_example(
            r.utterance_id + "#" + std::to_string(k), segments[k], providers,
            options));
    }
  };
  collect(splits.train, data.train);
  collect(splits.dev, data.dev);
  if (data.train.empty()) throw ValidationError("no training segments");

  std::vector<TractVariableTrack> raw;
  const auto names = providers.tv->channel_names();
  for (const auto &ex : data.train)
    raw.emplace_back(FrameSequence(ex.tv_target, options.geometry.target_rate),
                     names, options.geometry);
  data.tv_stats = compute_tv_stats(raw);
  auto normalize = [&](std::vector<AcousticExample> &examples) {
    for (auto &ex : examples)
      ex.tv_target =
          normalize_tv_channels(
              TractVariableTrack(
                  FrameSequence(ex.tv_target, options.geometry.target_rate),
                  names, options.geometry),
              data.tv_stats, options.geometry)
              .values();
  };
  normalize(data.train);
  normalize(data.dev);
  return data;
}

AcousticTrainingTask::AcousticTrainingTask(AcousticModel &model,
                                           LossWeights weights,
                                           const AcousticDataset &data)
    : model_(model), weights_(weights), data_(data) {
  weights_.validate();
  if (!model_.initialized())
    throw StateError("acoustic model must be initialized before training");
}

LossBreakdown AcousticTrainingTask::train_batch(std::span<const size_t> batch,
                                                uint64_t dropout_seed) {
  nn::Graph g;
  std::vector<nn::Var> combined;
  double tv = 0.0, ppg = 0.0;
  for (size_t k = 0; k < batch.size(); ++k) {
    const AcousticExample &ex = data_.train.at(batch[k]);
    ForwardOptions opts{true, dropout_seed + k};
    AcousticModel::Heads h = model_.build(g, ex.embeddings, opts);
    const Index n = ex.frames();
    h.ppg_logits = nn::slice_rows(h.ppg_logits, 0, n);
    h.tv_estimates = nn::slice_rows(h.tv_estimates, 0, n);
    const LossNodes l =
        combined_loss_nodes(h, ex.ppg_target, ex.tv_target, weights_);
    combined.push_back(l.combined);
    tv += l.tv_loss.value()(0, 0);
    ppg += l.ppg_loss.value()(0, 0);
  }
  const auto n = static_cast<double>(batch.size());
  nn::Var loss = nn::scale(nn::sum_all(nn::concat_rows(combined)), 1.0 / n);
  g.backward(loss);
  return {loss.value()(0, 0), tv / n, ppg / n};
}

LossBreakdown AcousticTrainingTask::validate() {
  double total = 0.0, tv = 0.0, ppg = 0.0;
  const double rate = model_.config().output_rate();
  for (const auto &ex : data_.dev) {
    const MultiTaskOutput out = model_.forward(
        FrameSequence(ex.embeddings, model_.config().input_rate));
    const CombinedLossReport r =
        combined_loss(out, FrameSequence(ex.ppg_target, rate),
                      FrameSequence(ex.tv_target, rate), weights_);
    total += r.combined;
    tv += r.tv_loss;
    ppg += r.ppg_loss;
  }
  const auto n = static_cast<double>(data_.dev.size());
  return {total / n, tv / n, ppg / n};
}

AcousticDevMetrics evaluate_acoustic_model(
    const AcousticModel &model, const std::vector<AcousticExample> &examples) {
  if (examples.empty()) throw ValidationError("no examples to evaluate");
  Index frames = 0;
  for (const auto &ex : examples) frames += ex.frames();
  const auto &cfg = model.config();
  Matrix tv_est(frames, cfg.tv_dim), tv_ref(frames, cfg.tv_dim);
  Matrix post(frames, cfg.ppg_dim), ppg_ref(frames, cfg.ppg_dim);
  double ce = 0.0;
  Index row = 0;
  for (const auto &ex : examples) {
    const MultiTaskOutput out =
        model.forward(FrameSequence(ex.embeddings, cfg.input_rate));
    const Index n = ex.frames();
    tv_est.middleRows(row, n) = out.tv_estimates.values().topRows(n);
    tv_ref.middleRows(row, n) = ex.tv_target;
    const Matrix logits = out.ppg_logits.values().topRows(n);
    post.middleRows(row, n) = nn::softmax(logits);
    ppg_ref.middleRows(row, n) = ex.ppg_target;
    for (Index t = 0; t < n; ++t) {
      const double m = logits.row(t).maxCoeff();
      const double lse = m + std::log((logits.row(t).array() - m).exp().sum());
      ce -= ex.ppg_target.row(t).dot((logits.row(t).array() - lse).matrix());
    }
    row += n;
  }
  AcousticDevMetrics m;
  double ppmc_sum = 0.0;
  for (Index c = 0; c < cfg.tv_dim; ++c) {
    const Vector a = tv_est.col(c), b = tv_ref.col(c);
    try {
      ppmc_sum += ppmc(std::span<const double>(a.data(), size_t(a.size())),
                       std::span<const double>(b.data(), size_t(b.size())));
    } catch (const ValidationError &) {
      // A constant channel carries no correlation.
    }
  }
  m.tv_ppmc = ppmc_sum / static_cast<double>(cfg.tv_dim);
  m.tv_mae = (tv_est - tv_ref).cwiseAbs().mean();
  m.ppg_rmse = rmse(post, ppg_ref);
  m.ppg_cross_entropy = ce / static_cast<double>(frames);
  return m;
}

void GridSearchSpace::validate() const {
  if (alpha_grid.empty() || lr_grid.empty() || batch_grid.empty())
    throw ValidationError("grid search: every grid must be non-empty");
  for (double a : alpha_grid) LossWeights{a}.validate();
}

AlphaSelection select_alpha(std::vector<AlphaCandidate> candidates) {
  if (candidates.empty()) throw ValidationError("alpha grid is empty");
  auto minmax = [&](auto field) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto &c : candidates) {
      lo = std::min(lo, c.*field);
      hi = std::max(hi, c.*field);
    }
    return std::pair{lo, hi};
  };
  const auto [p_lo, p_hi] = minmax(&AlphaCandidate::tv_ppmc);
  const auto [r_lo, r_hi] = minmax(&AlphaCandidate::ppg_rmse);
  auto norm = [](double v, double lo, double hi) {
    return hi > lo ? (v - lo) / (hi - lo) : 0.0;
  };
  for (auto &c : candidates)
    c.score = norm(c.tv_ppmc, p_lo, p_hi) - norm(c.ppg_rmse, r_lo, r_hi);

  const AlphaCandidate *best = &candidates.front();
  for (const auto &c : candidates) {
    constexpr double kTie = 1e-12;
    if (c.score > best->score + kTie) {
      best = &c;
    } else if (std::abs(c.score - best->score) <= kTie) {
      const double dc = std::abs(c.alpha - kAlphaTieBreak);
      const double db = std::abs(best->alpha - kAlphaTieBreak);
      if (dc < db - kTie || (std::abs(dc - db) <= kTie && c.alpha < best->alpha))
        best = &c;
    }
  }
  AlphaSelection sel;
  sel.selected_alpha = best->alpha;
  sel.candidates = std::move(candidates);
  return sel;
}

AlphaSelection grid_search_alpha(const GridSearchSpace &space,
                                 const AcousticDataset &data,
                                 const AcousticModelConfig &config,
                                 const FitOptions &options,
                                 uint64_t init_seed) {
  if (space.alpha_grid.empty()) throw ValidationError("alpha grid is empty");
  for (double a : space.alpha_grid) LossWeights{a}.validate();
  std::vector<AlphaCandidate> candidates;
  for (double alpha : space.alpha_grid) {
    AcousticModel model(config);
    model.initialize(init_seed);
    AcousticTrainingTask task(model, LossWeights{alpha}, data);
    fit(task, options);
    const AcousticDevMetrics m = evaluate_acoustic_model(model, data.dev);
    candidates.push_back({alpha, m.tv_ppmc, m.ppg_rmse, 0.0});
  }
  return select_alpha(std::move(candidates));
}

HyperparameterSelection grid_search_hyperparameters(
    const GridSearchSpace &space, const AcousticDataset &data,
    const AcousticModelConfig &config, const LossWeights &weights,
    const FitOptions &options, uint64_t init_seed) {
  space.validate();
  HyperparameterSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (double lr : space.lr_grid)
    for (Index batch : space.batch_grid) {
      FitOptions o = options;
      o.optimizer.learning_rate = lr;
      o.optimizer.batch_size = batch;
      AcousticModel model(config);
      model.initialize(init_seed);
      AcousticTrainingTask task(model, weights, data);
      const FitResult r = fit(task, o);
      sel.candidates.push_back({lr, batch, r.best_val_loss});
      if (r.best_val_loss < best) {
        best = r.best_val_loss;
        sel.learning_rate = lr;
        sel.batch_size = batch;
      }
    }
  return sel;
}

}  // namespace fac
