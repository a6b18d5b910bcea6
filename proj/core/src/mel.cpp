// core/src/mel.cpp

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

#include "fac/mel.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "fac/error.hpp"

namespace fac {

namespace {
// Planner calls are not thread-safe in FFTW; execution is.
std::mutex &fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct MelExtractor::Plan {
  fftw_plan plan = nullptr;
  int n = 0;
};

void MelConfig::validate() const {
  if (sample_rate <= 0 || window_length <= 0 || hop_length <= 0)
    throw ConfigError("mel: rate, window and hop must be positive");
  if (fft_size < window_length)
    throw ConfigError("mel: fft_size must be at least window_length");
  if (!(fmin >= 0.0 && fmax > fmin && fmax <= sample_rate / 2.0))
    throw ConfigError("mel: need 0 <= fmin < fmax <= sample_rate/2");
  if (!(log_floor > 0.0)) throw ConfigError("mel: log_floor must be positive");
  if (std::abs(static_cast<double>(sample_rate) / hop_length - kMelFrameRate) >
      1e-9)
    throw ConfigError("mel: hop must give a 100 Hz frame rate");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelExtractor::MelExtractor(MelConfig config)
    : config_(config), plan_(std::make_unique<Plan>()) {
  config_.validate();
  const int n = config_.fft_size;
  const int bins = n / 2 + 1;

  window_.resize(config_.window_length);
  for (int i = 0; i < config_.window_length; ++i)
    window_(i) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i /
                                      config_.window_length);

  const double mel_lo = hz_to_mel(config_.fmin);
  const double mel_hi = hz_to_mel(config_.fmax);
  std::vector<double> edges(kMelChannels + 2);
  for (int m = 0; m < kMelChannels + 2; ++m)
    edges[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (kMelChannels + 1));
  filterbank_ = Matrix::Zero(bins, kMelChannels);
  for (int k = 0; k < bins; ++k) {
    const double f = static_cast<double>(k) * config_.sample_rate / n;
    for (int m = 0; m < kMelChannels; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      if (f > lo && f < hi)
        filterbank_(k, m) = f <= mid ? (f - lo) / (mid - lo)
                                     : (hi - f) / (hi - mid);
    }
  }

  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  double *in = fftw_alloc_real(n);
  fftw_complex *out = fftw_alloc_complex(bins);
  plan_->plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
  plan_->n = n;
  fftw_free(in);
  fftw_free(out);
}

MelExtractor::~MelExtractor() {
  if (plan_ && plan_->plan) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_->plan);
  }
}

MelSpectrogram MelExtractor::compute(const Waveform &wave) const {
  wave.validate();
  if (wave.sample_rate != config_.sample_rate)
    throw ValidationError("mel: expected " +
                          std::to_string(config_.sample_rate) +
                          " Hz audio, got " + std::to_string(wave.sample_rate));
  const auto num_samples = static_cast<Index>(wave.samples.size());
  if (num_samples < config_.window_length)
    throw ValidationError("input shorter than analysis window");

  const Index frames =
      (num_samples - config_.window_length) / config_.hop_length + 1;
  const int n = plan_->n;
  const int bins = n / 2 + 1;
  double *in = fftw_alloc_real(n);
  fftw_complex *out = fftw_alloc_complex(bins);

  Matrix power(frames, bins);
  for (Index t = 0; t < frames; ++t) {
    const Index start = t * config_.hop_length;
    for (int i = 0; i < n; ++i)
      in[i] = i < config_.window_length
                  ? wave.samples[static_cast<size_t>(start + i)] * window_(i)
                  : 0.0;
    fftw_execute_dft_r2c(plan_->plan, in, out);
    for (int k = 0; k < bins; ++k)
      power(t, k) = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
  fftw_free(in);
  fftw_free(out);

  Matrix mel = power * filterbank_;
  mel = mel.array().max(config_.log_floor).log().matrix();
  return MelSpectrogram(FrameSequence(std::move(mel), kMelFrameRate));
}

MelSpectrogram compute_mel(const Waveform &wave, const MelConfig &config) {
  return MelExtractor(config).compute(wave);
}

}  // namespace fac
