// core/include/fac/mel.hpp

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

#ifndef FAC_MEL_HPP_
#define FAC_MEL_HPP_

#include <memory>

#include "fac/corpus.hpp"
#include "fac/frame_sequence.hpp"

namespace fac {

struct MelConfig {
  int sample_rate = 16000;
  int window_length = 400;  // 25 ms
  int hop_length = 160;     // 10 ms
  int fft_size = 512;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;

  void validate() const;
};

/// Log-mel analysis: periodic Hann window, power spectrum, HTK-scale
/// triangular filters, natural log with a floor. The FFT plan is built once
/// per extractor; compute() may be called concurrently.
class MelExtractor {
 public:
  explicit MelExtractor(MelConfig config = {});
  ~MelExtractor();
  MelExtractor(const MelExtractor &) = delete;
  MelExtractor &operator=(const MelExtractor &) = delete;

  /// frames = floor((num_samples - window) / hop) + 1.
  MelSpectrogram compute(const Waveform &wave) const;

  const MelConfig &config() const { return config_; }
  /// (fft_size/2 + 1) x 80 filter matrix.
  const Matrix &filterbank() const { return filterbank_; }

 private:
  struct Plan;
  MelConfig config_;
  Matrix filterbank_;
  Vector window_;
  std::unique_ptr<Plan> plan_;
};

MelSpectrogram compute_mel(const Waveform &wave, const MelConfig &config = {});

double hz_to_mel(double hz);
double mel_to_hz(double mel);

}  // namespace fac

#endif  // FAC_MEL_HPP_
