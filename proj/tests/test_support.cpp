// tests/test_support.cpp

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

#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>

#include <unistd.h>

#include "fac/wav_io.hpp"

namespace fac::testing {

TempDir::TempDir(const std::string &tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

Waveform synth_waveform(double seconds, uint64_t seed, int sample_rate) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  const double f0 = 90.0 + 120.0 * u(rng);
  const double phase = 2.0 * std::numbers::pi * u(rng);
  const double wobble = 1.0 + 3.0 * u(rng);
  Waveform w;
  w.sample_rate = sample_rate;
  const auto n = static_cast<size_t>(std::llround(seconds * sample_rate));
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double env = 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * wobble * t);
    double s = 0.0;
    for (int h = 1; h <= 5; ++h)
      s += std::sin(2.0 * std::numbers::pi * f0 * h * t + phase * h) / h;
    w.samples[i] = 0.3 * env * s + noise(rng);
  }
  return w;
}

std::string corpus_sentence(int k) {
  static const char *kWords[] = {"author", "of", "the", "danger", "trail",
                                 "philip", "steels", "etc", "not", "at",
                                 "this", "particular", "case", "tom"};
  std::string s;
  for (int i = 0; i < 5; ++i) {
    if (!s.empty()) s += ' ';
    s += kWords[(k * 3 + i * 5) % 14];
  }
  return s + " " + std::to_string(k);
}

Corpus make_corpus(const std::filesystem::path &dir,
                   const std::vector<std::string> &speakers,
                   int utterances_per_speaker, double seconds, uint64_t seed,
                   const std::vector<std::string> &l1_speakers) {
  Corpus c;
  std::filesystem::create_directories(dir);
  uint64_t n = 0;
  for (const auto &spk : speakers) {
    const bool l1 = std::find(l1_speakers.begin(), l1_speakers.end(), spk) !=
                    l1_speakers.end();
    for (int k = 0; k < utterances_per_speaker; ++k) {
      UtteranceRecord r;
      r.utterance_id = spk + "_" + std::to_string(k);
      r.speaker_id = spk;
      r.native_language = l1 ? "en" : "l2";
      r.transcript = corpus_sentence(k);
      r.audio_path = std::filesystem::path("audio") / spk / (r.utterance_id + ".wav");
      r.split = (utterances_per_speaker >= 3 && k == utterances_per_speaker - 1)
                    ? Split::kDev
                    : Split::kTrain;
      std::filesystem::create_directories(dir / r.audio_path.parent_path());
      write_wav(dir / r.audio_path, synth_waveform(seconds, mix_seed(seed, ++n)));
      c.records.push_back(r);
    }
  }
  c.manifest = dir / "manifest.jsonl";
  std::ofstream out(c.manifest);
  write_manifest(out, c.records);
  for (auto &r : c.records) r.audio_path = dir / r.audio_path;
  return c;
}

Matrix numeric_gradient(nn::Parameter &p, const std::function<double()> &f,
                        double h) {
  Matrix g(p.value.rows(), p.value.cols());
  for (Index j = 0; j < p.value.cols(); ++j)
    for (Index i = 0; i < p.value.rows(); ++i) {
      const double orig = p.value(i, j);
      p.value(i, j) = orig + h;
      const double up = f();
      p.value(i, j) = orig - h;
      const double down = f();
      p.value(i, j) = orig;
      g(i, j) = (up - down) / (2.0 * h);
    }
  return g;
}

double max_relative_error(const Matrix &a, const Matrix &b) {
  double worst = 0.0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) {
      const double scale =
          std::max({1e-8, std::abs(a(i, j)), std::abs(b(i, j))});
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / scale);
    }
  return worst;
}

}  // namespace fac::testing
