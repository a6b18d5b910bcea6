// benchmarks/bench_main.cpp

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

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "fac/acoustic_model.hpp"
#include "fac/evaluation.hpp"
#include "fac/mel.hpp"
#include "fac/random.hpp"

namespace {

fac::Waveform noise(double seconds, uint64_t seed) {
  fac::Rng rng(seed);
  fac::Waveform w;
  w.sample_rate = 16000;
  const auto m = fac::random_normal(static_cast<fac::Index>(seconds * 16000), 1, 0.1, rng);
  w.samples.assign(m.data(), m.data() + m.size());
  return w;
}

void BM_LogMel(benchmark::State &state) {
  const fac::Waveform w = noise(static_cast<double>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fac::compute_mel(w));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 100);
}
BENCHMARK(BM_LogMel)->Arg(2)->Arg(10)->Unit(benchmark::kMillisecond);

// Acoustic model forward pass (BiLSTM trunk and both heads) on 2 s of input.
void BM_AcousticForward(benchmark::State &state) {
  fac::AcousticModelConfig c;
  c.input_dim = state.range(0);
  c.bilstm_hidden = state.range(1);
  c.ppg_dim = 512;
  fac::AcousticModel model(c);
  model.initialize(2);
  fac::Rng rng(3);
  const fac::FrameSequence in(fac::random_normal(100, c.input_dim, 1.0, rng), 50.0);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(in));
}
BENCHMARK(BM_AcousticForward)->Args({64, 32})->Args({256, 128})->Unit(benchmark::kMillisecond);

void BM_Dtw(benchmark::State &state) {
  fac::Rng rng(4);
  fac::MelCepstra a, b;
  a.values = fac::random_normal(state.range(0), 14, 1.0, rng);
  b.values = fac::random_normal(state.range(0) + state.range(0) / 5, 14, 1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fac::dtw_align(a, b));
}
BENCHMARK(BM_Dtw)->Arg(200)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_Wer(benchmark::State &state) {
  const std::vector<std::string> vocab = {"please", "call", "stella", "ask", "her", "to",
                                          "bring", "these", "things", "with", "from", "store"};
  fac::Rng rng(5);
  std::string ref, hyp;
  for (int i = 0; i < state.range(0); ++i) {
    ref += vocab[rng() % vocab.size()] + " ";
    hyp += vocab[rng() % vocab.size()] + " ";
  }
  for (auto _ : state) benchmark::DoNotOptimize(fac::wer(ref, hyp));
}
BENCHMARK(BM_Wer)->Arg(20)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
