// tests/test_features.cpp

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

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <thread>

#include "doctest.h"
#include "fac/error.hpp"
#include "fac/feature_cache.hpp"
#include "fac/mel.hpp"
#include "fac/providers.hpp"
#include "fac/random.hpp"
#include "test_support.hpp"

using namespace fac;

namespace {

// Slow reference log-mel: explicit DFT and filters built on the natural-log
// form of the HTK scale.
Matrix reference_log_mel(const std::vector<double> &x) {
  const int win = 400, hop = 160, n = 512, bins = n / 2 + 1, sr = 16000;
  const auto to_mel = [](double f) { return 1127.0 * std::log1p(f / 700.0); };
  const auto from_mel = [](double m) { return 700.0 * std::expm1(m / 1127.0); };
  std::vector<double> edges(82);
  for (int m = 0; m < 82; ++m) edges[m] = from_mel(to_mel(8000.0) * m / 81.0);
  const int frames = (static_cast<int>(x.size()) - win) / hop + 1;
  Matrix out(frames, 80);
  for (int t = 0; t < frames; ++t) {
    std::vector<double> power(bins);
    for (int k = 0; k < bins; ++k) {
      std::complex<double> acc = 0;
      for (int i = 0; i < win; ++i) {
        const double w = 0.5 * (1 - std::cos(2 * std::numbers::pi * i / win));
        acc += x[static_cast<size_t>(t * hop + i)] * w *
               std::polar(1.0, -2 * std::numbers::pi * k * i / n);
      }
      power[k] = std::norm(acc);
    }
    for (int m = 0; m < 80; ++m) {
      double e = 0;
      for (int k = 0; k < bins; ++k) {
        const double f = static_cast<double>(k) * sr / n;
        double tri = 0;
        if (f > edges[m] && f <= edges[m + 1]) tri = (f - edges[m]) / (edges[m + 1] - edges[m]);
        else if (f > edges[m + 1] && f < edges[m + 2])
          tri = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
        e += tri * power[k];
      }
      out(t, m) = std::log(std::max(e, 1e-10));
    }
  }
  return out;
}

Waveform seconds_of_audio(double seconds, uint64_t seed = 1) {
  return testing::synth_waveform(seconds, seed);
}

FeatureGeometry small_geometry() {
  FeatureGeometry g;
  g.upstream_dim = 16;
  g.ppg_dim = 12;
  return g;
}

// Provider returning whatever matrix it was constructed with.
struct FixedUpstream : UpstreamProvider {
  FrameSequence seq;
  std::string id() const override { return "fixed-upstream"; }
  FrameSequence embed(const Waveform &) override { return seq; }
};
struct FixedPpg : PpgProvider {
  FrameSequence seq;
  std::string id() const override { return "fixed-ppg"; }
  FrameSequence posteriors(const Waveform &) override { return seq; }
};
struct FixedTv : TvProvider {
  FrameSequence seq;
  std::string id() const override { return "fixed-tv"; }
  FrameSequence tract_variables(const Waveform &) override { return seq; }
};
struct ThrowingTv : TvProvider {
  std::string id() const override { return "broken-tv"; }
  FrameSequence tract_variables(const Waveform &) override {
    throw std::runtime_error("model exploded");
  }
};

}  // namespace

TEST_CASE("mel: frame count follows the window/hop formula") {
  const auto mel = compute_mel(seconds_of_audio(2.0));
  CHECK(mel.num_frames() == 198);
  CHECK(mel.num_channels() == 80);
  CHECK(mel.frame_rate() == 100.0);
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    Waveform w;
    const int n = std::uniform_int_distribution<int>(400, 5000)(rng);
    w.samples.assign(static_cast<size_t>(n), 0.1);
    CHECK(compute_mel(w).num_frames() == (n - 400) / 160 + 1);
  }
}

TEST_CASE("mel: matches a direct DFT and filterbank reference") {
  const Waveform w = seconds_of_audio(0.12, 9);
  const Matrix ref = reference_log_mel(w.samples);
  const auto mel = compute_mel(w);
  REQUIRE(mel.num_frames() == ref.rows());
  CHECK((mel.values() - ref).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("mel: silence gives identical floor frames") {
  Waveform w;
  w.samples.assign(16000, 0.0);
  const auto mel = compute_mel(w);
  for (Index t = 1; t < mel.num_frames(); ++t) REQUIRE(mel.values().row(t) == mel.values().row(0));
  CHECK((mel.values().array() - std::log(1e-10)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("mel: rejects short input and wrong rate") {
  Waveform w;
  w.samples.assign(300, 0.0);
  try {
    compute_mel(w);
    FAIL("expected ValidationError");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()) == "input shorter than analysis window");
  }
  w.samples.assign(800, 0.0);
  w.sample_rate = 22050;
  CHECK_THROWS_AS(compute_mel(w), ValidationError);
  MelConfig bad;
  bad.hop_length = 200;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("mel: extractor is deterministic and usable from several threads") {
  MelExtractor ex;
  const Waveform w = seconds_of_audio(0.5, 3);
  const Matrix first = ex.compute(w).values();
  std::vector<Matrix> results(4);
  std::vector<std::thread> threads;
  for (size_t i = 0; i < results.size(); ++i)
    threads.emplace_back([&, i] { results[i] = ex.compute(w).values(); });
  for (auto &t : threads) t.join();
  for (const auto &r : results) CHECK(r == first);
}

TEST_CASE("mel scale helpers are inverse") {
  for (double f : {0.0, 100.0, 1000.0, 7999.0}) CHECK(mel_to_hz(hz_to_mel(f)) == doctest::Approx(f));
  CHECK(hz_to_mel(1000.0) == doctest::Approx(1000.0).epsilon(1e-3));
}

TEST_CASE("upstream ingestion: production geometry shape and zero output") {
  const Waveform w = seconds_of_audio(2.0);
  MockUpstreamProvider proj;
  const auto e = get_upstream_embeddings(w, proj);
  CHECK(e.num_frames() == 100);
  CHECK(e.num_channels() == 1024);
  CHECK(e.frame_rate() == 50.0);
  MockUpstreamProvider zeros({}, 16000, MockUpstreamProvider::Mode::kZeros);
  const auto z = get_upstream_embeddings(w, zeros);
  CHECK(z.num_frames() == 100);
  CHECK(z.values().isZero());
}

TEST_CASE("upstream ingestion: shape, rate and readiness errors") {
  const Waveform w = seconds_of_audio(2.0);
  FixedUpstream p;
  p.seq = FrameSequence(Matrix::Zero(100, 512), 50.0);
  CHECK_THROWS_AS(get_upstream_embeddings(w, p), ValidationError);
  p.seq = FrameSequence(Matrix::Zero(100, 1024), 100.0);
  CHECK_THROWS_AS(get_upstream_embeddings(w, p), ValidationError);
  p.seq = FrameSequence(Matrix::Zero(101, 1024), 50.0);
  CHECK(get_upstream_embeddings(w, p).num_frames() == 101);
  p.seq = FrameSequence(Matrix::Zero(103, 1024), 50.0);
  CHECK_THROWS_AS(get_upstream_embeddings(w, p), ValidationError);
  MockUpstreamProvider unloaded({}, 16000, MockUpstreamProvider::Mode::kProjection, 1, false);
  CHECK_THROWS_AS(get_upstream_embeddings(w, unloaded), StateError);
}

TEST_CASE("ppg ingestion: uniform rows, renormalization and invalid rows") {
  const Waveform w = seconds_of_audio(2.0);
  MockUniformPpgProvider uni;
  const auto ppg = get_ppg_targets(w, uni);
  CHECK(ppg.num_frames() == 200);
  CHECK(ppg.num_channels() == 5816);
  CHECK((ppg.values().array() - 1.0 / 5816).abs().maxCoeff() < 1e-15);

  const FeatureGeometry g = small_geometry();
  FixedPpg p;
  Matrix rows = Matrix::Constant(200, 12, 1.0 / 12);
  rows.row(3) *= 1.0005;
  p.seq = FrameSequence(rows, 100.0);
  const auto fixed = get_ppg_targets(w, p, g);
  CHECK(std::abs(fixed.values().row(3).sum() - 1.0) < 1e-12);
  rows.row(3) *= 0.5;
  p.seq = FrameSequence(rows, 100.0);
  CHECK_THROWS_AS(get_ppg_targets(w, p, g), ValidationError);
  rows = Matrix::Constant(200, 12, 1.0 / 12);
  rows(0, 0) = -0.01;
  rows(0, 1) += 0.01;
  p.seq = FrameSequence(rows, 100.0);
  CHECK_THROWS_AS(get_ppg_targets(w, p, g), ValidationError);
}

TEST_CASE("ppg ingestion: every row is a distribution after ingestion") {
  const FeatureGeometry g = small_geometry();
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_real_distribution<double> dev(-9e-4, 9e-4);
  const Waveform w = seconds_of_audio(0.5);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix rows(50, 12);
    for (Index t = 0; t < 50; ++t) {
      for (Index c = 0; c < 12; ++c) rows(t, c) = u(rng);
      rows.row(t) *= (1.0 + dev(rng)) / rows.row(t).sum();
    }
    FixedPpg p;
    p.seq = FrameSequence(rows, 100.0);
    const auto out = get_ppg_targets(w, p, g);
    CHECK(out.values().minCoeff() >= 0.0);
    for (Index t = 0; t < 50; ++t) REQUIRE(std::abs(out.values().row(t).sum() - 1.0) <= 1e-4);
  }
}

TEST_CASE("harden_posteriors gives one-hot argmax rows") {
  const FeatureGeometry g = small_geometry();
  Matrix rows = Matrix::Constant(2, 12, 0.05);
  rows(0, 4) = 0.45;
  rows(1, 2) = 0.275;
  rows(1, 7) = 0.275;
  rows.row(1) /= rows.row(1).sum();
  const PosteriorgramTrack soft(FrameSequence(rows, 100.0), g);
  const auto hard = harden_posteriors(soft, g);
  CHECK(hard.values()(0, 4) == 1.0);
  CHECK(hard.values()(1, 2) == 1.0);
  CHECK(hard.values().sum() == 2.0);
}

TEST_CASE("tv ingestion: shape, determinism and errors") {
  const Waveform w = seconds_of_audio(2.0);
  MockSineTvProvider sine;
  const auto a = get_tv_targets(w, sine);
  const auto b = get_tv_targets(w, sine);
  CHECK(a.num_frames() == 200);
  CHECK(a.num_channels() == 6);
  CHECK(a.values() == b.values());
  CHECK(a.channel_names() == default_tv_channel_names());

  FixedTv four;
  four.seq = FrameSequence(Matrix::Zero(200, 4), 100.0);
  CHECK_THROWS_AS(get_tv_targets(w, four), ValidationError);

  ThrowingTv broken;
  try {
    get_tv_targets(w, broken, {}, "utt7");
    FAIL("expected ProviderError");
  } catch (const ProviderError &e) {
    CHECK(e.provider_id() == "broken-tv");
    CHECK(e.context().find("utt7") != std::string::npos);
    CHECK(std::string(e.what()).find("model exploded") != std::string::npos);
  }
}

TEST_CASE("tv normalization: examples") {
  TvNormalizationStats stats;
  stats.min.assign(6, 0.0);
  stats.max.assign(6, 10.0);
  stats.channel_names = default_tv_channel_names();
  Matrix v(3, 6);
  v.row(0).setConstant(5.0);
  v.row(1).setConstant(10.0);
  v.row(2).setConstant(12.0);
  const TractVariableTrack track(FrameSequence(v, 100.0), stats.channel_names, {});
  const auto n = normalize_tv_channels(track, stats);
  CHECK(n.values().row(0).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(n.values().row(1).isConstant(0.95, 1e-12));
  CHECK(n.values().row(2).isConstant(0.95, 1e-12));

  stats.max[2] = 0.0;
  try {
    normalize_tv_channels(track, stats);
    FAIL("expected ValidationError");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()).find("TBCL") != std::string::npos);
  }
}

TEST_CASE("tv normalization: clamp oracle, endpoints, monotonicity and inverse") {
  Rng rng(21);
  std::normal_distribution<double> nd(0.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix train(40, 6), test(40, 6);
    for (Index i = 0; i < 40; ++i)
      for (Index c = 0; c < 6; ++c) {
        train(i, c) = nd(rng) + static_cast<double>(c);
        test(i, c) = nd(rng) * 1.5 + static_cast<double>(c);
      }
    const TractVariableTrack tr(FrameSequence(train, 100.0), default_tv_channel_names(), {});
    const TractVariableTrack te(FrameSequence(test, 100.0), default_tv_channel_names(), {});
    const auto stats = compute_tv_stats({tr});
    const auto n_train = normalize_tv_channels(tr, stats);
    const auto n_test = normalize_tv_channels(te, stats);
    for (Index c = 0; c < 6; ++c) {
      const auto k = static_cast<size_t>(c);
      CHECK(stats.min[k] == train.col(c).minCoeff());
      CHECK(stats.max[k] == train.col(c).maxCoeff());
      CHECK(std::abs(n_train.values().col(c).minCoeff() + 0.95) < 1e-9);
      CHECK(std::abs(n_train.values().col(c).maxCoeff() - 0.95) < 1e-9);
      for (Index i = 0; i < 40; ++i) {
        const double slope = 1.9 / (stats.max[k] - stats.min[k]);
        const double expect = std::clamp(-0.95 + (test(i, c) - stats.min[k]) * slope, -0.95, 0.95);
        REQUIRE(std::abs(n_test.values()(i, c) - expect) < 1e-12);
        for (Index j = 0; j < 40; ++j)
          if (test(i, c) < test(j, c)) REQUIRE(n_test.values()(i, c) <= n_test.values()(j, c));
      }
    }
    CHECK(n_test.values().cwiseAbs().maxCoeff() <= 1.0);
    const auto back = denormalize_tv_channels(n_train, stats);
    CHECK((back.values() - train).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("feature cache: bitwise round trips across shapes and rates") {
  testing::TempDir dir;
  Rng rng(4);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const Index frames = std::uniform_int_distribution<Index>(0, 60)(rng);
    const Index channels = std::uniform_int_distribution<Index>(1, 30)(rng);
    const double rate = std::uniform_real_distribution<double>(1.0, 400.0)(rng);
    Matrix v(frames, channels);
    for (Index i = 0; i < v.size(); ++i) v.data()[i] = nd(rng);
    const FrameSequence seq(v, rate);
    const auto p = dir / ("c" + std::to_string(trial) + ".facf");
    const auto back64 = feature_cache_roundtrip(seq, p, CacheDtype::kFloat64);
    CHECK(back64.values() == v);
    CHECK(back64.frame_rate() == rate);
    CHECK(back64.num_channels() == channels);
    const Matrix vf = v.cast<float>().cast<double>();
    const auto back32 = feature_cache_roundtrip(FrameSequence(vf, rate), p, CacheDtype::kFloat32);
    CHECK(back32.values() == vf);
    CHECK(back32.num_channels() == channels);
  }
}

TEST_CASE("feature cache: 200x6 track, empty sequence and sidecar") {
  testing::TempDir dir;
  Rng rng(1);
  const Matrix v = random_normal(200, 6, 1.0, rng);
  const FrameSequence seq(v, 100.0);
  CHECK(feature_cache_roundtrip(seq, dir / "t.facf", CacheDtype::kFloat64).values() == v);
  const FrameSequence empty(Matrix(0, 6), 100.0);
  const auto e = feature_cache_roundtrip(empty, dir / "e.facf");
  CHECK(e.num_frames() == 0);
  CHECK(e.num_channels() == 6);

  FeatureSidecar meta{default_tv_channel_names(), "mock-tv-sine", "u1", {"a", "b"}};
  write_feature_sidecar(dir / "t.facf", meta);
  CHECK(sidecar_path(dir / "t.facf").filename() == "t.facf.json");
  const auto back = read_feature_sidecar(dir / "t.facf");
  CHECK(back.channel_names == meta.channel_names);
  CHECK(back.provider_id == "mock-tv-sine");
  CHECK(back.utterance_id == "u1");
  CHECK(back.row_labels == meta.row_labels);
}

TEST_CASE("feature cache: corruption is detected") {
  testing::TempDir dir;
  Rng rng(1);
  const FrameSequence seq(random_normal(20, 6, 1.0, rng), 100.0);
  const auto p = dir / "x.facf";
  write_feature_cache(p, seq, CacheDtype::kFloat64);
  const auto full = std::filesystem::file_size(p);
  CHECK(full == kFeatureCacheHeaderBytes + 20 * 6 * 8);

  std::filesystem::resize_file(p, full - 13);
  CHECK_THROWS_AS(read_feature_cache(p), IntegrityError);
  std::filesystem::resize_file(p, 10);
  CHECK_THROWS_AS(read_feature_cache(p), IntegrityError);

  write_feature_cache(p, seq, CacheDtype::kFloat64);
  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('X');
  }
  CHECK_THROWS_AS(read_feature_cache(p), IntegrityError);
  write_feature_cache(p, seq, CacheDtype::kFloat64);
  {
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(5);
    f.put(9);
  }
  CHECK_THROWS_AS(read_feature_cache(p), IntegrityError);
  {
    std::ofstream f(p, std::ios::app | std::ios::binary);
    f << "extra";
  }
  CHECK_THROWS_AS(read_feature_cache(p), IntegrityError);
  CHECK_THROWS_AS(read_feature_cache(dir / "missing.facf"), IoError);
}
