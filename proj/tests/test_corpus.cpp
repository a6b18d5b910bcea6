// tests/test_corpus.cpp

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

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fac/corpus.hpp"
#include "fac/error.hpp"
#include "fac/random.hpp"
#include "fac/wav_io.hpp"
#include "test_support.hpp"

using namespace fac;

namespace {

UtteranceRecord rec(const std::string &id, const std::string &spk,
                    Split split = Split::kTrain, const std::string &text = "hello") {
  UtteranceRecord r;
  r.utterance_id = id;
  r.speaker_id = spk;
  r.native_language = spk == "BDL" ? "en" : "l2";
  r.transcript = text;
  r.audio_path = id + ".wav";
  r.split = split;
  return r;
}

std::string manifest_of(const std::vector<UtteranceRecord> &records) {
  std::ostringstream os;
  write_manifest(os, records);
  return os.str();
}

}  // namespace

TEST_CASE("manifest: empty input gives no records") {
  std::istringstream in("");
  CHECK(parse_manifest(in).empty());
  std::istringstream blanks("\n   \n\t\n");
  CHECK(parse_manifest(blanks).empty());
}

TEST_CASE("manifest: order is preserved and round trips") {
  const std::vector<UtteranceRecord> records = {rec("u1", "BDL"), rec("u2", "NJS", Split::kDev)};
  std::istringstream in(manifest_of(records));
  const auto parsed = parse_manifest(in);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].utterance_id == "u1");
  CHECK(parsed[1].utterance_id == "u2");
  CHECK(parsed == records);
}

TEST_CASE("manifest: duplicate id is a validation error quoting the id") {
  std::istringstream in(manifest_of({rec("u1", "BDL"), rec("u2", "BDL"), rec("u1", "NJS")}));
  try {
    parse_manifest(in);
    FAIL("expected ValidationError");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()).find("\"u1\"") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("manifest: malformed line names the line number") {
  std::string text = manifest_line(rec("u1", "BDL")) + "\n{not json\n";
  std::istringstream in(text);
  try {
    parse_manifest(in);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream missing_field(R"({"utterance_id": "u1"})");
  CHECK_THROWS_AS(parse_manifest(missing_field), ParseError);
  std::istringstream bad_split(
      R"({"utterance_id":"u","speaker_id":"s","native_language":"en","transcript":"t","audio_path":"a.wav","sample_rate":16000,"split":"nope"})");
  CHECK_THROWS_AS(parse_manifest(bad_split), ParseError);
  std::istringstream bad_rate(
      R"({"utterance_id":"u","speaker_id":"s","native_language":"en","transcript":"t","audio_path":"a.wav","sample_rate":0,"split":"train"})");
  CHECK_THROWS_AS(parse_manifest(bad_rate), ValidationError);
}

TEST_CASE("manifest: missing file is an I/O error and relative paths resolve") {
  CHECK_THROWS_AS(load_manifest("/nonexistent/dir/manifest.jsonl"), IoError);
  testing::TempDir dir;
  {
    std::ofstream out(dir / "m.jsonl");
    out << manifest_line(rec("u1", "BDL")) << "\n";
  }
  const auto records = load_manifest(dir / "m.jsonl");
  REQUIRE(records.size() == 1);
  CHECK(records[0].audio_path == dir.path() / "u1.wav");
}

TEST_CASE("build_splits: held-out speaker records all land in heldout") {
  const std::vector<UtteranceRecord> records = {
      rec("b1", "BDL"), rec("b2", "BDL", Split::kDev), rec("n1", "NJS"),
      rec("n2", "NJS", Split::kDev), rec("n3", "NJS", Split::kTest)};
  const DataSplits s = build_splits(records, {"NJS"});
  CHECK(s.heldout.size() == 3);
  for (const auto &r : s.heldout) CHECK(r.speaker_id == "NJS");
  REQUIRE(s.train.size() == 1);
  CHECK(s.train[0].utterance_id == "b1");
  REQUIRE(s.dev.size() == 1);
  CHECK(s.dev[0].utterance_id == "b2");
}

TEST_CASE("build_splits: empty held-out set and unknown speaker") {
  const std::vector<UtteranceRecord> records = {rec("b1", "BDL"), rec("b2", "BDL", Split::kDev),
                                                rec("b3", "BDL", Split::kTest)};
  const DataSplits s = build_splits(records, {});
  CHECK(s.heldout.empty());
  CHECK(s.train.size() == 1);
  CHECK(s.dev.size() == 1);
  CHECK(s.test.size() == 1);
  CHECK_THROWS_AS(build_splits(records, {"XYZ"}), ValidationError);
}

TEST_CASE("build_splits: speaker disjointness on random manifests") {
  Rng rng(11);
  const std::vector<std::string> speakers = {"BDL", "NJS", "TXHC", "YKWK", "ZHAA", "ABA"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<UtteranceRecord> records;
    const int n = std::uniform_int_distribution<int>(1, 40)(rng);
    for (int i = 0; i < n; ++i) {
      const auto &spk = speakers[std::uniform_int_distribution<size_t>(0, 5)(rng)];
      const auto split = static_cast<Split>(std::uniform_int_distribution<int>(0, 3)(rng));
      records.push_back(rec("u" + std::to_string(i), spk, split));
    }
    std::set<std::string> present;
    for (const auto &r : records) present.insert(r.speaker_id);
    std::set<std::string> heldout;
    for (const auto &s : present)
      if (std::bernoulli_distribution(0.4)(rng)) heldout.insert(s);
    const DataSplits s = build_splits(records, heldout);
    std::set<std::string> train_ids;
    for (const auto *bucket : {&s.train, &s.dev}) {
      for (const auto &r : *bucket) {
        CHECK(heldout.count(r.speaker_id) == 0);
        if (bucket == &s.train) train_ids.insert(r.utterance_id);
      }
    }
    for (const auto &r : s.dev) CHECK(train_ids.count(r.utterance_id) == 0);
    for (const auto &r : s.heldout) CHECK(heldout.count(r.speaker_id) == 1);
    CHECK(s.train.size() + s.dev.size() + s.heldout.size() + s.test.size() == records.size());
  }
}

TEST_CASE("segment_waveform: exact fit, padding and empty input") {
  Waveform w;
  w.samples.assign(32000, 0.25);
  auto segs = segment_waveform(w, 2.0);
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].samples.size() == 32000);
  CHECK(segs[0].samples.back() == 0.25);

  w.samples.assign(56000, 0.5);
  segs = segment_waveform(w, 2.0);
  REQUIRE(segs.size() == 2);
  CHECK(segs[1].samples.size() == 32000);
  CHECK(segs[1].samples[23999] == 0.5);
  for (size_t i = 24000; i < 32000; ++i) REQUIRE(segs[1].samples[i] == 0.0);

  w.samples.clear();
  CHECK(segment_waveform(w, 2.0).empty());
  CHECK_THROWS_AS(segment_waveform(w, 0.0), ValidationError);
}

TEST_CASE("segment_waveform: round trip and lengths on random inputs") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    Waveform w;
    const size_t n = std::uniform_int_distribution<size_t>(1, 70000)(rng);
    std::normal_distribution<double> d;
    for (size_t i = 0; i < n; ++i) w.samples.push_back(d(rng));
    const double sec = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    const auto segs = segment_waveform(w, sec);
    const auto len = static_cast<size_t>(std::llround(sec * w.sample_rate));
    std::vector<double> joined;
    for (const auto &s : segs) {
      REQUIRE(s.samples.size() == len);
      joined.insert(joined.end(), s.samples.begin(), s.samples.end());
    }
    REQUIRE(joined.size() >= n);
    joined.resize(n);
    CHECK(joined == w.samples);
  }
}

TEST_CASE("normalize_transcript") {
  CHECK(normalize_transcript("  Author of the Danger-Trail, Philip Steels, etc.  ") ==
        "author of the dangertrail philip steels etc");
  CHECK(normalize_transcript("A\tB\n\nC") == "a b c");
  CHECK(normalize_transcript("!!!") == "");
}

TEST_CASE("find_parallel_reference") {
  const std::vector<UtteranceRecord> l1 = {
      rec("arctic_a0001", "BDL", Split::kTrain, "Author of the danger trail, Philip Steels, etc."),
      rec("arctic_a0002", "BDL", Split::kTrain, "Not at this particular case, Tom.")};
  const UtteranceRecord l2 =
      rec("NJS_arctic_a0001", "NJS", Split::kTest, "author of the DANGER trail philip steels etc");
  CHECK(find_parallel_reference(l2, l1).utterance_id == "arctic_a0001");

  const UtteranceRecord missing = rec("NJS_x", "NJS", Split::kTest, "something else");
  try {
    find_parallel_reference(missing, l1);
    FAIL("expected NotFoundError");
  } catch (const NotFoundError &e) {
    CHECK(std::string(e.what()).find("NJS_x") != std::string::npos);
  }
  auto dup = l1;
  dup.push_back(rec("arctic_b", "BDL", Split::kTrain, "Not at this particular case Tom"));
  CHECK_THROWS_AS(find_parallel_reference(rec("q", "NJS", Split::kTest, "not at this particular case, tom"), dup),
                  AmbiguityError);
  auto mixed = l1;
  mixed.push_back(rec("other", "CLB", Split::kTrain, "zzz"));
  CHECK_THROWS_AS(find_parallel_reference(l2, mixed), ValidationError);
}

TEST_CASE("find_parallel_reference matches iff normalized transcripts agree") {
  Rng rng(3);
  const std::vector<std::string> pieces = {"a", "B", "c.", "d,", " ", "E!", "f"};
  for (int trial = 0; trial < 100; ++trial) {
    auto make = [&] {
      std::string s;
      const int n = std::uniform_int_distribution<int>(1, 5)(rng);
      for (int i = 0; i < n; ++i) s += pieces[std::uniform_int_distribution<size_t>(0, 6)(rng)] + " ";
      return s;
    };
    const std::string a = make(), b = make();
    if (normalize_transcript(a).empty() || normalize_transcript(b).empty()) continue;
    const std::vector<UtteranceRecord> l1 = {rec("ref", "BDL", Split::kTrain, b)};
    const UtteranceRecord l2 = rec("q", "NJS", Split::kTest, a);
    if (normalize_transcript(a) == normalize_transcript(b))
      CHECK(find_parallel_reference(l2, l1).utterance_id == "ref");
    else
      CHECK_THROWS_AS(find_parallel_reference(l2, l1), NotFoundError);
  }
}

TEST_CASE("wav round trip and waveform validation") {
  testing::TempDir dir;
  Waveform w = testing::synth_waveform(0.3, 4);
  write_wav(dir / "a.wav", w);
  const Waveform back = read_wav(dir / "a.wav");
  REQUIRE(back.samples.size() == w.samples.size());
  CHECK(back.sample_rate == 16000);
  for (size_t i = 0; i < w.samples.size(); ++i)
    REQUIRE(std::abs(back.samples[i] - w.samples[i]) <= 1.0 / 32767.0);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), IoError);
  {
    std::ofstream out(dir / "junk.wav");
    out << "definitely not audio";
  }
  CHECK_THROWS_AS(read_wav(dir / "junk.wav"), ParseError);
  Waveform bad;
  bad.samples = {0.0, std::nan("")};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
