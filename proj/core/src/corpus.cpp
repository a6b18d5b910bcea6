// core/src/corpus.cpp

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

#include "fac/corpus.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "fac/error.hpp"
#include "json.hpp"

namespace fac {

using nlohmann::json;

void Waveform::validate() const {
  if (sample_rate <= 0)
    throw ValidationError("waveform sample_rate must be positive, got " +
                          std::to_string(sample_rate));
  for (size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i]))
      throw ValidationError("waveform sample " + std::to_string(i) +
                            " is not finite");
  }
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
    case Split::kHeldout: return "heldout";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "dev") return Split::kDev;
  if (text == "test") return Split::kTest;
  if (text == "heldout") return Split::kHeldout;
  throw ParseError("unknown split tag '" + std::string(text) + "'");
}

void UtteranceRecord::validate() const {
  if (utterance_id.empty()) throw ValidationError("empty utterance_id");
  if (sample_rate <= 0)
    throw ValidationError("utterance " + utterance_id +
                          ": sample_rate must be positive");
  if (audio_path.empty())
    throw ValidationError("utterance " + utterance_id + ": empty audio_path");
}

namespace {

UtteranceRecord record_from_json(const json &j) {
  UtteranceRecord r;
  r.utterance_id = j.at("utterance_id").get<std::string>();
  r.speaker_id = j.at("speaker_id").get<std::string>();
  r.native_language = j.at("native_language").get<std::string>();
  r.transcript = j.at("transcript").get<std::string>();
  r.audio_path = j.at("audio_path").get<std::string>();
  r.sample_rate = j.at("sample_rate").get<int>();
  r.split = parse_split(j.at("split").get<std::string>());
  return r;
}

bool is_blank(const std::string &line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

std::vector<UtteranceRecord> parse_manifest(std::istream &in) {
  std::vector<UtteranceRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    UtteranceRecord r;
    try {
      r = record_from_json(json::parse(line));
    } catch (const json::exception &e) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " +
                       e.what());
    } catch (const ParseError &e) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    try {
      r.validate();
    } catch (const ValidationError &e) {
      throw ValidationError("manifest line " + std::to_string(line_no) + ": " +
                            e.what());
    }
    if (!seen.insert(r.utterance_id).second)
      throw ValidationError("manifest line " + std::to_string(line_no) +
                            ": duplicate utterance_id \"" + r.utterance_id +
                            "\"");
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<UtteranceRecord> load_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  auto records = parse_manifest(in);
  const auto base = path.parent_path();
  for (auto &r : records)
    if (r.audio_path.is_relative()) r.audio_path = base / r.audio_path;
  return records;
}

std::string manifest_line(const UtteranceRecord &r) {
  json j = {{"utterance_id", r.utterance_id},
            {"speaker_id", r.speaker_id},
            {"native_language", r.native_language},
            {"transcript", r.transcript},
            {"audio_path", r.audio_path.string()},
            {"sample_rate", r.sample_rate},
            {"split", std::string(to_string(r.split))}};
  return j.dump();
}

void write_manifest(std::ostream &out,
                    const std::vector<UtteranceRecord> &records) {
  for (const auto &r : records) out << manifest_line(r) << '\n';
}

DataSplits build_splits(const std::vector<UtteranceRecord> &records,
                        const std::set<std::string> &heldout_speakers) {
  std::set<std::string> present;
  for (const auto &r : records) present.insert(r.speaker_id);
  for (const auto &s : heldout_speakers)
    if (!present.count(s))
      throw ValidationError("held-out speaker " + s +
                            " has no records in the manifest");

  DataSplits splits;
  splits.heldout_speakers = heldout_speakers;
  std::unordered_set<std::string> train_ids;
  for (const auto &r : records) {
    if (heldout_speakers.count(r.speaker_id)) {
      splits.heldout.push_back(r);
      continue;
    }
    switch (r.split) {
      case Split::kTrain:
        splits.train.push_back(r);
        train_ids.insert(r.utterance_id);
        break;
      case Split::kDev:
        splits.dev.push_back(r);
        break;
      case Split::kTest:
      case Split::kHeldout:
        splits.test.push_back(r);
        break;
    }
  }
  for (const auto &r : splits.dev)
    if (train_ids.count(r.utterance_id))
      throw ValidationError("utterance " + r.utterance_id +
                            " is in both train and dev");
  return splits;
}

std::vector<Waveform> segment_waveform(const Waveform &wave,
                                       double segment_seconds) {
  if (!(segment_seconds > 0.0))
    throw ValidationError("segment_seconds must be positive");
  if (wave.sample_rate <= 0)
    throw ValidationError("waveform sample_rate must be positive");
  const auto seg_len =
      static_cast<size_t>(std::llround(segment_seconds * wave.sample_rate));
  if (seg_len == 0) throw ValidationError("segment shorter than one sample");

  std::vector<Waveform> out;
  for (size_t start = 0; start < wave.samples.size(); start += seg_len) {
    Waveform seg;
    seg.sample_rate = wave.sample_rate;
    seg.samples.assign(seg_len, 0.0);
    const size_t n = std::min(seg_len, wave.samples.size() - start);
    std::copy_n(wave.samples.begin() + static_cast<std::ptrdiff_t>(start), n,
                seg.samples.begin());
    out.push_back(std::move(seg));
  }
  return out;
}

std::string normalize_transcript(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (c < 0x80 && std::ispunct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

const UtteranceRecord &find_parallel_reference(
    const UtteranceRecord &l2_utt,
    const std::vector<UtteranceRecord> &l1_records) {
  if (!l1_records.empty()) {
    const auto &speaker = l1_records.front().speaker_id;
    for (const auto &r : l1_records)
      if (r.speaker_id != speaker)
        throw ValidationError("L1 reference set mixes speakers " + speaker +
                              " and " + r.speaker_id);
  }
  const auto key = normalize_transcript(l2_utt.transcript);
  const UtteranceRecord *match = nullptr;
  for (const auto &r : l1_records) {
    if (normalize_transcript(r.transcript) != key) continue;
    if (match)
      throw AmbiguityError("utterance " + l2_utt.utterance_id +
                           " matches both " + match->utterance_id + " and " +
                           r.utterance_id);
    match = &r;
  }
  if (!match)
    throw NotFoundError("no L1 reference with the transcript of " +
                        l2_utt.utterance_id);
  return *match;
}

}  // namespace fac
