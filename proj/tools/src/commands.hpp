// tools/src/commands.hpp

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

#ifndef FAC_TOOLS_COMMANDS_HPP_
#define FAC_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "fac/cli.hpp"

namespace fac::cli {

struct GlobalOptions {
  bool dry_run = false;
  bool print_config = false;
  std::optional<uint64_t> seed;
};

struct Streams {
  std::ostream &out;
  std::ostream &err;
};

struct TrainAmArgs {
  std::filesystem::path config;
  std::string variant;
};

struct ExtractBnfArgs {
  std::filesystem::path checkpoint;
  std::filesystem::path manifest;
  std::filesystem::path out;  // empty: $FAC_CACHE_DIR/bnf
};

struct TrainSynthArgs {
  std::filesystem::path config;
  std::filesystem::path bnf_dir;  // empty: $FAC_CACHE_DIR/bnf
};

struct ConvertArgs {
  std::filesystem::path l2;
  std::filesystem::path l1_ref;
  std::filesystem::path out;
  std::filesystem::path config;  // optional
  std::optional<std::string> l2_transcript;
  std::optional<std::string> l1_transcript;
  std::string l2_speaker = "L2";
  std::string l1_speaker = "L1";
};

struct EvalArgs {
  std::string kind;  // mcd | wer | centroid
  std::filesystem::path manifest;
  std::filesystem::path out;  // report stem
  std::string system = "converted";
  std::string split;          // empty: all records
  std::filesystem::path converted_dir;
  std::filesystem::path reference_dir;
  std::filesystem::path audio_dir;
  std::filesystem::path export_dir;
  int order = 13;
  std::string transcriber = "mock-echo";
  std::string speaker_encoder = "mock-spectral";
  long dim = 256;
};

CommandResult train_am(const TrainAmArgs &args, const GlobalOptions &g, Streams io);
CommandResult extract_bnf(const ExtractBnfArgs &args, const GlobalOptions &g, Streams io);
CommandResult train_synth(const TrainSynthArgs &args, const GlobalOptions &g, Streams io);
CommandResult convert(const ConvertArgs &args, const GlobalOptions &g, Streams io);
CommandResult eval(const EvalArgs &args, const GlobalOptions &g, Streams io);

}  // namespace fac::cli

#endif  // FAC_TOOLS_COMMANDS_HPP_
