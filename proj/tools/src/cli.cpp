// tools/src/cli.cpp

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

#include "fac/cli.hpp"

#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace fac::cli {

CommandResult run(const std::vector<std::string> &args, std::ostream &out,
                  std::ostream &err) {
  CLI::App app{"Reference-based foreign accent conversion pipeline", "fac"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  uint64_t seed = 0;
  app.add_flag("--dry-run", g.dry_run, "Validate and print the execution plan only");
  app.add_flag("--print-config", g.print_config, "Print the resolved configuration and exit");
  CLI::Option *seed_opt = app.add_option("--seed", seed, "Seed for every stochastic component");

  TrainAmArgs am;
  CLI::App *am_cmd = app.add_subcommand("train-am", "Train the multi-task acoustic model");
  am_cmd->add_option("--config", am.config, "JSON config file")->required();
  am_cmd->add_option("--variant", am.variant, "ppg_only | tv_only | combined")
      ->required()
      ->check(CLI::IsMember({"ppg_only", "tv_only", "combined"}));

  ExtractBnfArgs ex;
  CLI::App *ex_cmd = app.add_subcommand("extract-bnf", "Cache bottleneck features");
  ex_cmd->add_option("--checkpoint", ex.checkpoint, "Acoustic model checkpoint dir")->required();
  ex_cmd->add_option("--manifest", ex.manifest, "Utterance manifest (JSON lines)")->required();
  ex_cmd->add_option("--out", ex.out, "Output dir (default $FAC_CACHE_DIR/bnf)");

  TrainSynthArgs ts;
  CLI::App *ts_cmd = app.add_subcommand("train-synth", "Train prosody encoder and synthesizer");
  ts_cmd->add_option("--config", ts.config, "JSON config file")->required();
  ts_cmd->add_option("--bnf-dir", ts.bnf_dir, "Cached features (default $FAC_CACHE_DIR/bnf)");

  ConvertArgs cv;
  std::string l2_text, l1_text;
  CLI::App *cv_cmd = app.add_subcommand("convert", "Convert an L2 utterance");
  cv_cmd->add_option("--l2", cv.l2, "L2 (non-native) utterance wav")->required();
  cv_cmd->add_option("--l1-ref", cv.l1_ref, "L1 reference wav with the same text")->required();
  cv_cmd->add_option("--out", cv.out, "Output wav")->required();
  cv_cmd->add_option("--config", cv.config, "JSON config file (default: all mock providers)");
  CLI::Option *l2t = cv_cmd->add_option("--l2-transcript", l2_text, "Transcript of --l2");
  CLI::Option *l1t = cv_cmd->add_option("--l1-transcript", l1_text, "Transcript of --l1-ref");
  cv_cmd->add_option("--l2-speaker", cv.l2_speaker, "Speaker id of --l2");
  cv_cmd->add_option("--l1-speaker", cv.l1_speaker, "Speaker id of --l1-ref");

  EvalArgs ev;
  CLI::App *ev_cmd = app.add_subcommand("eval", "Objective evaluation reports");
  ev_cmd->require_subcommand(1);
  ev_cmd->fallthrough();
  auto common = [&](CLI::App *c) {
    c->fallthrough();
    c->add_option("--manifest", ev.manifest, "Utterance manifest")->required();
    c->add_option("--out", ev.out, "Report path stem")->required();
    c->add_option("--system", ev.system, "System label for the report column");
    c->add_option("--split", ev.split, "Only records tagged with this split");
  };
  CLI::App *mcd_cmd = ev_cmd->add_subcommand("mcd", "Mel-cepstral distortion");
  common(mcd_cmd);
  mcd_cmd->add_option("--converted-dir", ev.converted_dir, "<utterance_id>.wav files")->required();
  mcd_cmd->add_option("--reference-dir", ev.reference_dir, "References (default: manifest audio)");
  mcd_cmd->add_option("--order", ev.order, "Cepstral order");
  CLI::App *wer_cmd = ev_cmd->add_subcommand("wer", "Word error rate");
  common(wer_cmd);
  wer_cmd->add_option("--audio-dir", ev.audio_dir, "<utterance_id>.wav files (default: manifest audio)");
  wer_cmd->add_option("--transcriber", ev.transcriber, "mock-echo | mock-garbler");
  CLI::App *cen_cmd = ev_cmd->add_subcommand("centroid", "Speaker-embedding centroid distance");
  common(cen_cmd);
  cen_cmd->add_option("--converted-dir", ev.converted_dir, "<utterance_id>.wav files")->required();
  cen_cmd->add_option("--speaker-encoder", ev.speaker_encoder, "mock-spectral | mock-hash");
  cen_cmd->add_option("--dim", ev.dim, "Speaker embedding size");
  cen_cmd->add_option("--export-dir", ev.export_dir, "Embedding export dir");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return CommandResult{kExitOk, {}, "help"};
  } catch (const CLI::ParseError &e) {
    err << "fac: " << e.what() << "\n\n" << app.help();
    return CommandResult{kExitUsage, {}, e.what()};
  }
  if (*seed_opt) g.seed = seed;
  if (*l2t) cv.l2_transcript = l2_text;
  if (*l1t) cv.l1_transcript = l1_text;

  Streams io{out, err};
  if (am_cmd->parsed()) return train_am(am, g, io);
  if (ex_cmd->parsed()) return extract_bnf(ex, g, io);
  if (ts_cmd->parsed()) return train_synth(ts, g, io);
  if (cv_cmd->parsed()) return convert(cv, g, io);
  if (mcd_cmd->parsed()) ev.kind = "mcd";
  if (wer_cmd->parsed()) ev.kind = "wer";
  if (cen_cmd->parsed()) ev.kind = "centroid";
  return eval(ev, g, io);
}

CommandResult run(const std::vector<std::string> &args) {
  return run(args, std::cout, std::cerr);
}

}  // namespace fac::cli
