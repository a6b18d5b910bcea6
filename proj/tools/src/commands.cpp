// tools/src/commands.cpp

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

#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "cli_config.hpp"
#include "fac/acoustic_training.hpp"
#include "fac/conversion.hpp"
#include "fac/corpus.hpp"
#include "fac/error.hpp"
#include "fac/evaluation.hpp"
#include "fac/feature_cache.hpp"
#include "fac/mel.hpp"
#include "fac/random.hpp"
#include "fac/reports.hpp"
#include "fac/wav_io.hpp"

namespace fac::cli {
namespace {

std::string describe(const std::exception &e) {
  if (const auto *fe = dynamic_cast<const Error *>(&e))
    return std::string(fe->kind()) + " error: " + fe->what();
  return e.what();
}

CommandResult failure(int code, const std::exception &e, Streams io) {
  const std::string msg = describe(e);
  io.err << "fac: " << msg << "\n";
  return CommandResult{code, {}, msg};
}

// Configuration phase failures are usage errors (exit 2); execution phase
// failures are runtime errors (exit 1).
template <typename Config, typename Prepare, typename Execute>
CommandResult staged(const GlobalOptions &g, Streams io, Prepare &&prepare,
                     const std::function<json(const Config &)> &show,
                     const std::function<void(const Config &, std::ostream &)> &plan,
                     Execute &&execute) {
  Config cfg;
  try {
    cfg = prepare();
  } catch (const std::exception &e) {
    return failure(kExitUsage, e, io);
  }
  if (g.print_config) {
    io.out << show(cfg).dump(2) << "\n";
    return CommandResult{kExitOk, {}, "printed config"};
  }
  if (g.dry_run) {
    std::ostringstream os;
    plan(cfg, os);
    io.out << os.str();
    return CommandResult{kExitOk, {}, "dry run"};
  }
  try {
    CommandResult r = execute(cfg);
    io.out << r.summary << "\n";
    return r;
  } catch (const std::exception &e) {
    return failure(kExitRuntime, e, io);
  }
}

fs::path cache_default(const fs::path &given, const std::string &flag) {
  if (!given.empty()) return given;
  const char *env = std::getenv("FAC_CACHE_DIR");
  if (env == nullptr || *env == '\0')
    throw ConfigError(flag + ": not given and FAC_CACHE_DIR is unset");
  return fs::path(env) / "bnf";
}

void print_list(std::ostream &os, const std::string &label,
                const std::vector<fs::path> &paths) {
  os << "  " << label << ":\n";
  for (const auto &p : paths) os << "    " << p.string() << "\n";
}

UtteranceRecord file_record(const fs::path &audio, const std::string &speaker,
                            const std::string &transcript) {
  UtteranceRecord r;
  r.utterance_id = audio.stem().string();
  r.speaker_id = speaker;
  r.transcript = transcript;
  r.audio_path = audio;
  r.sample_rate = 16000;
  r.split = Split::kTest;
  return r;
}

struct AcousticCheckpoint {
  AcousticModel model;
  std::shared_ptr<UpstreamProvider> upstream;
};

AcousticCheckpoint load_acoustic_checkpoint(const fs::path &dir) {
  AcousticModel::Loaded loaded = AcousticModel::load(dir);
  ProviderSpec up{"mock-upstream"};
  if (loaded.metadata.contains("providers") &&
      loaded.metadata["providers"].contains("upstream"))
    up = ProviderSpec::from_json(loaded.metadata["providers"]["upstream"],
                                 "checkpoint.providers.upstream", up, dir);
  AcousticCheckpoint c{std::move(loaded.model), nullptr};
  c.upstream = make_upstream(up, c.model.config().geometry());
  return c;
}

std::vector<std::string> bnf_channel_names(Index dim) {
  std::vector<std::string> names;
  for (Index i = 0; i < dim; ++i) names.push_back("bnf" + std::to_string(i));
  return names;
}

}  // namespace

// --- train-am -------------------------------------------------------------

namespace {
struct TrainAmPlan {
  TrainAmConfig config;
  ModelVariant variant = ModelVariant::kCombined;
  LossWeights weights;
};
}  // namespace

CommandResult train_am(const TrainAmArgs &args, const GlobalOptions &g, Streams io) {
  return staged<TrainAmPlan>(
      g, io,
      [&] {
        TrainAmPlan p;
        p.config = TrainAmConfig::from_json(read_json_file(args.config),
                                            fs::absolute(args.config).parent_path());
        if (g.seed) {
          p.config.seed = *g.seed;
          p.config.training.seed = *g.seed;
        }
        p.variant = parse_variant(args.variant);
        auto [model, weights] = make_variant(p.variant, p.config.model);
        p.config.model = model;
        p.weights = weights;
        require_exists(p.config.manifest, "manifest");
        return p;
      },
      [](const TrainAmPlan &p) { return p.config.to_json(); },
      [](const TrainAmPlan &p, std::ostream &os) {
        const auto &c = p.config;
        os << "train-am plan\n"
           << "  variant: " << to_string(p.variant) << " (alpha " << p.weights.alpha << ")\n"
           << "  manifest: " << c.manifest.string() << "\n"
           << "  providers: upstream=" << c.upstream.id << " ppg=" << c.ppg.id
           << " tv=" << c.tv.id << "\n"
           << "  model: input " << c.model.input_dim << " @ " << c.model.input_rate
           << " Hz, bilstm " << c.model.num_bilstm_layers << "x" << c.model.bilstm_hidden
           << ", bnf " << c.model.bnf_dim << ", ppg " << c.model.ppg_dim << ", tv "
           << c.model.tv_dim << "\n"
           << "  optimizer: lr " << c.training.optimizer.learning_rate << ", batch "
           << c.training.optimizer.batch_size << ", decay "
           << c.training.schedule.decay_factor << ", patience " << c.training.patience
           << ", max_epochs " << c.training.max_epochs << "\n"
           << "  seed: " << c.seed << "\n";
        print_list(os, "would write",
                   {c.output_dir / "config.json", c.output_dir / "parameters.bin",
                    c.output_dir / "history.jsonl", c.output_dir / "dev_metrics.json"});
      },
      [&](const TrainAmPlan &p) {
        const auto &c = p.config;
        const auto records = load_manifest(c.manifest);
        const DataSplits splits = build_splits(records, {c.heldout_speakers.begin(), c.heldout_speakers.end()});
        const FeatureGeometry geo = c.model.geometry();
        auto upstream = make_upstream(c.upstream, geo);
        auto ppg = make_ppg(c.ppg, geo, upstream);
        auto tv = make_tv(c.tv, geo, upstream);
        DatasetOptions dopt;
        dopt.segment_seconds = c.segment_seconds;
        dopt.ppg_form = c.ppg_form == "hard" ? PpgTargetForm::kHard : PpgTargetForm::kSoft;
        dopt.upsample_factor = c.model.upsample_factor;
        dopt.geometry = geo;
        const AcousticDataset data = build_acoustic_dataset(
            splits, AcousticProviders{upstream.get(), ppg.get(), tv.get()}, dopt);
        AcousticModel model(c.model);
        model.initialize(c.seed);
        AcousticTrainingTask task(model, p.weights, data);
        const FitResult fr = fit(task, c.training);
        const AcousticDevMetrics m = evaluate_acoustic_model(model, data.dev);

        json meta = {{"variant", to_string(p.variant)},
                     {"providers",
                      {{"upstream", c.upstream.to_json()},
                       {"ppg", c.ppg.to_json()},
                       {"tv", c.tv.to_json()}}},
                     {"training", c.training.to_json()},
                     {"tv_stats", tv_stats_to_json(data.tv_stats)},
                     {"seed", c.seed},
                     {"best_epoch", fr.best_epoch}};
        model.save(c.output_dir, p.weights, meta);
        write_history(c.output_dir / "history.jsonl", fr.history);
        write_json_file(c.output_dir / "dev_metrics.json",
                        {{"tv_ppmc", m.tv_ppmc},
                         {"tv_mae", m.tv_mae},
                         {"ppg_rmse", m.ppg_rmse},
                         {"ppg_cross_entropy", m.ppg_cross_entropy},
                         {"initial_val_loss", fr.initial_val.loss},
                         {"best_val_loss", fr.best_val_loss},
                         {"epochs", fr.history.size()},
                         {"stopped_early", fr.stopped_early}});
        std::ostringstream s;
        s << "trained " << to_string(p.variant) << " for " << fr.history.size()
          << " epochs; best epoch " << fr.best_epoch << ", val loss " << fr.best_val_loss
          << ", dev TV PPMC " << m.tv_ppmc;
        return CommandResult{kExitOk,
                             {c.output_dir / "config.json", c.output_dir / "parameters.bin",
                              c.output_dir / "history.jsonl",
                              c.output_dir / "dev_metrics.json"},
                             s.str()};
      });
}

// --- extract-bnf -----------------------------------------------------------

namespace {
struct ExtractPlan {
  fs::path checkpoint, manifest, out;
};
}  // namespace

CommandResult extract_bnf(const ExtractBnfArgs &args, const GlobalOptions &g, Streams io) {
  return staged<ExtractPlan>(
      g, io,
      [&] {
        ExtractPlan p{fs::absolute(args.checkpoint), fs::absolute(args.manifest),
                      fs::absolute(cache_default(args.out, "--out"))};
        require_exists(p.checkpoint / "config.json", "--checkpoint");
        require_exists(p.manifest, "--manifest");
        return p;
      },
      [](const ExtractPlan &p) {
        return json{{"checkpoint", p.checkpoint.string()},
                    {"manifest", p.manifest.string()},
                    {"out", p.out.string()}};
      },
      [](const ExtractPlan &p, std::ostream &os) {
        os << "extract-bnf plan\n"
           << "  checkpoint: " << p.checkpoint.string() << "\n"
           << "  manifest: " << p.manifest.string() << "\n"
           << "  would write: " << (p.out / "<utterance_id>.facf").string()
           << " per record, plus " << (p.out / "index.json").string() << "\n";
      },
      [&](const ExtractPlan &p) {
        const auto records = load_manifest(p.manifest);
        AcousticCheckpoint ck = load_acoustic_checkpoint(p.checkpoint);
        AcousticModelBnfExtractor extractor(ck.model, *ck.upstream);
        fs::create_directories(p.out);
        CommandResult r;
        const auto names = bnf_channel_names(extractor.bnf_dim());
        std::vector<std::string> ids;
        for (const auto &rec : records) {
          const BottleneckFeatures bnf = extractor.extract(rec, load_record_audio(rec));
          const fs::path path = bnf_cache_path(p.out, rec.utterance_id);
          write_feature_cache(path, bnf.values);
          write_feature_sidecar(path, FeatureSidecar{names, extractor.checkpoint_id(),
                                                     rec.utterance_id, {}});
          r.artifacts_written.push_back(path);
          r.artifacts_written.push_back(sidecar_path(path));
          ids.push_back(rec.utterance_id);
        }
        write_json_file(p.out / "index.json", {{"checkpoint_id", extractor.checkpoint_id()},
                                               {"bnf_dim", extractor.bnf_dim()},
                                               {"frame_rate", ck.model.config().output_rate()},
                                               {"utterances", ids}});
        r.artifacts_written.push_back(p.out / "index.json");
        r.summary = "extracted bottleneck features for " + std::to_string(ids.size()) +
                    " utterances into " + p.out.string();
        return r;
      });
}

// --- train-synth -----------------------------------------------------------

namespace {
struct TrainSynthPlan {
  TrainSynthConfig config;
  fs::path bnf_dir;
  std::string bnf_checkpoint;
};
}  // namespace

CommandResult train_synth(const TrainSynthArgs &args, const GlobalOptions &g, Streams io) {
  return staged<TrainSynthPlan>(
      g, io,
      [&] {
        TrainSynthPlan p;
        p.config = TrainSynthConfig::from_json(read_json_file(args.config),
                                               fs::absolute(args.config).parent_path());
        if (g.seed) p.config.seed = *g.seed;
        p.bnf_dir = fs::absolute(cache_default(args.bnf_dir, "--bnf-dir"));
        require_exists(p.bnf_dir / "index.json", "--bnf-dir");
        require_exists(p.config.manifest, "manifest");
        const json index = read_json_file(p.bnf_dir / "index.json");
        const Index dim = index.value("bnf_dim", Index{0});
        p.bnf_checkpoint = index.value("checkpoint_id", std::string());
        if (dim < 1) throw ConfigError("--bnf-dir: index.json has no bnf_dim");
        if (p.config.bnf_dim_given && p.config.synthesizer.bnf_dim != dim)
          throw ConfigError("synthesizer.bnf_dim " + std::to_string(p.config.synthesizer.bnf_dim) +
                            " does not match cached features (" + std::to_string(dim) + ")");
        p.config.synthesizer.bnf_dim = dim;
        return p;
      },
      [](const TrainSynthPlan &p) { return p.config.to_json(); },
      [](const TrainSynthPlan &p, std::ostream &os) {
        const auto &c = p.config;
        os << "train-synth plan\n"
           << "  manifest: " << c.manifest.string() << "\n"
           << "  bnf cache: " << p.bnf_dir.string() << " (" << p.bnf_checkpoint << ", dim "
           << c.synthesizer.bnf_dim << ")\n"
           << "  speaker encoder: " << c.speaker_encoder.id << " (frozen)\n"
           << "  synthesizer: width " << c.synthesizer.model_dim << ", "
           << c.synthesizer.encoder_layers << "/" << c.synthesizer.decoder_layers
           << " layers; prosody_dim " << c.prosody_encoder.prosody_dim << "\n"
           << "  steps: " << c.steps << ", lr " << c.optimizer.learning_rate << ", seed "
           << c.seed << "\n";
        print_list(os, "would write",
                   {c.output_dir / "prosody", c.output_dir / "synthesizer",
                    c.output_dir / "history.jsonl", c.output_dir / "bundle.json"});
      },
      [&](const TrainSynthPlan &p) {
        const auto &c = p.config;
        const auto records = load_manifest(c.manifest);
        const DataSplits splits = build_splits(records, {c.heldout_speakers.begin(), c.heldout_speakers.end()});
        CachedBnfExtractor bnf(p.bnf_dir, c.synthesizer.bnf_dim, p.bnf_checkpoint);
        auto speaker = make_speaker_encoder(c.speaker_encoder);
        ProsodyEncoder prosody(c.prosody_encoder);
        prosody.initialize(mix_seed(c.seed, 1));
        TransformerSynthesizer synth(c.synthesizer);
        synth.initialize(mix_seed(c.seed, 2));
        const uint64_t speaker_sum = speaker->parameter_checksum();
        SynthesizerTrainer trainer(
            SynthesisComponents{&bnf, speaker.get(), &prosody, &synth, load_record_audio},
            c.optimizer, c.optimizer.learning_rate);
        const auto pairs = sample_training_pairs(splits.train, static_cast<size_t>(c.steps),
                                                 c.seed);
        fs::create_directories(c.output_dir);
        std::ofstream hist(c.output_dir / "history.jsonl");
        if (!hist) throw IoError("cannot write " + (c.output_dir / "history.jsonl").string());
        double last = 0.0;
        for (size_t i = 0; i < pairs.size(); ++i) {
          const auto &a = splits.train[pairs[i].first];
          const auto &cc = splits.train[pairs[i].second];
          const SynthStepResult s = trainer.train_step(a, cc);
          last = s.loss;
          hist << json{{"step", i + 1},
                       {"loss", s.loss},
                       {"mel_loss", s.mel_loss},
                       {"stop_loss", s.stop_loss},
                       {"bnf_utterance", s.provenance.bnf_utterance},
                       {"prosody_utterance", s.provenance.prosody_utterance},
                       {"target_utterance", s.provenance.target_utterance},
                       {"speaker_utterance", s.provenance.speaker_utterance}}
                      .dump()
               << "\n";
          if ((i + 1) % static_cast<size_t>(c.log_every) == 0)
            io.out << "step " << i + 1 << " loss " << s.loss << "\n";
        }
        if (speaker->parameter_checksum() != speaker_sum)
          throw StateError("speaker encoder changed during synthesizer training");
        prosody.save(c.output_dir / "prosody");
        synth.save(c.output_dir / "synthesizer");
        write_json_file(c.output_dir / "bundle.json",
                        {{"bnf_checkpoint", p.bnf_checkpoint},
                         {"speaker_encoder", c.speaker_encoder.to_json()},
                         {"synthesizer_checkpoint", synth.checkpoint_id()},
                         {"steps", c.steps},
                         {"final_loss", last}});
        return CommandResult{
            kExitOk,
            {c.output_dir / "prosody" / "config.json", c.output_dir / "prosody" / "parameters.bin",
             c.output_dir / "synthesizer" / "config.json",
             c.output_dir / "synthesizer" / "parameters.bin", c.output_dir / "history.jsonl",
             c.output_dir / "bundle.json"},
            "trained synthesizer for " + std::to_string(c.steps) + " steps; final loss " +
                std::to_string(last)};
      });
}

// --- convert ---------------------------------------------------------------

namespace {
struct ConvertPlan {
  ConvertConfig config;
  UtteranceRecord l2, l1;
  fs::path out;
};
}  // namespace

CommandResult convert(const ConvertArgs &args, const GlobalOptions &g, Streams io) {
  return staged<ConvertPlan>(
      g, io,
      [&] {
        ConvertPlan p;
        if (!args.config.empty())
          p.config = ConvertConfig::from_json(read_json_file(args.config),
                                              fs::absolute(args.config).parent_path());
        if (g.seed) p.config.seed = *g.seed;
        require_exists(args.l2, "--l2");
        require_exists(args.l1_ref, "--l1-ref");
        if (args.l2_transcript.has_value() != args.l1_transcript.has_value())
          throw ConfigError("--l2-transcript and --l1-transcript must be given together");
        if (args.out.empty()) throw ConfigError("--out: required");
        if (p.config.bnf.id == "acoustic")
          require_exists(p.config.bnf.checkpoint / "config.json", "bnf.checkpoint");
        if (p.config.synthesizer.id == "transformer") {
          require_exists(p.config.synthesizer.checkpoint / "synthesizer", "synthesizer.checkpoint");
          require_exists(p.config.synthesizer.checkpoint / "prosody", "synthesizer.checkpoint");
        }
        p.l2 = file_record(fs::absolute(args.l2), args.l2_speaker,
                           args.l2_transcript.value_or(""));
        p.l1 = file_record(fs::absolute(args.l1_ref), args.l1_speaker,
                           args.l1_transcript.value_or(""));
        p.out = fs::absolute(args.out);
        return p;
      },
      [](const ConvertPlan &p) { return p.config.to_json(); },
      [](const ConvertPlan &p, std::ostream &os) {
        os << "convert plan\n"
           << "  bnf <- " << p.l1.audio_path.string() << " via " << p.config.bnf.id << "\n"
           << "  prosody <- " << p.l2.audio_path.string() << "\n"
           << "  speaker <- " << p.l2.audio_path.string() << " via "
           << p.config.speaker_encoder.id << "\n"
           << "  synthesizer: " << p.config.synthesizer.id << ", vocoder: "
           << p.config.vocoder.id << "\n";
        print_list(os, "would write", {p.out, provenance_path(p.out)});
      },
      [&](const ConvertPlan &p) {
        const auto &c = p.config;
        std::unique_ptr<BnfExtractor> bnf;
        std::optional<AcousticCheckpoint> acoustic;
        if (c.bnf.id == "acoustic") {
          acoustic = load_acoustic_checkpoint(c.bnf.checkpoint);
          bnf = std::make_unique<AcousticModelBnfExtractor>(acoustic->model, *acoustic->upstream);
        } else {
          bnf = std::make_unique<MelBnfExtractor>();
        }
        std::unique_ptr<MelSynthesizer> synth;
        ProsodyEncoder prosody;
        if (c.synthesizer.id == "transformer") {
          synth = std::make_unique<TransformerSynthesizer>(
              TransformerSynthesizer::load(c.synthesizer.checkpoint / "synthesizer"));
          prosody = ProsodyEncoder::load(c.synthesizer.checkpoint / "prosody");
        } else {
          synth = std::make_unique<PassThroughSynthesizer>();
          prosody = ProsodyEncoder(c.prosody_encoder);
          prosody.initialize(mix_seed(c.seed, 1));
        }
        auto speaker = make_speaker_encoder(c.speaker_encoder);
        auto vocoder = make_vocoder(c.vocoder);
        ConversionModels models{bnf.get(),     &prosody,          speaker.get(),
                                synth.get(),   vocoder.get(),     load_record_audio,
                                c.l1_reference_speaker};
        const ConversionResult result = fac::convert(ConversionRequest{p.l2, p.l1}, models);
        CommandResult r;
        r.artifacts_written = write_conversion(p.out, result);
        std::ostringstream s;
        s << "wrote " << p.out.string() << " (" << result.mel.num_frames() << " frames, "
          << result.wave.duration_seconds() << " s" << (result.truncated ? ", truncated" : "")
          << ")";
        r.summary = s.str();
        return r;
      });
}

// --- eval ------------------------------------------------------------------

namespace {

struct EvalPlan {
  EvalArgs args;
  std::vector<UtteranceRecord> records;
};

fs::path candidate_audio(const fs::path &dir, const UtteranceRecord &r) {
  return dir / (r.utterance_id + ".wav");
}

}  // namespace

CommandResult eval(const EvalArgs &args, const GlobalOptions &g, Streams io) {
  return staged<EvalPlan>(
      g, io,
      [&] {
        EvalPlan p{args, {}};
        if (args.out.empty()) throw ConfigError("--out: required");
        require_exists(args.manifest, "--manifest");
        for (auto &rec : load_manifest(args.manifest))
          if (args.split.empty() || rec.split == parse_split(args.split))
            p.records.push_back(rec);
        if (p.records.empty()) throw ConfigError("--manifest: no records selected");
        auto need_dir = [](const fs::path &d, const std::string &flag) {
          if (d.empty()) throw ConfigError(flag + ": required");
          require_exists(d, flag);
        };
        if (args.kind == "mcd" || args.kind == "centroid")
          need_dir(args.converted_dir, "--converted-dir");
        if (!args.reference_dir.empty()) require_exists(args.reference_dir, "--reference-dir");
        if (!args.audio_dir.empty()) require_exists(args.audio_dir, "--audio-dir");
        if (args.kind == "mcd" && (args.order < 1 || args.order >= kMelChannels))
          throw ConfigError("--order must be in [1, 79]");
        if (args.kind == "wer") make_transcriber(args.transcriber);
        if (args.kind == "centroid")
          check_provider_id(ProviderSpec{args.speaker_encoder}, "speaker_encoder");
        for (const auto &rec : p.records) {
          if (args.kind != "wer" || args.audio_dir.empty())
            require_exists(rec.audio_path, "manifest audio for " + rec.utterance_id);
          if (args.kind == "mcd" || args.kind == "centroid")
            require_exists(candidate_audio(args.converted_dir, rec), "--converted-dir");
          if (args.kind == "mcd" && !args.reference_dir.empty())
            require_exists(candidate_audio(args.reference_dir, rec), "--reference-dir");
          if (args.kind == "wer" && !args.audio_dir.empty())
            require_exists(candidate_audio(args.audio_dir, rec), "--audio-dir");
        }
        return p;
      },
      [](const EvalPlan &p) {
        const auto &a = p.args;
        return json{{"kind", a.kind},
                    {"manifest", fs::absolute(a.manifest).string()},
                    {"out", fs::absolute(a.out).string()},
                    {"system", a.system},
                    {"split", a.split},
                    {"converted_dir", a.converted_dir.string()},
                    {"reference_dir", a.reference_dir.string()},
                    {"audio_dir", a.audio_dir.string()},
                    {"order", a.order},
                    {"transcriber", a.transcriber},
                    {"speaker_encoder", a.speaker_encoder},
                    {"dim", a.dim}};
      },
      [](const EvalPlan &p, std::ostream &os) {
        os << "eval " << p.args.kind << " plan\n"
           << "  records: " << p.records.size() << "\n"
           << "  system: " << p.args.system << "\n";
        const std::string stem = p.args.out.string();
        if (p.args.kind == "centroid")
          print_list(os, "would write", {stem + ".summary.json", stem + ".summary.txt",
                                         stem + ".embeddings/"});
        else
          print_list(os, "would write",
                     {stem + ".jsonl", stem + ".summary.json", stem + ".summary.txt"});
      },
      [&](const EvalPlan &p) {
        const auto &a = p.args;
        CommandResult r;
        if (a.kind == "mcd") {
          std::vector<MetricRecord> rows;
          for (const auto &rec : p.records) {
            const Waveform conv = read_wav(candidate_audio(a.converted_dir, rec));
            const Waveform ref = read_wav(a.reference_dir.empty()
                                              ? rec.audio_path
                                              : candidate_audio(a.reference_dir, rec));
            const MCDResult m = mcd(compute_mel(conv), compute_mel(ref), a.order);
            rows.push_back({rec.utterance_id, rec.speaker_id, a.system, "mcd_db", m.mcd_db});
          }
          r.artifacts_written = write_metric_report(a.out, rows, "mcd_db");
          r.summary = summarize(rows, "mcd_db").to_text();
        } else if (a.kind == "wer") {
          auto asr = make_transcriber(a.transcriber);
          std::vector<Waveform> waves;
          waves.reserve(p.records.size());
          for (const auto &rec : p.records)
            waves.push_back(read_wav(a.audio_dir.empty() ? rec.audio_path
                                                         : candidate_audio(a.audio_dir, rec)));
          std::vector<TranscriptionRequest> reqs;
          for (size_t i = 0; i < p.records.size(); ++i)
            reqs.push_back({&waves[i], p.records[i].utterance_id, p.records[i].transcript});
          const auto hyps = transcribe_all(reqs, *asr);
          std::vector<MetricRecord> rows;
          for (size_t i = 0; i < p.records.size(); ++i)
            rows.push_back({p.records[i].utterance_id, p.records[i].speaker_id, a.system,
                            "wer_percent", wer(p.records[i].transcript, hyps[i]).wer_percent});
          r.artifacts_written = write_metric_report(a.out, rows, "wer_percent");
          r.summary = summarize(rows, "wer_percent").to_text();
        } else {
          auto enc = make_speaker_encoder(
              ProviderSpec{a.speaker_encoder, {}, 7, static_cast<Index>(a.dim)});
          EmbeddingTable table;
          for (const auto &rec : p.records) {
            for (Condition cond : {Condition::kOriginal, Condition::kConverted}) {
              const fs::path path = cond == Condition::kOriginal
                                        ? rec.audio_path
                                        : candidate_audio(a.converted_dir, rec);
              const Waveform w = read_wav(path);
              table[{rec.speaker_id, cond}].push_back(encode_speaker(
                  SpeakerEncoderInput{rec.utterance_id, rec.speaker_id, &w, nullptr}, *enc));
            }
          }
          const CentroidReport rep = centroid_report(table);
          const std::string stem = a.out.string();
          if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
          write_json_file(stem + ".summary.json", centroid_report_json(rep));
          std::ofstream txt(stem + ".summary.txt");
          if (!txt) throw IoError("cannot write " + stem + ".summary.txt");
          txt << centroid_report_text(rep);
          r.artifacts_written = {stem + ".summary.json", stem + ".summary.txt"};
          const fs::path export_dir =
              a.export_dir.empty() ? fs::path(stem + ".embeddings") : a.export_dir;
          for (const auto &pth : export_embeddings(table, export_dir)) {
            r.artifacts_written.push_back(pth);
            r.artifacts_written.push_back(sidecar_path(pth));
          }
          r.summary = centroid_report_text(rep);
        }
        return r;
      });
}

}  // namespace fac::cli
