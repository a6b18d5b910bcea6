// tools/src/cli_config.cpp

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

#include "cli_config.hpp"

#include <fstream>
#include <map>

#include "fac/error.hpp"

namespace fac::cli {
namespace {

const std::map<std::string, std::vector<std::string>> &known_ids() {
  static const std::map<std::string, std::vector<std::string>> ids = {
      {"upstream", {"mock-upstream", "mock-upstream-zeros"}},
      {"ppg", {"mock-ppg-teacher", "mock-ppg-uniform"}},
      {"tv", {"mock-tv-teacher", "mock-tv-sine"}},
      {"speaker_encoder", {"mock-spectral", "mock-hash"}},
      {"vocoder", {"mock-sine"}},
      {"bnf", {"mock-mel", "acoustic"}},
      {"synthesizer", {"mock-passthrough", "transformer"}},
  };
  return ids;
}

fs::path resolve(const fs::path &p, const fs::path &base) {
  if (p.empty()) return p;
  return (p.is_absolute() ? p : base / p).lexically_normal();
}

template <typename T>
T get_or(const json &j, const std::string &key, const T &fallback,
         const std::string &field) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw ConfigError(field + "." + key + ": wrong type");
  }
}

fs::path required_path(const json &j, const std::string &key, const fs::path &base) {
  if (!j.contains(key) || !j.at(key).is_string() || j.at(key).get<std::string>().empty())
    throw ConfigError(key + ": required path is missing");
  return resolve(j.at(key).get<std::string>(), base);
}

json section(const json &j, const std::string &key) {
  if (!j.contains(key)) return json::object();
  if (!j.at(key).is_object()) throw ConfigError(key + ": expected an object");
  return j.at(key);
}

void require_object(const json &j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
}

}  // namespace

json ProviderSpec::to_json() const {
  json j = {{"id", id}, {"seed", seed}};
  if (!checkpoint.empty()) j["checkpoint"] = checkpoint.string();
  if (dim > 0) j["dim"] = dim;
  if (temperature != 1.0) j["temperature"] = temperature;
  return j;
}

ProviderSpec ProviderSpec::from_json(const json &j, const std::string &field,
                                     const ProviderSpec &defaults, const fs::path &base) {
  if (j.is_null()) return defaults;
  if (j.is_string()) {
    ProviderSpec s = defaults;
    s.id = j.get<std::string>();
    return s;
  }
  if (!j.is_object()) throw ConfigError(field + ": expected an object or an id string");
  ProviderSpec s = defaults;
  s.id = get_or<std::string>(j, "id", defaults.id, field);
  s.checkpoint = resolve(get_or<std::string>(j, "checkpoint", defaults.checkpoint.string(), field), base);
  s.seed = get_or<uint64_t>(j, "seed", defaults.seed, field);
  s.dim = get_or<Index>(j, "dim", defaults.dim, field);
  s.temperature = get_or<double>(j, "temperature", defaults.temperature, field);
  if (s.dim < 0) throw ConfigError(field + ".dim must be >= 0");
  if (!(s.temperature > 0.0)) throw ConfigError(field + ".temperature must be positive");
  return s;
}

void check_provider_id(const ProviderSpec &spec, const std::string &slot) {
  const auto &ids = known_ids().at(slot);
  for (const auto &id : ids)
    if (id == spec.id) {
      if ((id == "acoustic" || id == "transformer") && spec.checkpoint.empty())
        throw ConfigError(slot + ".checkpoint: required for provider '" + id + "'");
      return;
    }
  std::string known;
  for (const auto &id : ids) known += (known.empty() ? "" : ", ") + id;
  throw ConfigError(slot + ".id: no backend for provider '" + spec.id +
                    "' (available: " + known + ")");
}

// --- train-am -------------------------------------------------------------

json TrainAmConfig::to_json() const {
  return {{"manifest", manifest.string()},
          {"heldout_speakers", heldout_speakers},
          {"output_dir", output_dir.string()},
          {"model", model.to_json()},
          {"training", training.to_json()},
          {"dataset", {{"segment_seconds", segment_seconds}, {"ppg_form", ppg_form}}},
          {"providers",
           {{"upstream", upstream.to_json()}, {"ppg", ppg.to_json()}, {"tv", tv.to_json()}}},
          {"seed", seed}};
}

TrainAmConfig TrainAmConfig::from_json(const json &j, const fs::path &base) {
  require_object(j);
  TrainAmConfig c;
  c.manifest = required_path(j, "manifest", base);
  c.output_dir = required_path(j, "output_dir", base);
  c.heldout_speakers = get_or<std::vector<std::string>>(j, "heldout_speakers", {}, "config");
  c.model = AcousticModelConfig::from_json(section(j, "model"));
  c.training = FitOptions::from_json(section(j, "training"));
  const json ds = section(j, "dataset");
  c.segment_seconds = get_or<double>(ds, "segment_seconds", c.segment_seconds, "dataset");
  c.ppg_form = get_or<std::string>(ds, "ppg_form", c.ppg_form, "dataset");
  if (!(c.segment_seconds > 0.0)) throw ConfigError("dataset.segment_seconds must be positive");
  if (c.ppg_form != "soft" && c.ppg_form != "hard")
    throw ConfigError("dataset.ppg_form must be 'soft' or 'hard'");
  const json pv = section(j, "providers");
  c.upstream = ProviderSpec::from_json(pv.value("upstream", json()), "providers.upstream", c.upstream, base);
  c.ppg = ProviderSpec::from_json(pv.value("ppg", json()), "providers.ppg", c.ppg, base);
  c.tv = ProviderSpec::from_json(pv.value("tv", json()), "providers.tv", c.tv, base);
  check_provider_id(c.upstream, "upstream");
  check_provider_id(c.ppg, "ppg");
  check_provider_id(c.tv, "tv");
  c.seed = get_or<uint64_t>(j, "seed", c.seed, "config");
  return c;
}

// --- train-synth ----------------------------------------------------------

json TrainSynthConfig::to_json() const {
  json syn = synthesizer.to_json();
  if (!bnf_dim_given) syn.erase("bnf_dim");
  return {{"manifest", manifest.string()},
          {"heldout_speakers", heldout_speakers},
          {"output_dir", output_dir.string()},
          {"synthesizer", syn},
          {"prosody_encoder", prosody_encoder.to_json()},
          {"speaker_encoder", speaker_encoder.to_json()},
          {"training",
           {{"steps", steps},
            {"log_every", log_every},
            {"optimizer",
             {{"algorithm", optimizer.algorithm},
              {"learning_rate", optimizer.learning_rate},
              {"beta1", optimizer.beta1},
              {"beta2", optimizer.beta2},
              {"epsilon", optimizer.epsilon}}}}},
          {"seed", seed}};
}

TrainSynthConfig TrainSynthConfig::from_json(const json &j, const fs::path &base) {
  require_object(j);
  TrainSynthConfig c;
  c.manifest = required_path(j, "manifest", base);
  c.output_dir = required_path(j, "output_dir", base);
  c.heldout_speakers = get_or<std::vector<std::string>>(j, "heldout_speakers", {}, "config");
  const json syn = section(j, "synthesizer");
  c.bnf_dim_given = syn.contains("bnf_dim");
  c.synthesizer = SynthesizerConfig::from_json(syn);
  c.prosody_encoder = ProsodyEncoderConfig::from_json(section(j, "prosody_encoder"));
  c.speaker_encoder = ProviderSpec::from_json(j.value("speaker_encoder", json()),
                                              "speaker_encoder", c.speaker_encoder, base);
  check_provider_id(c.speaker_encoder, "speaker_encoder");
  const json tr = section(j, "training");
  c.steps = get_or<long>(tr, "steps", c.steps, "training");
  c.log_every = get_or<long>(tr, "log_every", c.log_every, "training");
  const json op = tr.value("optimizer", json::object());
  c.optimizer.algorithm = get_or<std::string>(op, "algorithm", c.optimizer.algorithm, "training.optimizer");
  c.optimizer.learning_rate = get_or<double>(op, "learning_rate", c.optimizer.learning_rate, "training.optimizer");
  c.optimizer.beta1 = get_or<double>(op, "beta1", c.optimizer.beta1, "training.optimizer");
  c.optimizer.beta2 = get_or<double>(op, "beta2", c.optimizer.beta2, "training.optimizer");
  c.optimizer.epsilon = get_or<double>(op, "epsilon", c.optimizer.epsilon, "training.optimizer");
  c.optimizer.validate();
  if (c.steps < 1) throw ConfigError("training.steps must be >= 1");
  if (c.log_every < 1) throw ConfigError("training.log_every must be >= 1");
  if (c.synthesizer.prosody_dim != c.prosody_encoder.prosody_dim)
    throw ConfigError("synthesizer.prosody_dim must equal prosody_encoder.prosody_dim");
  const Index spk_dim = c.speaker_encoder.dim > 0 ? c.speaker_encoder.dim : 256;
  if (c.synthesizer.speaker_dim != spk_dim)
    throw ConfigError("synthesizer.speaker_dim must equal speaker_encoder.dim");
  c.seed = get_or<uint64_t>(j, "seed", c.seed, "config");
  return c;
}

// --- convert ----------------------------------------------------------------

json ConvertConfig::to_json() const {
  return {{"bnf", bnf.to_json()},
          {"synthesizer", synthesizer.to_json()},
          {"speaker_encoder", speaker_encoder.to_json()},
          {"vocoder", vocoder.to_json()},
          {"prosody_encoder", prosody_encoder.to_json()},
          {"l1_reference_speaker", l1_reference_speaker},
          {"seed", seed}};
}

ConvertConfig ConvertConfig::from_json(const json &j, const fs::path &base) {
  require_object(j);
  ConvertConfig c;
  c.bnf = ProviderSpec::from_json(j.value("bnf", json()), "bnf", c.bnf, base);
  c.synthesizer = ProviderSpec::from_json(j.value("synthesizer", json()), "synthesizer",
                                          c.synthesizer, base);
  c.speaker_encoder = ProviderSpec::from_json(j.value("speaker_encoder", json()),
                                              "speaker_encoder", c.speaker_encoder, base);
  c.vocoder = ProviderSpec::from_json(j.value("vocoder", json()), "vocoder", c.vocoder, base);
  check_provider_id(c.bnf, "bnf");
  check_provider_id(c.synthesizer, "synthesizer");
  check_provider_id(c.speaker_encoder, "speaker_encoder");
  check_provider_id(c.vocoder, "vocoder");
  c.prosody_encoder = ProsodyEncoderConfig::from_json(section(j, "prosody_encoder"));
  c.l1_reference_speaker =
      get_or<std::string>(j, "l1_reference_speaker", c.l1_reference_speaker, "config");
  c.seed = get_or<uint64_t>(j, "seed", c.seed, "config");
  return c;
}

// --- files and providers ----------------------------------------------------

json read_json_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

void write_json_file(const fs::path &path, const json &j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

void require_exists(const fs::path &path, const std::string &field) {
  if (!fs::exists(path)) throw ConfigError(field + ": " + path.string() + " does not exist");
}

std::shared_ptr<UpstreamProvider> make_upstream(const ProviderSpec &spec,
                                                const FeatureGeometry &geometry) {
  check_provider_id(spec, "upstream");
  const auto mode = spec.id == "mock-upstream-zeros" ? MockUpstreamProvider::Mode::kZeros
                                                     : MockUpstreamProvider::Mode::kProjection;
  return std::make_shared<MockUpstreamProvider>(geometry, 16000, mode, spec.seed);
}

std::unique_ptr<PpgProvider> make_ppg(const ProviderSpec &spec,
                                      const FeatureGeometry &geometry,
                                      std::shared_ptr<UpstreamProvider> upstream) {
  check_provider_id(spec, "ppg");
  if (spec.id == "mock-ppg-uniform") return std::make_unique<MockUniformPpgProvider>(geometry);
  return std::make_unique<MockTeacherPpgProvider>(std::move(upstream), geometry, spec.seed,
                                                  spec.temperature);
}

std::unique_ptr<TvProvider> make_tv(const ProviderSpec &spec, const FeatureGeometry &geometry,
                                    std::shared_ptr<UpstreamProvider> upstream) {
  check_provider_id(spec, "tv");
  if (spec.id == "mock-tv-sine") return std::make_unique<MockSineTvProvider>(geometry);
  return std::make_unique<MockTeacherTvProvider>(std::move(upstream), geometry, spec.seed);
}

std::unique_ptr<SpeakerEncoderProvider> make_speaker_encoder(const ProviderSpec &spec) {
  check_provider_id(spec, "speaker_encoder");
  const Index dim = spec.dim > 0 ? spec.dim : 256;
  if (spec.id == "mock-hash") return std::make_unique<MockHashSpeakerEncoder>(dim);
  return std::make_unique<MockSpectralSpeakerEncoder>(dim, spec.seed);
}

std::unique_ptr<VocoderProvider> make_vocoder(const ProviderSpec &spec) {
  check_provider_id(spec, "vocoder");
  return std::make_unique<MockSineVocoder>();
}

std::unique_ptr<TranscriberProvider> make_transcriber(const std::string &id) {
  if (id == "mock-echo") return std::make_unique<MockEchoTranscriber>();
  if (id == "mock-garbler") return std::make_unique<MockGarblingTranscriber>();
  throw ConfigError("transcriber: no backend for provider '" + id +
                    "' (available: mock-echo, mock-garbler)");
}

json tv_stats_to_json(const TvNormalizationStats &s) {
  return {{"min", s.min},
          {"max", s.max},
          {"channel_names", s.channel_names},
          {"range_lo", s.range_lo},
          {"range_hi", s.range_hi}};
}

TvNormalizationStats tv_stats_from_json(const json &j) {
  TvNormalizationStats s;
  try {
    s.min = j.at("min").get<std::vector<double>>();
    s.max = j.at("max").get<std::vector<double>>();
    s.channel_names = j.at("channel_names").get<std::vector<std::string>>();
    s.range_lo = j.value("range_lo", s.range_lo);
    s.range_hi = j.value("range_hi", s.range_hi);
  } catch (const json::exception &e) {
    throw ParseError(std::string("tv_stats: ") + e.what());
  }
  s.validate();
  return s;
}

}  // namespace fac::cli
