// tools/src/cli_config.hpp

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

#ifndef FAC_TOOLS_CLI_CONFIG_HPP_
#define FAC_TOOLS_CLI_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fac/acoustic_model.hpp"
#include "fac/conversion.hpp"
#include "fac/evaluation.hpp"
#include "fac/prosody_encoder.hpp"
#include "fac/providers.hpp"
#include "fac/synthesizer.hpp"
#include "fac/trainer.hpp"
#include "json.hpp"

namespace fac::cli {

namespace fs = std::filesystem;
using nlohmann::json;

/// Which implementation backs a provider slot. Only `mock-*` ids have an
/// in-repo backend; anything else is rejected at configuration time.
struct ProviderSpec {
  ProviderSpec() = default;
  ProviderSpec(std::string id_, fs::path checkpoint_ = {}, uint64_t seed_ = 1,
               Index dim_ = 0)
      : id(std::move(id_)), checkpoint(std::move(checkpoint_)), seed(seed_), dim(dim_) {}

  std::string id;
  fs::path checkpoint;  // empty for mocks
  uint64_t seed = 1;
  Index dim = 0;        // speaker encoders only; 0 = implementation default
  double temperature = 1.0;

  json to_json() const;
  static ProviderSpec from_json(const json &j, const std::string &field,
                                const ProviderSpec &defaults, const fs::path &base);
};

struct TrainAmConfig {
  fs::path manifest;
  std::vector<std::string> heldout_speakers;
  fs::path output_dir;
  AcousticModelConfig model;
  FitOptions training;
  double segment_seconds = 2.0;
  std::string ppg_form = "soft";
  ProviderSpec upstream{"mock-upstream"};
  ProviderSpec ppg{"mock-ppg-teacher"};
  ProviderSpec tv{"mock-tv-teacher"};
  uint64_t seed = 0;

  json to_json() const;
  static TrainAmConfig from_json(const json &j, const fs::path &base);
};

struct TrainSynthConfig {
  fs::path manifest;
  std::vector<std::string> heldout_speakers;
  fs::path output_dir;
  SynthesizerConfig synthesizer;
  bool bnf_dim_given = false;
  ProsodyEncoderConfig prosody_encoder;
  ProviderSpec speaker_encoder{"mock-spectral", {}, 7, 256};
  OptimizerSpec optimizer;
  long steps = 200;
  long log_every = 10;
  uint64_t seed = 0;

  json to_json() const;
  static TrainSynthConfig from_json(const json &j, const fs::path &base);
};

struct ConvertConfig {
  ProviderSpec bnf{"mock-mel"};
  ProviderSpec synthesizer{"mock-passthrough"};
  ProviderSpec speaker_encoder{"mock-spectral", {}, 7, 256};
  ProviderSpec vocoder{"mock-sine"};
  ProsodyEncoderConfig prosody_encoder;  // used with mock synthesizers
  std::string l1_reference_speaker;
  uint64_t seed = 0;

  json to_json() const;
  static ConvertConfig from_json(const json &j, const fs::path &base);
};

/// Reads a JSON config file; ParseError/IoError on failure.
json read_json_file(const fs::path &path);
void write_json_file(const fs::path &path, const json &j);

/// Throws ConfigError naming `field` unless `path` exists.
void require_exists(const fs::path &path, const std::string &field);

std::shared_ptr<UpstreamProvider> make_upstream(const ProviderSpec &spec,
                                                const FeatureGeometry &geometry);
std::unique_ptr<PpgProvider> make_ppg(const ProviderSpec &spec,
                                      const FeatureGeometry &geometry,
                                      std::shared_ptr<UpstreamProvider> upstream);
std::unique_ptr<TvProvider> make_tv(const ProviderSpec &spec,
                                    const FeatureGeometry &geometry,
                                    std::shared_ptr<UpstreamProvider> upstream);
std::unique_ptr<SpeakerEncoderProvider> make_speaker_encoder(const ProviderSpec &spec);
std::unique_ptr<VocoderProvider> make_vocoder(const ProviderSpec &spec);
std::unique_ptr<TranscriberProvider> make_transcriber(const std::string &id);

/// Validates a spec's id against the known ids for `slot` without building.
void check_provider_id(const ProviderSpec &spec, const std::string &slot);

json tv_stats_to_json(const TvNormalizationStats &stats);
TvNormalizationStats tv_stats_from_json(const json &j);

}  // namespace fac::cli

#endif  // FAC_TOOLS_CLI_CONFIG_HPP_
