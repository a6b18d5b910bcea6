// core/include/fac/reports.hpp

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

#ifndef FAC_REPORTS_HPP_
#define FAC_REPORTS_HPP_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fac/evaluation.hpp"
#include "json.hpp"

namespace fac {

/// One line of a metric log: the score of one utterance under one system
/// (e.g. "original", "ppg_only").
struct MetricRecord {
  std::string utterance_id;
  std::string speaker_id;
  std::string system;
  std::string metric;  // "mcd_db", "wer_percent", ...
  double value = 0.0;

  nlohmann::json to_json() const;
  static MetricRecord from_json(const nlohmann::json &j);
  bool operator==(const MetricRecord &) const = default;
};

void write_metric_records(const std::filesystem::path &path,
                          const std::vector<MetricRecord> &records);
std::vector<MetricRecord> read_metric_records(const std::filesystem::path &path);

/// Speakers as rows, systems as columns, plus a final "Average" row taken
/// over the speaker rows. Cells are per-speaker means over utterances.
struct SummaryTable {
  std::string metric;
  std::vector<std::string> systems;
  std::vector<std::string> speakers;  // without "Average"
  std::map<std::string, std::map<std::string, double>> cells;  // speaker -> system
  std::map<std::string, double> average;                       // system -> value

  nlohmann::json to_json() const;
  /// Fixed-width text table, two decimals.
  std::string to_text() const;
};

/// Records of other metrics are ignored. Missing (speaker, system) cells
/// are a ValidationError because the Average row would be ill-defined.
SummaryTable summarize(const std::vector<MetricRecord> &records,
                       const std::string &metric);

nlohmann::json centroid_report_json(const CentroidReport &report);
std::string centroid_report_text(const CentroidReport &report);

/// Writes <stem>.jsonl (records), <stem>.summary.json and <stem>.summary.txt.
std::vector<std::filesystem::path> write_metric_report(
    const std::filesystem::path &stem, const std::vector<MetricRecord> &records,
    const std::string &metric);

}  // namespace fac

#endif  // FAC_REPORTS_HPP_
