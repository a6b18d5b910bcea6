// core/src/reports.cpp

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

#include "fac/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fac/error.hpp"

namespace fac {

nlohmann::json MetricRecord::to_json() const {
  return {{"utterance_id", utterance_id},
          {"speaker_id", speaker_id},
          {"system", system},
          {"metric", metric},
          {"value", value}};
}

MetricRecord MetricRecord::from_json(const nlohmann::json &j) {
  try {
    return MetricRecord{j.at("utterance_id").get<std::string>(),
                        j.at("speaker_id").get<std::string>(),
                        j.at("system").get<std::string>(),
                        j.at("metric").get<std::string>(),
                        j.at("value").get<double>()};
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("metric record: ") + e.what());
  }
}

void write_metric_records(const std::filesystem::path &path,
                          const std::vector<MetricRecord> &records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto &r : records) out << r.to_json().dump() << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<MetricRecord> read_metric_records(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<MetricRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(MetricRecord::from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const ParseError &e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

SummaryTable summarize(const std::vector<MetricRecord> &records,
                       const std::string &metric) {
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> acc;
  std::set<std::string> speakers, systems;
  std::vector<std::string> system_order;
  for (const auto &r : records) {
    if (r.metric != metric) continue;
    auto &[sum, n] = acc[{r.speaker_id, r.system}];
    sum += r.value;
    ++n;
    speakers.insert(r.speaker_id);
    if (systems.insert(r.system).second) system_order.push_back(r.system);
  }
  if (speakers.empty()) throw ValidationError("no records for metric " + metric);
  SummaryTable t;
  t.metric = metric;
  t.systems = system_order;
  t.speakers.assign(speakers.begin(), speakers.end());
  for (const auto &sys : t.systems) {
    double total = 0.0;
    for (const auto &spk : t.speakers) {
      auto it = acc.find({spk, sys});
      if (it == acc.end())
        throw ValidationError("no " + metric + " records for speaker " + spk +
                              " under system " + sys);
      const double mean = it->second.first / it->second.second;
      t.cells[spk][sys] = mean;
      total += mean;
    }
    t.average[sys] = total / static_cast<double>(t.speakers.size());
  }
  return t;
}

nlohmann::json SummaryTable::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &spk : speakers) rows.push_back({{"speaker", spk}, {"values", cells.at(spk)}});
  rows.push_back({{"speaker", "Average"}, {"values", average}});
  return {{"metric", metric}, {"systems", systems}, {"rows", rows}};
}

std::string SummaryTable::to_text() const {
  size_t width = std::string("Average").size();
  for (const auto &s : speakers) width = std::max(width, s.size());
  std::ostringstream os;
  char buf[64];
  os << metric << "\n";
  os << std::string(width, ' ');
  for (const auto &sys : systems) {
    std::snprintf(buf, sizeof buf, " %12s", sys.c_str());
    os << buf;
  }
  os << "\n";
  auto row = [&](const std::string &label, const std::map<std::string, double> &vals) {
    os << label << std::string(width - label.size(), ' ');
    for (const auto &sys : systems) {
      std::snprintf(buf, sizeof buf, " %12.2f", vals.at(sys));
      os << buf;
    }
    os << "\n";
  };
  for (const auto &spk : speakers) row(spk, cells.at(spk));
  row("Average", average);
  return os.str();
}

nlohmann::json centroid_report_json(const CentroidReport &report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &d : report.per_speaker)
    rows.push_back({{"speaker", d.speaker_id}, {"distance", d.distance}});
  return {{"metric", "centroid_distance"},
          {"rows", rows},
          {"mean", report.mean},
          {"std", report.std}};
}

std::string centroid_report_text(const CentroidReport &report) {
  std::ostringstream os;
  char buf[96];
  os << "centroid_distance\n";
  for (const auto &d : report.per_speaker) {
    std::snprintf(buf, sizeof buf, "%-8s %10.4f\n", d.speaker_id.c_str(), d.distance);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "%-8s %10.4f +/- %.4f\n", "Average", report.mean,
                report.std);
  os << buf;
  return os.str();
}

std::vector<std::filesystem::path> write_metric_report(
    const std::filesystem::path &stem, const std::vector<MetricRecord> &records,
    const std::string &metric) {
  const SummaryTable table = summarize(records, metric);
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  const std::filesystem::path jsonl = stem.string() + ".jsonl";
  const std::filesystem::path sjson = stem.string() + ".summary.json";
  const std::filesystem::path stext = stem.string() + ".summary.txt";
  write_metric_records(jsonl, records);
  std::ofstream j(sjson);
  if (!j) throw IoError("cannot write " + sjson.string());
  j << table.to_json().dump(2) << "\n";
  std::ofstream t(stext);
  if (!t) throw IoError("cannot write " + stext.string());
  t << table.to_text();
  return {jsonl, sjson, stext};
}

}  // namespace fac
