// tests/test_reports.cpp

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
#include <sstream>

#include "doctest.h"
#include "fac/error.hpp"
#include "fac/reports.hpp"
#include "test_support.hpp"

using namespace fac;

namespace {

std::vector<MetricRecord> table_records() {
  return {
      {"njs_1", "NJS", "original", "mcd_db", 6.0},  {"njs_2", "NJS", "original", "mcd_db", 8.0},
      {"njs_1", "NJS", "tv_only", "mcd_db", 5.0},   {"txhc_1", "TXHC", "original", "mcd_db", 4.0},
      {"txhc_1", "TXHC", "tv_only", "mcd_db", 3.0}, {"txhc_2", "TXHC", "tv_only", "mcd_db", 5.0},
      {"njs_1", "NJS", "original", "wer_percent", 90.0},
  };
}

}  // namespace

TEST_CASE("summary: per-speaker means and an average over speakers") {
  const auto t = summarize(table_records(), "mcd_db");
  CHECK(t.speakers == std::vector<std::string>{"NJS", "TXHC"});
  CHECK(t.systems == std::vector<std::string>{"original", "tv_only"});
  CHECK(t.cells.at("NJS").at("original") == 7.0);
  CHECK(t.cells.at("TXHC").at("tv_only") == 4.0);
  // Average of speaker means, not of utterances: (7 + 4) / 2.
  CHECK(t.average.at("original") == 5.5);
  CHECK(t.average.at("tv_only") == 4.5);

  const auto j = t.to_json();
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][2]["speaker"] == "Average");
  CHECK(j["rows"][2]["values"]["original"] == 5.5);

  const std::string text = t.to_text();
  CHECK(text.find("Average") != std::string::npos);
  CHECK(text.find("5.50") != std::string::npos);
  CHECK(text.find("7.00") != std::string::npos);
  std::istringstream lines(text);
  std::string line;
  std::vector<std::string> all;
  while (std::getline(lines, line)) all.push_back(line);
  REQUIRE(all.size() == 5);
  CHECK(all[2].size() == all[4].size());
  CHECK(all[4].rfind("Average", 0) == 0);
}

TEST_CASE("summary: missing cells and missing metric") {
  auto recs = table_records();
  recs.push_back({"ykwk_1", "YKWK", "original", "mcd_db", 1.0});
  CHECK_THROWS_AS(summarize(recs, "mcd_db"), ValidationError);
  CHECK_THROWS_AS(summarize(recs, "centroid"), ValidationError);
  const auto w = summarize(recs, "wer_percent");
  CHECK(w.average.at("original") == 90.0);
}

TEST_CASE("metric records round trip through JSONL") {
  testing::TempDir dir;
  const auto recs = table_records();
  write_metric_records(dir / "m.jsonl", recs);
  CHECK(read_metric_records(dir / "m.jsonl") == recs);
  {
    std::ofstream out(dir / "bad.jsonl");
    out << recs[0].to_json().dump() << "\n{oops\n";
  }
  CHECK_THROWS_AS(read_metric_records(dir / "bad.jsonl"), ParseError);
  CHECK_THROWS_AS(read_metric_records(dir / "none.jsonl"), IoError);
}

TEST_CASE("write_metric_report writes three files") {
  testing::TempDir dir;
  const auto files = write_metric_report(dir / "mcd", table_records(), "mcd_db");
  REQUIRE(files.size() == 3);
  for (const auto &f : files) CHECK(std::filesystem::exists(f));
  CHECK(files[0].filename() == "mcd.jsonl");
  CHECK(files[1].filename() == "mcd.summary.json");
  CHECK(files[2].filename() == "mcd.summary.txt");
  std::ifstream in(files[1]);
  const auto j = nlohmann::json::parse(in);
  CHECK(j["metric"] == "mcd_db");
}

TEST_CASE("centroid report rendering") {
  CentroidReport r;
  r.per_speaker = {{"NJS", 3.0}, {"TXHC", 5.0}};
  r.mean = 4.0;
  r.std = 1.0;
  const auto j = centroid_report_json(r);
  CHECK(j["rows"].size() == 2);
  CHECK(j["mean"] == 4.0);
  CHECK(j["std"] == 1.0);
  const auto text = centroid_report_text(r);
  CHECK(text.find("NJS") != std::string::npos);
  CHECK(text.find("4.0000") != std::string::npos);
}
