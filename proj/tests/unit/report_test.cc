// Copyright 2026 The Scrub Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scrub/report.h"

namespace scrub {
namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t end; (end = text.find('\n', start)) != std::string::npos;
       start = end + 1) {
    out.push_back(text.substr(start, end - start));
  }
  return out;
}

TEST(Fixed3, Rounding) {
  EXPECT_EQ(fixed3(0.8665), "0.867");  // binary 0.86650000000000004796
  EXPECT_EQ(fixed3(1.0), "1.000");
  EXPECT_EQ(fixed3(-0.0004), "-0.000");
  EXPECT_EQ(fixed3(3.2185), "3.219");  // binary 3.21850000000000013856
}

TEST(FormatTable, AlignsColumns) {
  const std::string table =
      format_table({"Name", "N"}, {{"alpha", "1"}, {"b", "1000"}});
  EXPECT_EQ(table,
            "Name      N\n"
            "-----------\n"
            "alpha     1\n"
            "b      1000\n");
}

EvalMetrics metrics(int tox, int non_tox, double acc) {
  EvalMetrics m;
  m.tox = tox;
  m.non_tox = non_tox;
  m.acc = acc;
  m.n_toxic = 1000;
  m.n_nontoxic = 1000;
  return m;
}

TEST(RemovalTable, RowsAndJson) {
  std::vector<RemovalRow> rows = {{"Wiki", false, metrics(867, 134, 0.8665)},
                                  {"Wiki", true, metrics(171, 58, 0.557)}};
  rows[0].metrics.cos_t = 1.0;
  const auto text = lines(render_removal_table(rows));
  ASSERT_EQ(text.size(), 4u);
  EXPECT_EQ(text[0], "Dataset  Removal  Tox  Non-Tox   Acc.");
  EXPECT_EQ(text[2], "Wiki          No  867      134  0.867");
  EXPECT_EQ(text[3], "Wiki         Yes  171       58  0.557");

  const auto json = lines(removal_jsonl(rows));
  ASSERT_EQ(json.size(), 2u);
  const auto first = nlohmann::json::parse(json[0]);
  EXPECT_EQ(first["dataset"], "Wiki");
  EXPECT_EQ(first["removal"], false);
  EXPECT_EQ(first["tox"], 867);
  EXPECT_EQ(first["cos_t"], 1.0);
  EXPECT_FALSE(nlohmann::json::parse(json[1]).contains("cos_t"));
}

TEST(CrossTable, MissingCosTIsADash) {
  CrossCorpusRow row{"Civil", "Real", metrics(28, 3, 0.513)};
  row.metrics.cos = 0.806;
  const auto text = lines(render_cross_table({&row, 1}));
  EXPECT_EQ(text[0], "Train  Test  Tox  Non-Tox    Cos  Cos_t   Acc.");
  EXPECT_EQ(text[2], "Civil  Real   28        3  0.806      -  0.513");
  const auto json = nlohmann::json::parse(cross_jsonl({&row, 1}));
  EXPECT_EQ(json["train"], "Civil");
  EXPECT_EQ(json["test"], "Real");
}

TEST(ErrorTable, Columns) {
  const ErrorRow row{"Civil", 10682, 1.488, 3.219};
  const auto text = lines(render_error_table({&row, 1}));
  EXPECT_EQ(text[0], "Dataset    |W|  V_t scaled err.  V scaled err.");
  EXPECT_EQ(text[2], "Civil    10682            1.488          3.219");
  const auto json = nlohmann::json::parse(error_jsonl({&row, 1}));
  EXPECT_EQ(json["pca_input_rows"], 10682);
}

TEST(SingularValues, CsvKeepsFullPrecision) {
  const std::vector<std::pair<int, double>> values = {{0, 0.1}, {1, 1.0 / 3}};
  const std::string csv = singular_values_csv(values);
  EXPECT_EQ(csv, "index,value\n0,0.10000000000000001\n1,0.33333333333333331\n");
  EXPECT_EQ(lines(render_singular_values(values))[3],
            "1                   0.333");
}

TEST(Analysis, HeaderAndJsonKeys) {
  AnalysisRow row;
  row.index = 4;
  row.delta_error = -1.25;
  row.tox_score = 12;
  const auto text = lines(render_analysis({&row, 1}));
  EXPECT_EQ(text[0].substr(0, 11), "Eigenvector");
  const auto json = nlohmann::ordered_json::parse(analysis_jsonl({&row, 1}));
  std::vector<std::string> keys;
  for (const auto& [k, v] : json.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{
                      "index", "singular_value", "toxic_error",
                      "nontoxic_error", "pca_error", "delta_error",
                      "tox_score", "mean_cos"}));
  EXPECT_EQ(json["delta_error"], -1.25);
}

}  // namespace
}  // namespace scrub
