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

#ifndef SCRUB_REPORT_H_
#define SCRUB_REPORT_H_

// Aligned text tables and JSONL rows for evaluation reports.

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scrub/eval.h"

namespace scrub {

// Left-aligned first column, right-aligned others.
std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

// Fixed three-decimal rendering used in every report.
std::string fixed3(double value);

struct RemovalRow {
  std::string dataset;
  bool removal = false;
  EvalMetrics metrics;
};

struct ErrorRow {
  std::string dataset;
  long pca_input_rows = 0;
  double selected_scaled_error = 0.0;
  double full_scaled_error = 0.0;
};

// Dataset | Removal | Tox | Non-Tox | Acc.
std::string render_removal_table(std::span<const RemovalRow> rows);
std::string removal_jsonl(std::span<const RemovalRow> rows);

// Train | Test | Tox | Non-Tox | Cos | Cos_t | Acc.
std::string render_cross_table(std::span<const CrossCorpusRow> rows);
std::string cross_jsonl(std::span<const CrossCorpusRow> rows);

// Dataset | |W| | V_t scaled err. | V scaled err.
std::string render_error_table(std::span<const ErrorRow> rows);
std::string error_jsonl(std::span<const ErrorRow> rows);

std::string singular_values_csv(
    std::span<const std::pair<int, double>> values);
std::string render_singular_values(
    std::span<const std::pair<int, double>> values);

std::string render_analysis(std::span<const AnalysisRow> rows);
std::string analysis_jsonl(std::span<const AnalysisRow> rows);

}  // namespace scrub

#endif  // SCRUB_REPORT_H_
