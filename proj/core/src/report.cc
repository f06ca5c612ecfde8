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

#include "scrub/report.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace scrub {

using ordered_json = nlohmann::ordered_json;

std::string fixed3(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.3f", value);
  return buffer;
}

std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : "";
      const std::string pad(width[c] - cell.size(), ' ');
      if (c > 0) out << "  ";
      out << (c == 0 ? cell + pad : pad + cell);
    }
    out << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& row : rows) emit(row);
  return out.str();
}

namespace {

ordered_json metrics_json(const EvalMetrics& m) {
  ordered_json row;
  row["tox"] = m.tox;
  row["non_tox"] = m.non_tox;
  row["acc"] = m.acc;
  row["cos"] = m.cos;
  if (m.cos_t) row["cos_t"] = *m.cos_t;
  row["n_toxic"] = m.n_toxic;
  row["n_nontoxic"] = m.n_nontoxic;
  return row;
}

template <typename Rows, typename Fn>
std::string jsonl(const Rows& rows, Fn to_json) {
  std::string out;
  for (const auto& row : rows) out += to_json(row).dump() + "\n";
  return out;
}

}  // namespace

std::string render_removal_table(std::span<const RemovalRow> rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    cells.push_back({row.dataset, row.removal ? "Yes" : "No",
                     std::to_string(row.metrics.tox),
                     std::to_string(row.metrics.non_tox),
                     fixed3(row.metrics.acc)});
  }
  return format_table({"Dataset", "Removal", "Tox", "Non-Tox", "Acc."}, cells);
}

std::string removal_jsonl(std::span<const RemovalRow> rows) {
  return jsonl(rows, [](const RemovalRow& row) {
    ordered_json out;
    out["dataset"] = row.dataset;
    out["removal"] = row.removal;
    out.update(metrics_json(row.metrics));
    return out;
  });
}

std::string render_cross_table(std::span<const CrossCorpusRow> rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    const auto& m = row.metrics;
    cells.push_back({row.train_corpus, row.test_corpus, std::to_string(m.tox),
                     std::to_string(m.non_tox), fixed3(m.cos),
                     m.cos_t ? fixed3(*m.cos_t) : "-", fixed3(m.acc)});
  }
  return format_table(
      {"Train", "Test", "Tox", "Non-Tox", "Cos", "Cos_t", "Acc."}, cells);
}

std::string cross_jsonl(std::span<const CrossCorpusRow> rows) {
  return jsonl(rows, [](const CrossCorpusRow& row) {
    ordered_json out;
    out["train"] = row.train_corpus;
    out["test"] = row.test_corpus;
    out.update(metrics_json(row.metrics));
    return out;
  });
}

std::string render_error_table(std::span<const ErrorRow> rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    cells.push_back({row.dataset, std::to_string(row.pca_input_rows),
                     fixed3(row.selected_scaled_error),
                     fixed3(row.full_scaled_error)});
  }
  return format_table(
      {"Dataset", "|W|", "V_t scaled err.", "V scaled err."}, cells);
}

std::string error_jsonl(std::span<const ErrorRow> rows) {
  return jsonl(rows, [](const ErrorRow& row) {
    ordered_json out;
    out["dataset"] = row.dataset;
    out["pca_input_rows"] = row.pca_input_rows;
    out["selected_scaled_error"] = row.selected_scaled_error;
    out["full_scaled_error"] = row.full_scaled_error;
    return out;
  });
}

std::string singular_values_csv(
    std::span<const std::pair<int, double>> values) {
  std::string out = "index,value\n";
  char buffer[64];
  for (const auto& [index, value] : values) {
    std::snprintf(buffer, sizeof(buffer), "%d,%.17g\n", index, value);
    out += buffer;
  }
  return out;
}

std::string render_singular_values(
    std::span<const std::pair<int, double>> values) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& [index, value] : values) {
    cells.push_back({std::to_string(index), fixed3(value)});
  }
  return format_table({"Component", "Singular value"}, cells);
}

std::string render_analysis(std::span<const AnalysisRow> rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : rows) {
    cells.push_back({std::to_string(row.index), fixed3(row.singular_value),
                     fixed3(row.toxic_error), fixed3(row.nontoxic_error),
                     fixed3(row.pca_error), fixed3(row.delta_error),
                     std::to_string(row.tox_score), fixed3(row.mean_cos)});
  }
  return format_table({"Eigenvector", "Singular value", "Toxic Error",
                       "Non-Toxic Error", "PCA Error", "dError", "Tox Score",
                       "Cos"},
                      cells);
}

std::string analysis_jsonl(std::span<const AnalysisRow> rows) {
  return jsonl(rows, [](const AnalysisRow& row) {
    ordered_json out;
    out["index"] = row.index;
    out["singular_value"] = row.singular_value;
    out["toxic_error"] = row.toxic_error;
    out["nontoxic_error"] = row.nontoxic_error;
    out["pca_error"] = row.pca_error;
    out["delta_error"] = row.delta_error;
    out["tox_score"] = row.tox_score;
    out["mean_cos"] = row.mean_cos;
    return out;
  });
}

}  // namespace scrub
