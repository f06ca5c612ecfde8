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

#include "scrub/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scrub/error.h"

namespace scrub {

TrainedProbe train_eval_probe(const RowMatrix& embeddings,
                              std::span<const int> labels,
                              const ProbeTraining& options) {
  return train_linear_probe(embeddings, labels, options);
}

namespace {

EvalMetrics score_predictions(const LinearProbe& probe,
                              const RowMatrix& original,
                              const RowMatrix& modified,
                              std::span<const int> labels, bool unmodified) {
  if (static_cast<Eigen::Index>(labels.size()) != original.rows()) {
    throw ValidationError("evaluation: " + std::to_string(original.rows()) +
                          " rows but " + std::to_string(labels.size()) +
                          " labels");
  }
  if (labels.empty()) throw ValidationError("evaluation: empty set");
  const std::vector<int> predicted = probe.predict(modified);
  EvalMetrics m;
  double cos_sum = 0.0;
  double cos_toxic_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const double cos =
        unmodified ? 1.0
                   : cosine_similarity(original.row(row).transpose(),
                                       modified.row(row).transpose());
    cos_sum += cos;
    if (labels[i] == 1) {
      ++m.n_toxic;
      m.tox += predicted[i];
      cos_toxic_sum += cos;
    } else if (labels[i] == 0) {
      ++m.n_nontoxic;
      m.non_tox += predicted[i];
    } else {
      throw ValidationError("evaluation labels must be 0 or 1");
    }
  }
  const int correct = m.tox + (m.n_nontoxic - m.non_tox);
  m.acc = static_cast<double>(correct) / static_cast<double>(labels.size());
  if (unmodified) {
    m.cos = 1.0;
    if (m.n_toxic > 0) m.cos_t = 1.0;
  } else {
    m.cos = cos_sum / static_cast<double>(labels.size());
    if (m.n_toxic > 0) m.cos_t = cos_toxic_sum / m.n_toxic;
  }
  return m;
}

}  // namespace

EvalMetrics evaluate_removal(const LinearProbe& probe,
                             const RowMatrix& embeddings,
                             std::span<const int> labels,
                             const SubspaceModel* model) {
  if (probe.weights.size() != embeddings.cols()) {
    throw ValidationError("probe dim " + std::to_string(probe.weights.size()) +
                          " differs from embedding dim " +
                          std::to_string(embeddings.cols()));
  }
  if (model == nullptr) {
    return score_predictions(probe, embeddings, embeddings, labels, true);
  }
  const RowMatrix modified = remove_subspace(embeddings, *model);
  return score_predictions(probe, embeddings, modified, labels, false);
}

CrossCorpusRow cross_corpus_eval(const SubspaceModel& foreign,
                                 const LinearProbe& probe,
                                 const RowMatrix& embeddings,
                                 std::span<const int> labels,
                                 std::string test_corpus) {
  if (foreign.dim() != embeddings.cols()) {
    throw ValidationError("subspace dim " + std::to_string(foreign.dim()) +
                          " differs from embedding dim " +
                          std::to_string(embeddings.cols()));
  }
  CrossCorpusRow row;
  row.train_corpus = foreign.provenance.source;
  row.test_corpus = std::move(test_corpus);
  row.metrics = evaluate_removal(probe, embeddings, labels, &foreign);
  return row;
}

std::vector<std::pair<int, double>> singular_value_report(
    const SubspaceModel& model, int count) {
  std::vector<std::pair<int, double>> out;
  const int n = std::min(count, model.n_candidates());
  for (int i = 0; i < n; ++i) out.emplace_back(i, model.singular_values[i]);
  return out;
}

std::vector<AnalysisRow> eigenvector_analysis(
    const SubspaceModel& candidates, const LinearProbe& probe,
    const RowMatrix& val_embeddings, std::span<const int> val_labels,
    const RowMatrix& toxic_embeddings, const RowMatrix& nontoxic_embeddings,
    const DirectionSet& directions) {
  const auto scores = score_eigenvectors(candidates, toxic_embeddings,
                                         nontoxic_embeddings, directions);
  std::vector<AnalysisRow> rows;
  rows.reserve(scores.size());
  for (const auto& s : scores) {
    const RowMatrix single = candidates.basis.row(s.index);
    const RowMatrix modified = remove_rows_basis(val_embeddings, single);
    const EvalMetrics m = score_predictions(probe, val_embeddings, modified,
                                            val_labels, false);
    AnalysisRow row;
    row.index = s.index;
    row.singular_value = s.singular_value;
    row.toxic_error = s.toxic_error;
    row.nontoxic_error = s.nontoxic_error;
    row.pca_error = s.pca_error;
    row.delta_error = s.delta_error;
    row.tox_score = m.tox;
    row.mean_cos = m.cos;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("spearman: length mismatch");
  }
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace scrub
