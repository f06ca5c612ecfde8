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

#ifndef SCRUB_EVAL_H_
#define SCRUB_EVAL_H_

// Linear-probe evaluation of subspace removal.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scrub/encoding.h"
#include "scrub/scoring.h"
#include "scrub/subspace.h"

namespace scrub {

struct EvalMetrics {
  // Toxic-labeled rows predicted toxic.
  int tox = 0;
  // Nontoxic-labeled rows predicted toxic.
  int non_tox = 0;
  double acc = 0.0;
  // Mean cosine between original and modified rows.
  double cos = 1.0;
  // Same over toxic-labeled rows; absent when there are none.
  std::optional<double> cos_t;
  int n_toxic = 0;
  int n_nontoxic = 0;
};

// Shares the scoring module's trainer.
TrainedProbe train_eval_probe(const RowMatrix& embeddings,
                              std::span<const int> labels,
                              const ProbeTraining& options = {});

// Metrics on raw embeddings when `model` is null (cos == cos_t == 1), else
// after remove_subspace. Labels are 0/1.
EvalMetrics evaluate_removal(const LinearProbe& probe,
                             const RowMatrix& embeddings,
                             std::span<const int> labels,
                             const SubspaceModel* model);

struct CrossCorpusRow {
  std::string train_corpus;
  std::string test_corpus;
  EvalMetrics metrics;
};

// Applies a subspace fitted on one corpus to another corpus's probe and
// validation set.
CrossCorpusRow cross_corpus_eval(const SubspaceModel& foreign,
                                 const LinearProbe& probe,
                                 const RowMatrix& embeddings,
                                 std::span<const int> labels,
                                 std::string test_corpus);

// First `count` (index, singular value) pairs.
std::vector<std::pair<int, double>> singular_value_report(
    const SubspaceModel& model, int count = 7);

struct AnalysisRow {
  int index = 0;
  double singular_value = 0.0;
  double toxic_error = 0.0;
  double nontoxic_error = 0.0;
  double pca_error = 0.0;
  double delta_error = 0.0;
  int tox_score = 0;
  double mean_cos = 1.0;
};

// Removes one candidate eigenvector at a time from the validation rows.
std::vector<AnalysisRow> eigenvector_analysis(
    const SubspaceModel& candidates, const LinearProbe& probe,
    const RowMatrix& val_embeddings, std::span<const int> val_labels,
    const RowMatrix& toxic_embeddings, const RowMatrix& nontoxic_embeddings,
    const DirectionSet& directions);

// Spearman rank correlation with average ranks for ties. Returns 0 when
// either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace scrub

#endif  // SCRUB_EVAL_H_
