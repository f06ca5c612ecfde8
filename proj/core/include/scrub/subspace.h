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

#ifndef SCRUB_SUBSPACE_H_
#define SCRUB_SUBSPACE_H_

// Toxic subspace identification and removal.
//
// Paired embeddings (w_t, w_nt) give toxic directions d_t = w_t - w_nt and
// their negations d_nt. PCA over the stacked set D = [d_t; d_nt] yields the
// candidate basis V. Since the rows of D come in +/- pairs its feature mean
// is exactly zero, so the PCA is the uncentered SVD of D and V coincides
// with the right singular vectors of d_t alone. Candidates are ranked by
//
//   toxic_error = ||d_t  - (W_t v) v^T||_F
//   pca_error   = ||d_nt - (W_nt v) v^T||_F
//   delta_error = toxic_error - pca_error
//
// and the most negative deltas form V_t. Removal is w - sum_v (w . v) v.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "scrub/encoding.h"

namespace scrub {

struct DirectionSet {
  RowMatrix toxic;     // d_t, rows w_t - w_nt
  RowMatrix nontoxic;  // d_nt == -d_t
  std::vector<std::string> row_ids;

  Eigen::Index rows() const { return toxic.rows(); }
  Eigen::Index dim() const { return toxic.cols(); }
  // [d_t; d_nt]
  RowMatrix stacked() const;
};

// Throws ValidationError on shape mismatch or when row ids do not pair up.
DirectionSet compute_directions(const EmbeddingMatrix& toxic,
                                const EmbeddingMatrix& nontoxic);

struct Provenance {
  std::string source;
  std::uint64_t seed = 0;
  std::string config_digest;

  bool operator==(const Provenance&) const = default;
};

struct SubspaceModel {
  // k_total x d, orthonormal rows, one candidate eigenvector per row.
  RowMatrix basis;
  // Non-increasing, >= 0.
  Eigen::VectorXd singular_values;
  // Indices into basis forming V_t, in selection order.
  std::vector<int> selected;
  // Feature mean of d_t, only for the centered variant.
  std::optional<Eigen::VectorXd> center;
  Provenance provenance;

  Eigen::Index dim() const { return basis.cols(); }
  int n_candidates() const { return static_cast<int>(basis.rows()); }
  RowMatrix selected_basis() const;

  // Throws ValidationError on any broken invariant.
  void validate() const;

  bool operator==(const SubspaceModel& other) const;
};

// Largest-magnitude entry made positive; the lowest index wins ties.
void normalize_sign(Eigen::Ref<Eigen::VectorXd> v);

// Uncentered SVD of [d_t; d_nt]. Throws ValidationError when
// 2m < n_components, d < n_components or the effective rank of D is below
// n_components.
SubspaceModel fit_candidate_basis(const DirectionSet& directions,
                                  int n_components = 32);

// Alternative fit on d_t alone with feature centering; the model carries
// the center and is used with remove_subspace_centered.
SubspaceModel fit_centered_basis(const DirectionSet& directions,
                                 int n_components);

struct EigenvectorScore {
  int index = 0;
  double singular_value = 0.0;
  double toxic_error = 0.0;
  double pca_error = 0.0;
  double nontoxic_error = 0.0;  // ||(W_nt v) v^T||_F
  double delta_error = 0.0;
};

std::vector<EigenvectorScore> score_eigenvectors(
    const SubspaceModel& model, const RowMatrix& toxic_embeddings,
    const RowMatrix& nontoxic_embeddings, const DirectionSet& directions);

// Ranks by ascending delta_error (ties to the lower index) and keeps the
// first k, or takes `overrides` verbatim when given.
SubspaceModel select_eigenvectors(
    const SubspaceModel& model, std::span<const EigenvectorScore> scores,
    int k = 7, std::optional<std::vector<int>> overrides = std::nullopt);

// w_hat = w - sum over selected v of (w . v) v. Throws on an empty selection.
RowMatrix remove_subspace(const RowMatrix& w, const SubspaceModel& model);
EmbeddingMatrix remove_subspace(const EmbeddingMatrix& w,
                                const SubspaceModel& model);

// Projection onto an explicit orthonormal row basis.
RowMatrix remove_rows_basis(const RowMatrix& w, const RowMatrix& basis);

// w_hat = w - <w - c, V_t> V_t - c with c the model center.
RowMatrix remove_subspace_centered(const RowMatrix& w,
                                   const SubspaceModel& model);

// ||D_part - (W_part B^T) B||_F with B the selected rows or all candidates.
double reconstruction_error(const RowMatrix& d_part, const RowMatrix& w_part,
                            const SubspaceModel& model, bool use_selected);
// err / ||d_t||_F
double scaled_error(double err, const RowMatrix& toxic_directions);

// Principal angles (radians, ascending) between the row spans of two
// matrices with orthonormal rows, computed from sines for accuracy near 0.
Eigen::VectorXd principal_angles(const RowMatrix& a, const RowMatrix& b);

// .toxsub.json artifact. Doubles are written with round-trip precision.
std::string subspace_to_json(const SubspaceModel& model);
SubspaceModel subspace_from_json(const std::string& text);
void save_subspace(const std::filesystem::path& path,
                   const SubspaceModel& model);
SubspaceModel load_subspace(const std::filesystem::path& path);

void save_scores(const std::filesystem::path& path,
                 std::span<const EigenvectorScore> scores);
std::vector<EigenvectorScore> load_scores(const std::filesystem::path& path);

}  // namespace scrub

#endif  // SCRUB_SUBSPACE_H_
