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

#include "scrub/subspace.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "scrub/error.h"

namespace scrub {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

RowMatrix DirectionSet::stacked() const {
  RowMatrix d(2 * toxic.rows(), toxic.cols());
  d.topRows(toxic.rows()) = toxic;
  d.bottomRows(nontoxic.rows()) = nontoxic;
  return d;
}

DirectionSet compute_directions(const EmbeddingMatrix& toxic,
                                const EmbeddingMatrix& nontoxic) {
  if (toxic.rows() != nontoxic.rows() || toxic.dim() != nontoxic.dim()) {
    throw ValidationError(
        "compute_directions: toxic embeddings are " +
        std::to_string(toxic.rows()) + "x" + std::to_string(toxic.dim()) +
        " but masked embeddings are " + std::to_string(nontoxic.rows()) + "x" +
        std::to_string(nontoxic.dim()));
  }
  for (std::size_t i = 0; i < toxic.row_ids().size(); ++i) {
    if (toxic.row_ids()[i] != nontoxic.row_ids()[i]) {
      throw ValidationError("compute_directions: row " + std::to_string(i) +
                            " pairs id \"" + toxic.row_ids()[i] +
                            "\" with \"" + nontoxic.row_ids()[i] + "\"");
    }
  }
  DirectionSet directions;
  directions.toxic = toxic.data() - nontoxic.data();
  directions.nontoxic = -directions.toxic;
  directions.row_ids = toxic.row_ids();
  return directions;
}

RowMatrix SubspaceModel::selected_basis() const {
  RowMatrix out(static_cast<Eigen::Index>(selected.size()), basis.cols());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = basis.row(selected[i]);
  }
  return out;
}

void SubspaceModel::validate() const {
  const Eigen::Index k = basis.rows();
  if (k == 0 || basis.cols() == 0) {
    throw ValidationError("subspace model has an empty basis");
  }
  if (!basis.allFinite() || !singular_values.allFinite()) {
    throw ValidationError("subspace model has non-finite entries");
  }
  if (singular_values.size() != k) {
    throw ValidationError("subspace model has " +
                          std::to_string(singular_values.size()) +
                          " singular values for " + std::to_string(k) +
                          " basis rows");
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    if (singular_values[i] < 0.0 ||
        (i > 0 && singular_values[i] > singular_values[i - 1])) {
      throw ValidationError(
          "singular values must be non-negative and non-increasing");
    }
  }
  const Eigen::MatrixXd gram = basis * basis.transpose();
  const double drift =
      (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
  if (drift > 1e-10) {
    throw ValidationError("subspace basis is not orthonormal (max deviation " +
                          std::to_string(drift) + ")");
  }
  std::unordered_set<int> seen;
  for (int index : selected) {
    if (index < 0 || index >= k) {
      throw ValidationError("selected index " + std::to_string(index) +
                            " outside [0, " + std::to_string(k) + ")");
    }
    if (!seen.insert(index).second) {
      throw ValidationError("selected index " + std::to_string(index) +
                            " repeated");
    }
  }
  if (center && center->size() != basis.cols()) {
    throw ValidationError("subspace center has the wrong dimension");
  }
}

bool SubspaceModel::operator==(const SubspaceModel& other) const {
  auto same = [](const auto& a, const auto& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  if (center.has_value() != other.center.has_value()) return false;
  if (center && !same(*center, *other.center)) return false;
  return same(basis, other.basis) &&
         same(singular_values, other.singular_values) &&
         selected == other.selected && provenance == other.provenance;
}

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  Eigen::Index argmax = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[argmax])) argmax = i;
  }
  if (v[argmax] < 0.0) v = -v;
}

namespace {

SubspaceModel basis_from_svd(const RowMatrix& data, int n_components) {
  const Eigen::MatrixXd dense = data;
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner>
      svd(dense, Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double tolerance =
      static_cast<double>(std::max(dense.rows(), dense.cols())) *
      std::numeric_limits<double>::epsilon() *
      (sigma.size() > 0 ? sigma[0] : 0.0);
  const Eigen::Index rank = (sigma.array() > tolerance).count();
  if (rank < n_components) {
    throw ValidationError("direction matrix has effective rank " +
                          std::to_string(rank) + ", below n_components = " +
                          std::to_string(n_components));
  }
  SubspaceModel model;
  model.basis.resize(n_components, dense.cols());
  model.singular_values = sigma.head(n_components);
  for (int i = 0; i < n_components; ++i) {
    Eigen::VectorXd v = svd.matrixV().col(i);
    normalize_sign(v);
    model.basis.row(i) = v.transpose();
  }
  return model;
}

void check_components(Eigen::Index rows, Eigen::Index dim, int n_components) {
  if (n_components < 1) {
    throw ValidationError("n_components must be at least 1");
  }
  if (rows < n_components || dim < n_components) {
    throw ValidationError("cannot keep " + std::to_string(n_components) +
                          " components from " + std::to_string(rows) + "x" +
                          std::to_string(dim) + " data");
  }
}

void check_pairing(const RowMatrix& w_t, const RowMatrix& w_nt,
                   const DirectionSet& directions) {
  if (w_t.rows() != directions.rows() || w_nt.rows() != directions.rows() ||
      w_t.cols() != directions.dim() || w_nt.cols() != directions.dim() ||
      directions.nontoxic.rows() != directions.rows()) {
    throw ValidationError("embeddings and directions differ in shape");
  }
}

}  // namespace

SubspaceModel fit_candidate_basis(const DirectionSet& directions,
                                  int n_components) {
  check_components(2 * directions.rows(), directions.dim(), n_components);
  // Rows of D come in +/- pairs, so the feature mean is exactly zero and no
  // centering is needed.
  return basis_from_svd(directions.stacked(), n_components);
}

SubspaceModel fit_centered_basis(const DirectionSet& directions,
                                 int n_components) {
  check_components(directions.rows(), directions.dim(), n_components);
  const Eigen::VectorXd center = directions.toxic.colwise().mean().transpose();
  const RowMatrix centered = directions.toxic.rowwise() - center.transpose();
  SubspaceModel model = basis_from_svd(centered, n_components);
  model.center = center;
  return model;
}

std::vector<EigenvectorScore> score_eigenvectors(
    const SubspaceModel& model, const RowMatrix& toxic_embeddings,
    const RowMatrix& nontoxic_embeddings, const DirectionSet& directions) {
  check_pairing(toxic_embeddings, nontoxic_embeddings, directions);
  if (model.dim() != directions.dim()) {
    throw ValidationError("subspace dim differs from direction dim");
  }
  std::vector<EigenvectorScore> scores;
  scores.reserve(static_cast<std::size_t>(model.n_candidates()));
  for (int i = 0; i < model.n_candidates(); ++i) {
    const Eigen::RowVectorXd v = model.basis.row(i);
    const Eigen::VectorXd toxic_coeff = toxic_embeddings * v.transpose();
    const Eigen::VectorXd nontoxic_coeff = nontoxic_embeddings * v.transpose();
    EigenvectorScore score;
    score.index = i;
    score.singular_value = model.singular_values[i];
    score.toxic_error = (directions.toxic - toxic_coeff * v).norm();
    score.pca_error = (directions.nontoxic - nontoxic_coeff * v).norm();
    score.nontoxic_error = (nontoxic_coeff * v).norm();
    score.delta_error = score.toxic_error - score.pca_error;
    scores.push_back(score);
  }
  return scores;
}

SubspaceModel select_eigenvectors(const SubspaceModel& model,
                                  std::span<const EigenvectorScore> scores,
                                  int k,
                                  std::optional<std::vector<int>> overrides) {
  SubspaceModel out = model;
  if (overrides) {
    if (overrides->empty()) {
      throw ValidationError("override list is empty");
    }
    out.selected = *overrides;
    out.validate();
    return out;
  }
  if (k < 1) throw ValidationError("k must be at least 1");
  if (k > static_cast<int>(scores.size())) {
    throw ValidationError("k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(scores.size()) + " scored candidates");
  }
  std::vector<EigenvectorScore> ranked(scores.begin(), scores.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const EigenvectorScore& a, const EigenvectorScore& b) {
                     if (a.delta_error != b.delta_error) {
                       return a.delta_error < b.delta_error;
                     }
                     return a.index < b.index;
                   });
  out.selected.clear();
  for (int i = 0; i < k; ++i) out.selected.push_back(ranked[i].index);
  out.validate();
  return out;
}

RowMatrix remove_rows_basis(const RowMatrix& w, const RowMatrix& basis) {
  if (w.cols() != basis.cols()) {
    throw ValidationError("embedding dim " + std::to_string(w.cols()) +
                          " differs from subspace dim " +
                          std::to_string(basis.cols()));
  }
  RowMatrix out = w;
  for (Eigen::Index r = 0; r < basis.rows(); ++r) {
    const Eigen::VectorXd coeff = out * basis.row(r).transpose();
    out.noalias() -= coeff * basis.row(r);
  }
  return out;
}

RowMatrix remove_subspace(const RowMatrix& w, const SubspaceModel& model) {
  if (model.selected.empty()) {
    throw ValidationError("subspace has no selected eigenvectors");
  }
  return remove_rows_basis(w, model.selected_basis());
}

EmbeddingMatrix remove_subspace(const EmbeddingMatrix& w,
                                const SubspaceModel& model) {
  return w.with_data(remove_subspace(w.data(), model));
}

RowMatrix remove_subspace_centered(const RowMatrix& w,
                                   const SubspaceModel& model) {
  if (!model.center) {
    throw ValidationError("centered removal needs a subspace center");
  }
  if (model.selected.empty()) {
    throw ValidationError("subspace has no selected eigenvectors");
  }
  if (w.cols() != model.dim()) {
    throw ValidationError("embedding dim differs from subspace dim");
  }
  const RowMatrix v = model.selected_basis();
  const Eigen::RowVectorXd center = model.center->transpose();
  const RowMatrix shifted = w.rowwise() - center;
  RowMatrix out = w - (shifted * v.transpose()) * v;
  out.rowwise() -= center;
  return out;
}

double reconstruction_error(const RowMatrix& d_part, const RowMatrix& w_part,
                            const SubspaceModel& model, bool use_selected) {
  if (d_part.rows() != w_part.rows() || d_part.cols() != w_part.cols() ||
      d_part.cols() != model.dim()) {
    throw ValidationError("reconstruction_error: shape mismatch");
  }
  const RowMatrix basis = use_selected ? model.selected_basis() : model.basis;
  return (d_part - (w_part * basis.transpose()) * basis).norm();
}

double scaled_error(double err, const RowMatrix& toxic_directions) {
  const double norm = toxic_directions.norm();
  if (!(norm > 0.0)) {
    throw ValidationError("cannot scale by a zero toxic direction norm");
  }
  return err / norm;
}

Eigen::VectorXd principal_angles(const RowMatrix& a, const RowMatrix& b) {
  if (a.cols() != b.cols()) {
    throw ValidationError("principal_angles: dimension mismatch");
  }
  const RowMatrix& small = a.rows() <= b.rows() ? a : b;
  const RowMatrix& large = a.rows() <= b.rows() ? b : a;
  const Eigen::MatrixXd overlap = small * large.transpose();
  const Eigen::MatrixXd residual = small - overlap * large;
  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(overlap);
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(residual);
  const Eigen::Index p = small.rows();
  Eigen::VectorXd cosines = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sines = Eigen::VectorXd::Zero(p);
  cosines.head(cos_svd.singularValues().size()) = cos_svd.singularValues();
  sines.head(sin_svd.singularValues().size()) = sin_svd.singularValues();
  // Cosines arrive descending and sines descending; pair the largest cosine
  // with the smallest sine.
  Eigen::VectorXd angles(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    angles[i] = std::atan2(sines[p - 1 - i], cosines[i]);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

namespace {

std::vector<double> to_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return std::vector<double>(v.begin(), v.end());
}

RowMatrix matrix_from_json(const json& rows, Eigen::Index cols) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = rows[i].get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ValidationError("basis row " + std::to_string(i) + " has " +
                            std::to_string(row.size()) + " entries, dim is " +
                            std::to_string(cols));
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

Eigen::VectorXd vector_from_json(const json& values) {
  const auto v = values.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

}  // namespace

std::string subspace_to_json(const SubspaceModel& model) {
  ordered_json out;
  out["dim"] = model.dim();
  out["n_candidates"] = model.n_candidates();
  auto& basis = out["basis"] = ordered_json::array();
  for (Eigen::Index i = 0; i < model.basis.rows(); ++i) {
    basis.push_back(to_vector(model.basis.row(i).transpose()));
  }
  out["singular_values"] = to_vector(model.singular_values);
  out["selected"] = model.selected;
  out["center"] = model.center ? ordered_json(to_vector(*model.center))
                               : ordered_json(nullptr);
  out["provenance"] = {{"source", model.provenance.source},
                       {"seed", model.provenance.seed},
                       {"config_digest", model.provenance.config_digest}};
  return out.dump(1) + "\n";
}

SubspaceModel subspace_from_json(const std::string& text) {
  SubspaceModel model;
  try {
    const json in = json::parse(text);
    const auto dim = in.at("dim").get<Eigen::Index>();
    const auto n_candidates = in.at("n_candidates").get<Eigen::Index>();
    model.basis = matrix_from_json(in.at("basis"), dim);
    if (model.basis.rows() != n_candidates) {
      throw ValidationError("n_candidates does not match the basis rows");
    }
    model.singular_values = vector_from_json(in.at("singular_values"));
    model.selected = in.at("selected").get<std::vector<int>>();
    if (const auto& center = in.at("center"); !center.is_null()) {
      model.center = vector_from_json(center);
    }
    const auto& provenance = in.at("provenance");
    model.provenance.source = provenance.at("source").get<std::string>();
    model.provenance.seed = provenance.at("seed").get<std::uint64_t>();
    model.provenance.config_digest =
        provenance.at("config_digest").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed subspace artifact: ") +
                          e.what());
  }
  model.validate();
  return model;
}

void save_subspace(const std::filesystem::path& path,
                   const SubspaceModel& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << subspace_to_json(model);
}

SubspaceModel load_subspace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open subspace " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return subspace_from_json(buffer.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_scores(const std::filesystem::path& path,
                 std::span<const EigenvectorScore> scores) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const auto& s : scores) {
    ordered_json row;
    row["index"] = s.index;
    row["singular_value"] = s.singular_value;
    row["toxic_error"] = s.toxic_error;
    row["pca_error"] = s.pca_error;
    row["nontoxic_error"] = s.nontoxic_error;
    row["delta_error"] = s.delta_error;
    out << row.dump() << '\n';
  }
}

std::vector<EigenvectorScore> load_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scores " + path.string());
  std::vector<EigenvectorScore> scores;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json row = json::parse(line);
      EigenvectorScore s;
      s.index = row.at("index").get<int>();
      s.singular_value = row.at("singular_value").get<double>();
      s.toxic_error = row.at("toxic_error").get<double>();
      s.pca_error = row.at("pca_error").get<double>();
      s.nontoxic_error = row.at("nontoxic_error").get<double>();
      s.delta_error = row.at("delta_error").get<double>();
      scores.push_back(s);
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
  }
  return scores;
}

}  // namespace scrub
