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

#ifndef SCRUB_TESTS_SUPPORT_ORACLE_H_
#define SCRUB_TESTS_SUPPORT_ORACLE_H_

// Reference computations written independently of the library, mostly as
// plain loops. They trade speed for obviousness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scrub/encoding.h"

namespace scrub::testing {

// w - V^T (V w) for every row, V with orthonormal rows.
inline RowMatrix oracle_remove(const RowMatrix& w, const RowMatrix& v) {
  RowMatrix out = w;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < v.rows(); ++k) {
        double dot = 0.0;
        for (Eigen::Index c = 0; c < w.cols(); ++c) dot += w(i, c) * v(k, c);
        s += dot * v(k, j);
      }
      out(i, j) = w(i, j) - s;
    }
  }
  return out;
}

inline double oracle_cosine(const std::vector<double>& a,
                            const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

inline std::vector<double> row_vector(const RowMatrix& m, Eigen::Index i) {
  return std::vector<double>(m.row(i).data(), m.row(i).data() + m.cols());
}

// Top-k eigenvectors of d^T d, largest first, as rows. Singular values of
// the stacked [d; -d] are sqrt(2 * lambda).
struct EigenOracle {
  RowMatrix vectors;
  Eigen::VectorXd singular_values;
};

inline EigenOracle oracle_stacked_pca(const RowMatrix& d, int k) {
  const Eigen::MatrixXd gram = d.transpose() * d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  EigenOracle out;
  out.vectors.resize(k, d.cols());
  out.singular_values.resize(k);
  const Eigen::Index n = gram.rows();
  for (int i = 0; i < k; ++i) {
    out.vectors.row(i) = solver.eigenvectors().col(n - 1 - i).transpose();
    out.singular_values(i) =
        std::sqrt(std::max(0.0, 2.0 * solver.eigenvalues()(n - 1 - i)));
  }
  return out;
}

// Largest principal angle from the projection residual:
// sin(theta_max) = ||(I - B^T B) A^T||_2 for orthonormal rows A, B.
inline double oracle_max_angle(const RowMatrix& a, const RowMatrix& b) {
  const Eigen::MatrixXd residual =
      a.transpose() - b.transpose() * (b * a.transpose());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  const double s = svd.singularValues().size() > 0
                       ? svd.singularValues()(0)
                       : 0.0;
  return std::asin(std::min(1.0, s));
}

// Average ranks, 1-based.
inline std::vector<double> oracle_ranks(const std::vector<double>& x) {
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) less += 1.0;
      if (x[j] == x[i]) equal += 1.0;
    }
    ranks[i] = less + (equal + 1.0) / 2.0;
  }
  return ranks;
}

inline double oracle_spearman(const std::vector<double>& x,
                              const std::vector<double>& y) {
  const auto rx = oracle_ranks(x);
  const auto ry = oracle_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// Mean logistic loss, with log(1 + e^z) evaluated stably.
inline double oracle_log_loss(const RowMatrix& x, const std::vector<int>& y,
                              const Eigen::VectorXd& w, double b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double z = b;
    for (Eigen::Index j = 0; j < x.cols(); ++j) z += x(i, j) * w(j);
    const double softplus =
        z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    total += softplus - (y[static_cast<std::size_t>(i)] == 1 ? z : 0.0);
  }
  return total / static_cast<double>(x.rows());
}

inline double lexicon_probability(int hits, double base_rate = 0.05) {
  return 1.0 - std::pow(2.0, -hits) * (1.0 - base_rate);
}

}  // namespace scrub::testing

#endif  // SCRUB_TESTS_SUPPORT_ORACLE_H_
