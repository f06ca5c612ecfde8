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

#ifndef SCRUB_ENCODING_H_
#define SCRUB_ENCODING_H_

// Sentence encoders: the toy bag-of-words encoder, precomputed embedding
// stores and the remote /encode client.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "scrub/remote.h"

namespace scrub {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// n x d sentence embeddings with one id per row. Entries are finite, ids
// unique, d > 0.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(RowMatrix data, std::vector<std::string> row_ids);

  Eigen::Index rows() const { return data_.rows(); }
  Eigen::Index dim() const { return data_.cols(); }
  const RowMatrix& data() const { return data_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }

  // Same ids, new values; `data` must have the same shape.
  EmbeddingMatrix with_data(RowMatrix data) const;

  bool operator==(const EmbeddingMatrix& other) const;

 private:
  RowMatrix data_;
  std::vector<std::string> row_ids_;
};

// Binary .embstore container, little-endian:
//   "SCRBEMB\0" | u32 version=1 | u64 n | u64 d | u32 float_bits=64
//   | n x (u32 byte length, id bytes) | n*d f64 row-major
void save_store(const std::filesystem::path& path, const EmbeddingMatrix& m);
EmbeddingMatrix load_store(const std::filesystem::path& path);

// One {"id":..., "vec":[...]} object per line.
void export_jsonl(const std::filesystem::path& path, const EmbeddingMatrix& m);

class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual Eigen::Index dim() const = 0;

  // One row per text, in order. `keys` names each row for backends that
  // look embeddings up instead of computing them; when empty the texts
  // themselves are the keys.
  virtual RowMatrix encode(std::span<const std::string> texts,
                           std::span<const std::string> keys = {}) const = 0;

  // JSON declaration recorded in run manifests.
  virtual std::string describe() const = 0;

  // Throws ValidationError on an empty batch.
  EmbeddingMatrix encode_batch(std::span<const std::string> texts,
                               std::vector<std::string> ids) const;

  Eigen::VectorXd encode_one(const std::string& text) const;
};

// Deterministic desk-scale stand-in for a sentence encoder. Each token other
// than "[MASK]" maps to a unit vector seeded from (token, seed); "[MASK]"
// maps to zero. A sentence is the normalized sum of its token vectors, or
// the zero vector when the sum is zero.
class ToyEncoder final : public Encoder {
 public:
  ToyEncoder(Eigen::Index dim, std::uint64_t seed);

  Eigen::Index dim() const override { return dim_; }
  RowMatrix encode(std::span<const std::string> texts,
                   std::span<const std::string> keys = {}) const override;
  std::string describe() const override;

  Eigen::VectorXd token_vector(std::string_view token) const;

 private:
  Eigen::Index dim_;
  std::uint64_t seed_;
};

Eigen::VectorXd toy_encode(Eigen::Index dim, std::uint64_t seed,
                           std::string_view text);

// Looks rows up by key in a loaded embedding store.
class StoreEncoder final : public Encoder {
 public:
  explicit StoreEncoder(const std::filesystem::path& path);
  explicit StoreEncoder(EmbeddingMatrix store, std::string origin = "memory");

  Eigen::Index dim() const override { return store_.dim(); }
  RowMatrix encode(std::span<const std::string> texts,
                   std::span<const std::string> keys = {}) const override;
  std::string describe() const override;

 private:
  EmbeddingMatrix store_;
  std::string origin_;
  std::unordered_map<std::string, Eigen::Index> index_;
};

// POST /encode client. A response whose dim differs from the declared one
// is a protocol error.
class RemoteEncoder final : public Encoder {
 public:
  RemoteEncoder(RemoteOptions options, Eigen::Index declared_dim);

  Eigen::Index dim() const override { return dim_; }
  RowMatrix encode(std::span<const std::string> texts,
                   std::span<const std::string> keys = {}) const override;
  std::string describe() const override;

 private:
  RemoteOptions options_;
  Eigen::Index dim_;
};

// Cosine similarity with the conventions used throughout: identical vectors
// give exactly 1, a zero vector against a different one gives 0, and the
// result is clamped to [-1, 1].
double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b);

}  // namespace scrub

#endif  // SCRUB_ENCODING_H_
