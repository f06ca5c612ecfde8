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

#include "scrub/encoding.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "scrub/error.h"
#include "scrub/random.h"
#include "scrub/tokenize.h"

namespace scrub {

using json = nlohmann::json;

EmbeddingMatrix::EmbeddingMatrix(RowMatrix data,
                                 std::vector<std::string> row_ids)
    : data_(std::move(data)), row_ids_(std::move(row_ids)) {
  if (data_.cols() <= 0) {
    throw ValidationError("embedding matrix must have dim > 0");
  }
  if (static_cast<Eigen::Index>(row_ids_.size()) != data_.rows()) {
    throw ValidationError("embedding matrix has " +
                          std::to_string(data_.rows()) + " rows but " +
                          std::to_string(row_ids_.size()) + " ids");
  }
  if (!data_.allFinite()) {
    throw ValidationError("embedding matrix contains non-finite entries");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : row_ids_) {
    if (!seen.insert(id).second) {
      throw ValidationError("duplicate embedding row id \"" + id + "\"");
    }
  }
}

EmbeddingMatrix EmbeddingMatrix::with_data(RowMatrix data) const {
  if (data.rows() != data_.rows() || data.cols() != data_.cols()) {
    throw ValidationError("with_data: shape mismatch");
  }
  return EmbeddingMatrix(std::move(data), row_ids_);
}

bool EmbeddingMatrix::operator==(const EmbeddingMatrix& other) const {
  return row_ids_ == other.row_ids_ && data_.rows() == other.data_.rows() &&
         data_.cols() == other.data_.cols() && data_ == other.data_;
}

namespace {

constexpr char kStoreMagic[8] = {'S', 'C', 'R', 'B', 'E', 'M', 'B', '\0'};
constexpr std::uint32_t kStoreVersion = 1;

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

template <typename T>
void put(std::ofstream& out, T value) {
  const T little = to_little(value);
  out.write(reinterpret_cast<const char*>(&little), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ValidationError(path.string() + ": truncated embedding store");
  }
  return to_little(value);
}

}  // namespace

void save_store(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(kStoreMagic, sizeof(kStoreMagic));
  put<std::uint32_t>(out, kStoreVersion);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.dim()));
  put<std::uint32_t>(out, 64);
  for (const auto& id : m.row_ids()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  const RowMatrix& data = m.data();
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    put<double>(out, data.data()[i]);
  }
  if (!out) throw ValidationError("failed writing " + path.string());
}

EmbeddingMatrix load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open embedding store " + path.string());
  char magic[sizeof(kStoreMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kStoreMagic, sizeof(magic)) != 0) {
    throw ValidationError(path.string() + ": not an embedding store");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kStoreVersion) {
    throw ValidationError(path.string() + ": unsupported store version " +
                          std::to_string(version));
  }
  const auto n = get<std::uint64_t>(in, path);
  const auto d = get<std::uint64_t>(in, path);
  const auto width = get<std::uint32_t>(in, path);
  if (width != 64) {
    throw ValidationError(path.string() + ": unsupported float width " +
                          std::to_string(width));
  }
  std::vector<std::string> ids;
  ids.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto length = get<std::uint32_t>(in, path);
    std::string id(length, '\0');
    if (!in.read(id.data(), length)) {
      throw ValidationError(path.string() + ": truncated id block");
    }
    ids.push_back(std::move(id));
  }
  RowMatrix data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    data.data()[i] = get<double>(in, path);
  }
  return EmbeddingMatrix(std::move(data), std::move(ids));
}

void export_jsonl(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row;
    row["id"] = m.row_ids()[static_cast<std::size_t>(i)];
    auto& vec = row["vec"] = json::array();
    for (Eigen::Index j = 0; j < m.dim(); ++j) vec.push_back(m.data()(i, j));
    out << row.dump() << '\n';
  }
}

EmbeddingMatrix Encoder::encode_batch(std::span<const std::string> texts,
                                      std::vector<std::string> ids) const {
  if (texts.empty()) throw ValidationError("encode_batch: empty text list");
  if (ids.size() != texts.size()) {
    throw ValidationError("encode_batch: ids and texts differ in length");
  }
  RowMatrix rows = encode(texts, ids);
  return EmbeddingMatrix(std::move(rows), std::move(ids));
}

Eigen::VectorXd Encoder::encode_one(const std::string& text) const {
  return encode(std::span<const std::string>(&text, 1)).row(0).transpose();
}

ToyEncoder::ToyEncoder(Eigen::Index dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim < 2) throw ValidationError("toy encoder needs dim >= 2");
}

Eigen::VectorXd ToyEncoder::token_vector(std::string_view token) const {
  Eigen::VectorXd v(dim_);
  if (token == kMaskToken) {
    v.setZero();
    return v;
  }
  Rng rng(mix64(fnv1a64(token) ^ mix64(seed_)));
  for (Eigen::Index i = 0; i < dim_; ++i) v[i] = rng.gaussian();
  return v / v.norm();
}

RowMatrix ToyEncoder::encode(std::span<const std::string> texts,
                             std::span<const std::string>) const {
  RowMatrix out(static_cast<Eigen::Index>(texts.size()), dim_);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
    for (const auto& token : tokenize(texts[i])) {
      if (token != kMaskToken) sum += token_vector(token);
    }
    const double norm = sum.norm();
    if (norm > 0.0) sum /= norm;
    out.row(static_cast<Eigen::Index>(i)) = sum.transpose();
  }
  return out;
}

std::string ToyEncoder::describe() const {
  return json{{"kind", "toy"}, {"dim", dim_}, {"seed", seed_}}.dump();
}

Eigen::VectorXd toy_encode(Eigen::Index dim, std::uint64_t seed,
                           std::string_view text) {
  return ToyEncoder(dim, seed).encode_one(std::string(text));
}

StoreEncoder::StoreEncoder(const std::filesystem::path& path)
    : StoreEncoder(load_store(path), path.string()) {}

StoreEncoder::StoreEncoder(EmbeddingMatrix store, std::string origin)
    : store_(std::move(store)), origin_(std::move(origin)) {
  for (Eigen::Index i = 0; i < store_.rows(); ++i) {
    index_.emplace(store_.row_ids()[static_cast<std::size_t>(i)], i);
  }
}

RowMatrix StoreEncoder::encode(std::span<const std::string> texts,
                               std::span<const std::string> keys) const {
  if (!keys.empty() && keys.size() != texts.size()) {
    throw ValidationError("store encoder: keys and texts differ in length");
  }
  const auto lookup = keys.empty() ? texts : keys;
  RowMatrix out(static_cast<Eigen::Index>(lookup.size()), store_.dim());
  for (std::size_t i = 0; i < lookup.size(); ++i) {
    const auto it = index_.find(lookup[i]);
    if (it == index_.end()) {
      throw ValidationError("embedding store " + origin_ +
                            " has no row for id \"" + lookup[i] + "\"");
    }
    out.row(static_cast<Eigen::Index>(i)) = store_.data().row(it->second);
  }
  return out;
}

std::string StoreEncoder::describe() const {
  return json{{"kind", "store"}, {"path", origin_}, {"dim", store_.dim()}}
      .dump();
}

RemoteEncoder::RemoteEncoder(RemoteOptions options, Eigen::Index declared_dim)
    : options_(std::move(options)), dim_(declared_dim) {
  if (dim_ <= 0) {
    dim_ = fetch_health(options_).dim;
    if (dim_ <= 0) throw ProtocolError("/health reported a non-positive dim",
                                       false);
  }
}

RowMatrix RemoteEncoder::encode(std::span<const std::string> texts,
                                std::span<const std::string>) const {
  RowMatrix out(static_cast<Eigen::Index>(texts.size()), dim_);
  for_each_batch(texts.size(), options_, [&](std::size_t begin,
                                             std::size_t end) {
    const std::size_t count = end - begin;
    json request{{"texts", json::array()}};
    for (std::size_t i = begin; i < end; ++i) {
      request["texts"].push_back(texts[i]);
    }
    json response;
    post_with_retries(
        options_, "/encode", request.dump(), [&](const std::string& body) {
          try {
            response = json::parse(body);
          } catch (const json::parse_error&) {
            throw ProtocolError("/encode returned invalid JSON");
          }
          if (!response.is_object() || !response.contains("dim") ||
              !response["dim"].is_number_integer() ||
              !response.contains("embeddings") ||
              !response["embeddings"].is_array()) {
            throw ProtocolError("/encode response lacks dim/embeddings");
          }
          const auto dim = response["dim"].get<long long>();
          if (dim != dim_) {
            throw ProtocolError("/encode returned dim " +
                                std::to_string(dim) + ", declared " +
                                std::to_string(dim_));
          }
          const auto& rows = response["embeddings"];
          if (rows.size() != count) {
            throw ProtocolError("/encode returned " +
                                std::to_string(rows.size()) +
                                " embeddings for " + std::to_string(count) +
                                " texts");
          }
          for (const auto& row : rows) {
            if (!row.is_array() ||
                static_cast<Eigen::Index>(row.size()) != dim_) {
              throw ProtocolError("/encode row length differs from dim");
            }
            for (const auto& v : row) {
              if (!v.is_number() || !std::isfinite(v.get<double>())) {
                throw ProtocolError("/encode returned a non-finite value");
              }
            }
          }
        });
    const auto& rows = response["embeddings"];
    for (std::size_t i = 0; i < count; ++i) {
      for (Eigen::Index j = 0; j < dim_; ++j) {
        out(static_cast<Eigen::Index>(begin + i), j) =
            rows[i][static_cast<std::size_t>(j)].get<double>();
      }
    }
  });
  return out;
}

std::string RemoteEncoder::describe() const {
  return json{{"kind", "remote"}, {"endpoint", options_.endpoint},
              {"dim", dim_}}
      .dump();
}

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine_similarity: length mismatch");
  }
  if (a == b) return 1.0;
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

}  // namespace scrub
