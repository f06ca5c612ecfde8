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

#include "scrub/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include <Eigen/QR>

#include "scrub/error.h"
#include "scrub/random.h"

namespace scrub {
namespace {

Eigen::VectorXd unit_gaussian(Eigen::Index dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.gaussian();
  return v / v.norm();
}

}  // namespace

RowMatrix make_planted_basis(Eigen::Index dim, int rank, std::uint64_t seed) {
  if (rank < 1 || rank > dim) {
    throw ValidationError("planted rank must lie in [1, dim]");
  }
  Rng rng(seed);
  Eigen::MatrixXd gaussian(dim, rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) gaussian(i, j) = rng.gaussian();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(dim, rank);
  return q.transpose();
}

PlantedData draw_planted(const PlantedConfig& config,
                         const RowMatrix& planted_basis, std::uint64_t seed) {
  const Eigen::Index d = config.dim;
  const int r = config.rank;
  if (planted_basis.rows() != r || planted_basis.cols() != d) {
    throw ValidationError("planted basis shape does not match the config");
  }
  Rng rng(seed);
  Rng offset_rng = rng.split(1);
  Rng noise_rng = rng.split(2);
  Rng nontoxic_rng = rng.split(3);

  const Eigen::VectorXd mean_direction =
      Eigen::VectorXd::Ones(r) / std::sqrt(static_cast<double>(r));
  PlantedData data;
  data.planted_basis = planted_basis;
  data.toxic.resize(config.n_per_class, d);
  data.toxic_base.resize(config.n_per_class, d);
  data.nontoxic.resize(config.n_per_class, d);
  for (int i = 0; i < config.n_per_class; ++i) {
    const Eigen::VectorXd base = unit_gaussian(d, rng);
    Eigen::VectorXd coeff(r);
    for (int j = 0; j < r; ++j) {
      coeff[j] = mean_direction[j] + config.offset_spread * offset_rng.gaussian();
    }
    coeff *= config.offset_norm / coeff.norm();
    const Eigen::VectorXd offset = planted_basis.transpose() * coeff;
    const Eigen::VectorXd noise = config.noise_scale * unit_gaussian(d, noise_rng);
    data.toxic_base.row(i) = base.transpose();
    data.toxic.row(i) = (base + offset + noise).transpose();
    data.nontoxic.row(i) = unit_gaussian(d, nontoxic_rng).transpose();
  }
  return data;
}

PlantedData make_planted(const PlantedConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  const std::uint64_t basis_seed = rng.next();
  const std::uint64_t draw_seed = rng.next();
  return draw_planted(config,
                      make_planted_basis(config.dim, config.rank, basis_seed),
                      draw_seed);
}

EmbeddingMatrix with_index_ids(RowMatrix data, const std::string& prefix) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    ids.push_back(prefix + std::to_string(i));
  }
  return EmbeddingMatrix(std::move(data), std::move(ids));
}

std::vector<SentenceRecord> make_text_corpus(const TextCorpusConfig& config,
                                             std::uint64_t seed) {
  if (config.lexicon.empty() || config.vocabulary < 1 ||
      config.min_tokens < 3 || config.max_tokens < config.min_tokens) {
    throw ValidationError("bad text corpus configuration");
  }
  Rng rng(seed);
  static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m",
                                            "n", "p", "r", "s", "t", "v", "w"};
  static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};
  std::unordered_set<std::string> taken(config.lexicon.begin(),
                                        config.lexicon.end());
  std::vector<std::string> vocabulary;
  while (static_cast<int>(vocabulary.size()) < config.vocabulary) {
    std::string word;
    const std::size_t syllables = 2 + rng.uniform_index(2);
    for (std::size_t s = 0; s < syllables; ++s) {
      word += kOnsets[rng.uniform_index(std::size(kOnsets))];
      word += kVowels[rng.uniform_index(std::size(kVowels))];
    }
    if (taken.insert(word).second) vocabulary.push_back(word);
  }

  auto sentence = [&](int hits) {
    const auto span = static_cast<std::size_t>(config.max_tokens -
                                               config.min_tokens + 1);
    const std::size_t length =
        static_cast<std::size_t>(config.min_tokens) + rng.uniform_index(span);
    std::vector<std::string> tokens(length);
    for (auto& token : tokens) {
      token = vocabulary[rng.uniform_index(vocabulary.size())];
    }
    for (int h = 0; h < hits; ++h) {
      tokens[rng.uniform_index(length)] =
          config.lexicon[rng.uniform_index(config.lexicon.size())];
    }
    std::string text;
    for (const auto& token : tokens) {
      if (!text.empty()) text += ' ';
      text += token;
    }
    return text;
  };

  std::vector<SentenceRecord> records;
  int toxic_left = config.n_toxic;
  int nontoxic_left = config.n_nontoxic;
  char id[32];
  while (toxic_left > 0 || nontoxic_left > 0) {
    const bool toxic =
        nontoxic_left == 0 ||
        (toxic_left > 0 &&
         rng.uniform_index(static_cast<std::size_t>(toxic_left + nontoxic_left)) <
             static_cast<std::size_t>(toxic_left));
    SentenceRecord record;
    record.source = Source::kCivil;
    if (toxic) {
      std::snprintf(id, sizeof(id), "t%06d", config.n_toxic - toxic_left);
      record.text = sentence(1 + static_cast<int>(rng.uniform_index(2)));
      record.score = 0.76 + 0.24 * (1.0 - rng.uniform01());
      --toxic_left;
    } else {
      std::snprintf(id, sizeof(id), "n%06d", config.n_nontoxic - nontoxic_left);
      record.text = sentence(0);
      record.score = 0.0;
      --nontoxic_left;
    }
    record.id = id;
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace scrub
