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

#ifndef SCRUB_SYNTHETIC_H_
#define SCRUB_SYNTHETIC_H_

// Generators with a known ground truth, for tests, benchmarks and demos.

#include <cstdint>
#include <string>
#include <vector>

#include "scrub/corpus.h"
#include "scrub/encoding.h"

namespace scrub {

// Non-toxic rows are random unit vectors. A toxic row is its own unit base
// vector plus an offset of norm offset_norm inside a hidden orthonormal
// rank-r subspace, plus isotropic noise of norm noise_scale. Offset
// directions scatter around the subspace's all-ones direction with
// per-coordinate spread offset_spread, so each planted axis carries
// variance while the classes stay linearly separable.
struct PlantedConfig {
  Eigen::Index dim = 64;
  int n_per_class = 2000;
  int rank = 3;
  double offset_norm = 3.0;
  double noise_scale = 1.0;
  double offset_spread = 0.5;
};

struct PlantedData {
  RowMatrix planted_basis;  // rank x dim
  RowMatrix toxic;          // n x dim
  RowMatrix toxic_base;     // toxic minus offset and noise
  RowMatrix nontoxic;       // independent n x dim draws
};

RowMatrix make_planted_basis(Eigen::Index dim, int rank, std::uint64_t seed);

// Draws a data set around a given basis.
PlantedData draw_planted(const PlantedConfig& config,
                         const RowMatrix& planted_basis, std::uint64_t seed);

// Fresh basis plus one draw.
PlantedData make_planted(const PlantedConfig& config, std::uint64_t seed);

// Wraps a matrix with ids prefix0, prefix1, ...
EmbeddingMatrix with_index_ids(RowMatrix data, const std::string& prefix);

// Text corpus whose toxic sentences contain one or two lexicon words and
// whose non-toxic sentences contain none. Scores follow the Civil Comments
// convention: toxic in (0.76, 1], non-toxic exactly 0.
struct TextCorpusConfig {
  int n_toxic = 1500;
  int n_nontoxic = 1500;
  int vocabulary = 400;
  int min_tokens = 6;
  int max_tokens = 12;
  std::vector<std::string> lexicon = {"zork", "grue", "frotz"};
};

std::vector<SentenceRecord> make_text_corpus(const TextCorpusConfig& config,
                                             std::uint64_t seed);

}  // namespace scrub

#endif  // SCRUB_SYNTHETIC_H_
