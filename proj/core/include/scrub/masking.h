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

#ifndef SCRUB_MASKING_H_
#define SCRUB_MASKING_H_

// Parallel corpus construction by greedy, scorer-guided token masking.

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scrub/corpus.h"
#include "scrub/encoding.h"
#include "scrub/scoring.h"

namespace scrub {

struct MaskingConfig {
  double threshold = 0.25;
  // Cosine floor between the original and the current masked embedding.
  double sim_floor = 0.8;
  double max_mask_fraction = 0.5;
  std::shared_ptr<const ToxicityScorer> scorer;
  std::shared_ptr<const Encoder> encoder;
  // Worker threads for build_parallel_corpus.
  unsigned threads = 1;

  void validate() const;
};

struct MaskedPair {
  std::string original_id;
  std::string original_text;
  std::string masked_text;
  // 0-based token indices, in masking order.
  std::vector<std::size_t> masked_indices;
  // Probability before any masking, then after each step.
  std::vector<double> prob_trace;
  double final_similarity = 1.0;

  bool operator==(const MaskedPair&) const = default;
};

enum class DiscardReason { kBudget, kSimilarity };
std::string_view to_string(DiscardReason reason);

struct Discarded {
  DiscardReason reason;
  // State when masking stopped.
  MaskedPair state;

  bool operator==(const Discarded&) const = default;
};

using MaskOutcome = std::variant<MaskedPair, Discarded>;

// Masks the token whose removal lowers the score the most, one token per
// step, until the probability drops below the threshold. After each step
// the cosine between the original and masked embeddings is checked against
// sim_floor. A step that would push the masked fraction past
// max_mask_fraction discards the sentence instead. Ties go to the lowest
// index. Backend failures propagate as exceptions.
MaskOutcome greedy_mask(const SentenceRecord& sentence,
                        const MaskingConfig& config);

struct MaskingStats {
  std::size_t attempted = 0;
  std::size_t accepted = 0;
  std::size_t discarded_budget = 0;
  std::size_t discarded_similarity = 0;
  // Over every attempted sentence's last similarity, discards included.
  double mean_similarity = 0.0;
  // Population standard deviation.
  double std_similarity = 0.0;
};

struct ParallelCorpus {
  std::vector<MaskedPair> pairs;
  std::vector<Discarded> discards;
  MaskingStats stats;
};

// Runs greedy_mask over every record, possibly on several threads; output
// keeps input order. Throws ValidationError when nothing is accepted.
ParallelCorpus build_parallel_corpus(std::span<const SentenceRecord> toxic,
                                     const MaskingConfig& config);

// {"id", "toxic", "masked", "masked_indices", "prob_trace", "similarity"}
// per accepted pair, and the same plus "reason" per discard.
void write_parallel_corpus(const std::filesystem::path& pairs_path,
                           const std::filesystem::path& discards_path,
                           const ParallelCorpus& corpus);
std::vector<MaskedPair> read_parallel_corpus(const std::filesystem::path& path);

}  // namespace scrub

#endif  // SCRUB_MASKING_H_
