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

#include "scrub/masking.h"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "scrub/error.h"
#include "scrub/tokenize.h"

namespace scrub {

using json = nlohmann::json;

void MaskingConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ValidationError("masking threshold must lie in (0, 1)");
  }
  if (!(max_mask_fraction > 0.0 && max_mask_fraction <= 1.0)) {
    throw ValidationError("max mask fraction must lie in (0, 1]");
  }
  if (!(sim_floor >= -1.0 && sim_floor <= 1.0)) {
    throw ValidationError("similarity floor must lie in [-1, 1]");
  }
  if (!scorer) throw ValidationError("masking needs a toxicity scorer");
  if (!encoder) throw ValidationError("masking needs an encoder");
}

std::string_view to_string(DiscardReason reason) {
  return reason == DiscardReason::kBudget ? "budget" : "similarity";
}

MaskOutcome greedy_mask(const SentenceRecord& sentence,
                        const MaskingConfig& config) {
  std::vector<std::string> tokens = tokenize(sentence.text);
  if (tokens.empty()) {
    throw ValidationError("sentence \"" + sentence.id + "\" has no tokens");
  }
  const std::size_t n = tokens.size();

  MaskedPair pair;
  pair.original_id = sentence.id;
  pair.original_text = sentence.text;
  pair.masked_text = sentence.text;
  pair.prob_trace.push_back(config.scorer->score(sentence.text));
  if (pair.prob_trace.back() < config.threshold) return pair;

  const Eigen::VectorXd original = config.encoder->encode_one(sentence.text);
  std::vector<std::string> candidates;
  std::vector<std::size_t> positions;
  while (true) {
    const double next_fraction =
        static_cast<double>(pair.masked_indices.size() + 1) /
        static_cast<double>(n);
    positions.clear();
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (tokens[j] == kMaskToken) continue;
      positions.push_back(j);
      candidates.push_back(detokenize(mask_at(tokens, j + 1)));
    }
    if (next_fraction > config.max_mask_fraction || positions.empty()) {
      return Discarded{DiscardReason::kBudget, std::move(pair)};
    }

    const std::vector<double> probs = config.scorer->score_batch(candidates);
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.size(); ++c) {
      if (probs[c] < probs[best]) best = c;
    }
    tokens[positions[best]] = std::string(kMaskToken);
    pair.masked_indices.push_back(positions[best]);
    pair.prob_trace.push_back(probs[best]);
    pair.masked_text = std::move(candidates[best]);
    pair.final_similarity = cosine_similarity(
        original, config.encoder->encode_one(pair.masked_text));

    if (pair.final_similarity < config.sim_floor) {
      return Discarded{DiscardReason::kSimilarity, std::move(pair)};
    }
    if (pair.prob_trace.back() < config.threshold) return pair;
  }
}

ParallelCorpus build_parallel_corpus(std::span<const SentenceRecord> toxic,
                                     const MaskingConfig& config) {
  config.validate();
  if (toxic.empty()) {
    throw ValidationError("build_parallel_corpus: no toxic records");
  }
  std::vector<std::optional<MaskOutcome>> outcomes(toxic.size());
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, config.threads), toxic.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < toxic.size(); ++i) {
      outcomes[i] = greedy_mask(toxic[i], config);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    std::exception_ptr failure;
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t i = next++; i < toxic.size(); i = next++) {
          try {
            outcomes[i] = greedy_mask(toxic[i], config);
          } catch (...) {
            std::lock_guard lock(mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  ParallelCorpus corpus;
  MaskingStats& stats = corpus.stats;
  double sum = 0.0;
  std::vector<double> similarities;
  similarities.reserve(outcomes.size());
  for (auto& outcome : outcomes) {
    ++stats.attempted;
    if (auto* pair = std::get_if<MaskedPair>(&*outcome)) {
      ++stats.accepted;
      similarities.push_back(pair->final_similarity);
      corpus.pairs.push_back(std::move(*pair));
    } else {
      auto& discard = std::get<Discarded>(*outcome);
      ++(discard.reason == DiscardReason::kBudget ? stats.discarded_budget
                                                  : stats.discarded_similarity);
      similarities.push_back(discard.state.final_similarity);
      corpus.discards.push_back(std::move(discard));
    }
    sum += similarities.back();
  }
  stats.mean_similarity = sum / static_cast<double>(similarities.size());
  double squares = 0.0;
  for (double s : similarities) {
    squares += (s - stats.mean_similarity) * (s - stats.mean_similarity);
  }
  stats.std_similarity =
      std::sqrt(squares / static_cast<double>(similarities.size()));
  if (corpus.pairs.empty()) {
    throw ValidationError("masking accepted no sentences (" +
                          std::to_string(stats.discarded_budget) +
                          " over budget, " +
                          std::to_string(stats.discarded_similarity) +
                          " below the similarity floor)");
  }
  return corpus;
}

namespace {

nlohmann::ordered_json pair_json(const MaskedPair& pair) {
  nlohmann::ordered_json row;
  row["id"] = pair.original_id;
  row["toxic"] = pair.original_text;
  row["masked"] = pair.masked_text;
  row["masked_indices"] = pair.masked_indices;
  row["prob_trace"] = pair.prob_trace;
  row["similarity"] = pair.final_similarity;
  return row;
}

}  // namespace

void write_parallel_corpus(const std::filesystem::path& pairs_path,
                           const std::filesystem::path& discards_path,
                           const ParallelCorpus& corpus) {
  std::ofstream pairs(pairs_path, std::ios::binary | std::ios::trunc);
  std::ofstream discards(discards_path, std::ios::binary | std::ios::trunc);
  if (!pairs || !discards) {
    throw ValidationError("cannot write parallel corpus to " +
                          pairs_path.string());
  }
  for (const auto& pair : corpus.pairs) pairs << pair_json(pair).dump() << '\n';
  for (const auto& discard : corpus.discards) {
    auto row = pair_json(discard.state);
    row["reason"] = to_string(discard.reason);
    discards << row.dump() << '\n';
  }
}

std::vector<MaskedPair> read_parallel_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open parallel corpus " + path.string());
  std::vector<MaskedPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json row = json::parse(line);
      MaskedPair pair;
      pair.original_id = row.at("id").get<std::string>();
      pair.original_text = row.at("toxic").get<std::string>();
      pair.masked_text = row.at("masked").get<std::string>();
      pair.masked_indices =
          row.at("masked_indices").get<std::vector<std::size_t>>();
      pair.prob_trace = row.at("prob_trace").get<std::vector<double>>();
      pair.final_similarity = row.at("similarity").get<double>();
      pairs.push_back(std::move(pair));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ": line " +
                            std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace scrub
