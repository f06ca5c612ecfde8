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

#ifndef SCRUB_SCORING_H_
#define SCRUB_SCORING_H_

// Toxicity scorers used to guide masking and to filter corpora.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "scrub/encoding.h"
#include "scrub/remote.h"

namespace scrub {

class ToxicityScorer {
 public:
  virtual ~ToxicityScorer() = default;

  // One probability in [0, 1] per text, in order. Throws ValidationError on
  // an empty batch.
  virtual std::vector<double> score_batch(
      std::span<const std::string> texts) const = 0;

  // JSON declaration recorded in run manifests.
  virtual std::string describe() const = 0;

  double score(const std::string& text) const;
};

// p = 1 - 2^-h * (1 - base_rate), h = number of lexicon tokens in the text.
// Matching is ASCII case-insensitive on whole tokens.
class LexiconScorer final : public ToxicityScorer {
 public:
  explicit LexiconScorer(std::vector<std::string> lexicon,
                         double base_rate = 0.05);

  std::vector<double> score_batch(
      std::span<const std::string> texts) const override;
  std::string describe() const override;

  int hits(const std::string& text) const;
  bool contains(const std::string& token) const;
  double base_rate() const { return base_rate_; }

 private:
  std::unordered_set<std::string> lexicon_;
  double base_rate_;
};

// One newline-separated token per line; blank lines and '#' comments skipped.
std::vector<std::string> load_lexicon(const std::filesystem::path& path);

// Logistic regression head over frozen embeddings.
struct LinearProbe {
  Eigen::VectorXd weights;
  double bias = 0.0;

  Eigen::VectorXd probabilities(const RowMatrix& x) const;
  // Probability above 0.5 (a positive logit) counts as toxic.
  std::vector<int> predict(const RowMatrix& x) const;
};

struct ProbeTraining {
  double learning_rate = 0.01;
  int epochs = 500;
  std::uint64_t seed = 42;
};

struct TrainedProbe {
  LinearProbe probe;
  // Mean log loss before each update, then after the final one
  // (epochs + 1 entries).
  std::vector<double> loss_history;
};

// Full-batch gradient descent on the mean logistic loss from zero weights.
// Labels are 0/1 and both classes must be present. The full-batch update
// consumes no randomness; the seed is accepted for provenance only.
TrainedProbe train_linear_probe(const RowMatrix& embeddings,
                                std::span<const int> labels,
                                const ProbeTraining& options = {});

void save_probe(const std::filesystem::path& path, const LinearProbe& probe);
LinearProbe load_probe(const std::filesystem::path& path);

// Encodes texts with `encoder` and applies a trained probe.
class LinearScorer final : public ToxicityScorer {
 public:
  LinearScorer(LinearProbe probe, std::shared_ptr<const Encoder> encoder);

  std::vector<double> score_batch(
      std::span<const std::string> texts) const override;
  std::string describe() const override;

  const LinearProbe& probe() const { return probe_; }

 private:
  LinearProbe probe_;
  std::shared_ptr<const Encoder> encoder_;
};

// Convenience for train_linear_probe followed by wrapping.
std::shared_ptr<LinearScorer> train_linear_scorer(
    const EmbeddingMatrix& embeddings, std::span<const int> labels,
    std::shared_ptr<const Encoder> encoder, const ProbeTraining& options = {});

// POST /score client. Probabilities outside [0, 1], non-finite values and
// length mismatches are protocol errors, never clamped.
class RemoteScorer final : public ToxicityScorer {
 public:
  explicit RemoteScorer(RemoteOptions options);

  std::vector<double> score_batch(
      std::span<const std::string> texts) const override;
  std::string describe() const override;

 private:
  RemoteOptions options_;
};

}  // namespace scrub

#endif  // SCRUB_SCORING_H_
