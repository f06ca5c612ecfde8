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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "generators.h"
#include "oracle.h"
#include "scrub/encoding.h"
#include "scrub/error.h"
#include "scrub/scoring.h"
#include "scrub/tokenize.h"

namespace scrub {
namespace {

namespace fs = std::filesystem;

TEST(LexiconScorer, ClosedFormValues) {
  LexiconScorer scorer({"zork", "grue"});
  EXPECT_DOUBLE_EQ(scorer.score("a calm sentence"), 0.05);
  EXPECT_DOUBLE_EQ(scorer.score("a zork sentence"), 0.525);
  EXPECT_DOUBLE_EQ(scorer.score("zork and grue"), 0.7625);
  for (int h = 0; h < 6; ++h) {
    std::string text = "start";
    for (int i = 0; i < h; ++i) text += " zork";
    EXPECT_NEAR(scorer.score(text), testing::lexicon_probability(h), 1e-15);
  }
}

TEST(LexiconScorer, WholeTokensCaseInsensitive) {
  LexiconScorer scorer({"Zork"});
  EXPECT_EQ(scorer.hits("ZORK zork, zOrK!"), 3);
  EXPECT_EQ(scorer.hits("zorky grue-zork [MASK]"), 0);
  EXPECT_TRUE(scorer.contains("zORK"));
  EXPECT_FALSE(scorer.contains("[MASK]"));
}

TEST(LexiconScorer, ValidatesInputs) {
  EXPECT_THROW(LexiconScorer({"x"}, 1.0), ValidationError);
  EXPECT_THROW(LexiconScorer({"x"}, -0.1), ValidationError);
  LexiconScorer scorer({"x"});
  EXPECT_THROW(scorer.score_batch({}), ValidationError);
}

TEST(LexiconScorer, BatchEqualsSingletons) {
  LexiconScorer scorer({"zork", "grue", "frotz"});
  const std::vector<std::string> texts = {"zork", "", "a grue b frotz",
                                          "[MASK] zork zork", "plain"};
  const auto batch = scorer.score_batch(texts);
  ASSERT_EQ(batch.size(), texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    EXPECT_EQ(batch[i], scorer.score(texts[i]));
  }
}

TEST(LexiconScorer, MaskingIsMonotone) {
  const std::vector<std::string> vocab = {"zork", "grue", "tea", "cup", "a",
                                          ",", "blue"};
  LexiconScorer scorer({"zork", "grue"});
  testing::Gen gen(17);
  for (int c = 0; c < testing::kPropertyCases; ++c) {
    std::vector<std::string> tokens;
    const int n = gen.integer(1, 10);
    for (int i = 0; i < n; ++i) tokens.push_back(gen.word(vocab));
    const double before = scorer.score(detokenize(tokens));
    for (std::size_t j = 1; j <= tokens.size(); ++j) {
      const double after = scorer.score(detokenize(mask_at(tokens, j)));
      if (scorer.contains(tokens[j - 1])) {
        EXPECT_LT(after, before);
      } else {
        EXPECT_EQ(after, before);
      }
    }
  }
}

TEST(LoadLexicon, SkipsBlanksAndComments) {
  const fs::path path = fs::temp_directory_path() / "scrub_lexicon.txt";
  {
    std::ofstream out(path);
    out << "# words\nzork\n\n  grue  \n#frotz\n";
  }
  EXPECT_EQ(load_lexicon(path), (std::vector<std::string>{"zork", "grue"}));
  fs::remove(path);
  EXPECT_THROW(load_lexicon(path), ValidationError);
}

TEST(LinearProbe, ZeroWeightsGiveOneHalf) {
  LinearProbe probe;
  probe.weights = Eigen::VectorXd::Zero(16);
  auto encoder = std::make_shared<ToyEncoder>(16, 1);
  LinearScorer scorer(probe, encoder);
  const std::vector<std::string> texts = {"anything", "", "at all"};
  for (double p : scorer.score_batch(texts)) {
    EXPECT_EQ(p, 0.5);
  }
}

struct Clusters {
  RowMatrix x;
  std::vector<int> y;
};

// Two 2-D clusters on either side of the line x0 = 0, at least `margin`
// apart.
Clusters separable_clusters(int per_class, double margin, std::uint64_t seed) {
  testing::Gen gen(seed);
  Clusters c;
  c.x.resize(2 * per_class, 2);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int label = i < per_class ? 1 : 0;
    const double side = label == 1 ? 1.0 : -1.0;
    c.x(i, 0) = side * (margin / 2 + gen.uniform(0.0, 1.0));
    c.x(i, 1) = gen.uniform(-1.0, 1.0);
    c.y.push_back(label);
  }
  return c;
}

// Rosenblatt perceptron; converging proves the data separable.
bool perceptron_separates(const Clusters& c) {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  for (int epoch = 0; epoch < 1000; ++epoch) {
    int mistakes = 0;
    for (Eigen::Index i = 0; i < c.x.rows(); ++i) {
      const Eigen::Vector3d xi(c.x(i, 0), c.x(i, 1), 1.0);
      const double target = c.y[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
      if (target * w.dot(xi) <= 0) {
        w += target * xi;
        ++mistakes;
      }
    }
    if (mistakes == 0) return true;
  }
  return false;
}

double accuracy(const LinearProbe& probe, const Clusters& c) {
  const auto pred = probe.predict(c.x);
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == c.y[i];
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

TEST(TrainLinearProbe, SeparableClusters) {
  const Clusters c = separable_clusters(100, 1.0, 5);
  ASSERT_TRUE(perceptron_separates(c));
  const TrainedProbe trained = train_linear_probe(c.x, c.y);
  EXPECT_GE(accuracy(trained.probe, c), 0.99);
}

TEST(TrainLinearProbe, LossNeverIncreases) {
  const Clusters c = separable_clusters(100, 1.0, 6);
  const TrainedProbe trained = train_linear_probe(c.x, c.y);
  ASSERT_EQ(trained.loss_history.size(), 501u);
  EXPECT_NEAR(trained.loss_history.front(), std::log(2.0), 1e-14);
  for (std::size_t i = 1; i < trained.loss_history.size(); ++i) {
    EXPECT_LE(trained.loss_history[i], trained.loss_history[i - 1] + 1e-9);
  }
  EXPECT_NEAR(trained.loss_history.back(),
              testing::oracle_log_loss(c.x, c.y, trained.probe.weights,
                                       trained.probe.bias),
              1e-12);
}

TEST(TrainLinearProbe, BitIdenticalReruns) {
  const Clusters c = separable_clusters(50, 1.0, 8);
  const auto a = train_linear_probe(c.x, c.y);
  const auto b = train_linear_probe(c.x, c.y);
  EXPECT_EQ(a.probe.weights, b.probe.weights);
  EXPECT_EQ(a.probe.bias, b.probe.bias);
}

TEST(TrainLinearProbe, PermutationInvariant) {
  testing::Gen gen(9);
  for (int c = 0; c < 8; ++c) {
    const RowMatrix x = gen.gaussian(40, 5);
    std::vector<int> y(40);
    for (int i = 0; i < 40; ++i) y[i] = i % 2;
    std::vector<int> order(40);
    std::iota(order.begin(), order.end(), 0);
    for (int i = 39; i > 0; --i) std::swap(order[i], order[gen.integer(0, i)]);
    RowMatrix xp(40, 5);
    std::vector<int> yp(40);
    for (int i = 0; i < 40; ++i) {
      xp.row(i) = x.row(order[i]);
      yp[i] = y[order[i]];
    }
    ProbeTraining opts;
    opts.epochs = 100;
    const auto a = train_linear_probe(x, y, opts).probe;
    const auto b = train_linear_probe(xp, yp, opts).probe;
    const RowMatrix probe_points = gen.gaussian(10, 5);
    const Eigen::VectorXd pa = a.probabilities(probe_points);
    const Eigen::VectorXd pb = b.probabilities(probe_points);
    EXPECT_LT((pa - pb).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TrainLinearProbe, RejectsDegenerateInput) {
  RowMatrix x = RowMatrix::Ones(4, 2);
  EXPECT_THROW(train_linear_probe(x, std::vector<int>{1, 1, 1, 1}),
               ValidationError);
  EXPECT_THROW(train_linear_probe(x, std::vector<int>{0, 1, 0}),
               ValidationError);
  EXPECT_THROW(train_linear_probe(x, std::vector<int>{0, 1, 2, 0}),
               ValidationError);
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train_linear_probe(x, std::vector<int>{0, 1, 0, 1}),
               ValidationError);
}

TEST(Probe, SaveLoadRoundTrip) {
  LinearProbe probe;
  probe.weights = Eigen::VectorXd::LinSpaced(7, -1.0 / 3.0, 2.0 / 7.0);
  probe.bias = 0.1 + 0.2;
  const fs::path path = fs::temp_directory_path() / "scrub_probe.json";
  save_probe(path, probe);
  const LinearProbe back = load_probe(path);
  EXPECT_EQ(back.weights, probe.weights);
  EXPECT_EQ(back.bias, probe.bias);
  fs::remove(path);
}

TEST(Probe, PredictUsesStrictHalf) {
  LinearProbe probe;
  probe.weights = Eigen::VectorXd::Ones(1);
  RowMatrix x(3, 1);
  x << -1.0, 0.0, 1e-9;
  EXPECT_EQ(probe.predict(x), (std::vector<int>{0, 0, 1}));
}

TEST(LinearScorer, MatchesProbeOnEncodedText) {
  auto encoder = std::make_shared<ToyEncoder>(8, 3);
  const std::vector<std::string> texts = {"zork here", "calm words",
                                          "zork zork", "calm zork"};
  const EmbeddingMatrix emb =
      encoder->encode_batch(texts, testing::make_ids(4, "r"));
  const std::vector<int> labels = {1, 0, 1, 0};
  auto scorer = train_linear_scorer(emb, labels, encoder);
  const auto probs = scorer->score_batch(texts);
  const Eigen::VectorXd direct = scorer->probe().probabilities(emb.data());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    EXPECT_EQ(probs[i], direct(static_cast<Eigen::Index>(i)));
    EXPECT_GE(probs[i], 0.0);
    EXPECT_LE(probs[i], 1.0);
  }
  LinearProbe wrong;
  wrong.weights = Eigen::VectorXd::Zero(5);
  EXPECT_THROW(LinearScorer(wrong, encoder), ValidationError);
}

}  // namespace
}  // namespace scrub
