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

#include "scrub/scoring.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "scrub/error.h"
#include "scrub/tokenize.h"

namespace scrub {

using json = nlohmann::json;

namespace {

std::string ascii_lower(std::string s) {
  for (auto& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

void require_texts(std::span<const std::string> texts) {
  if (texts.empty()) throw ValidationError("score_batch: empty text list");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) - y z without overflow.
double log_loss(double z, int y) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
}

}  // namespace

double ToxicityScorer::score(const std::string& text) const {
  return score_batch(std::span<const std::string>(&text, 1)).front();
}

LexiconScorer::LexiconScorer(std::vector<std::string> lexicon,
                             double base_rate)
    : base_rate_(base_rate) {
  if (!(base_rate >= 0.0 && base_rate < 1.0)) {
    throw ValidationError("lexicon base rate must lie in [0, 1)");
  }
  for (auto& token : lexicon) lexicon_.insert(ascii_lower(std::move(token)));
}

bool LexiconScorer::contains(const std::string& token) const {
  return token != kMaskToken && lexicon_.count(ascii_lower(token)) > 0;
}

int LexiconScorer::hits(const std::string& text) const {
  int h = 0;
  for (const auto& token : tokenize(text)) h += contains(token) ? 1 : 0;
  return h;
}

std::vector<double> LexiconScorer::score_batch(
    std::span<const std::string> texts) const {
  require_texts(texts);
  std::vector<double> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    // Same value as 1 - 2^-h (1 - base_rate), but exact at h = 0.
    out.push_back(base_rate_ +
                  (1.0 - base_rate_) * (1.0 - std::ldexp(1.0, -hits(text))));
  }
  return out;
}

std::string LexiconScorer::describe() const {
  std::vector<std::string> words(lexicon_.begin(), lexicon_.end());
  std::sort(words.begin(), words.end());
  return json{{"kind", "lexicon"}, {"base_rate", base_rate_},
              {"lexicon", words}}
      .dump();
}

std::vector<std::string> load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open lexicon " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#') continue;
    const auto end = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(begin, end - begin + 1));
  }
  if (words.empty()) throw ValidationError(path.string() + ": empty lexicon");
  return words;
}

Eigen::VectorXd LinearProbe::probabilities(const RowMatrix& x) const {
  if (x.cols() != weights.size()) {
    throw ValidationError("probe dim " + std::to_string(weights.size()) +
                          " does not match embedding dim " +
                          std::to_string(x.cols()));
  }
  Eigen::VectorXd z = x * weights;
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = sigmoid(z[i] + bias);
  return z;
}

std::vector<int> LinearProbe::predict(const RowMatrix& x) const {
  const Eigen::VectorXd p = probabilities(x);
  std::vector<int> out(static_cast<std::size_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out[static_cast<std::size_t>(i)] = p[i] > 0.5 ? 1 : 0;
  }
  return out;
}

TrainedProbe train_linear_probe(const RowMatrix& embeddings,
                                std::span<const int> labels,
                                const ProbeTraining& options) {
  const Eigen::Index n = embeddings.rows();
  if (n != static_cast<Eigen::Index>(labels.size())) {
    throw ValidationError("probe training: " + std::to_string(n) +
                          " rows but " + std::to_string(labels.size()) +
                          " labels");
  }
  if (!embeddings.allFinite()) {
    throw ValidationError("probe training: embeddings contain NaN or inf");
  }
  if (options.epochs < 0 || !(options.learning_rate > 0.0)) {
    throw ValidationError("probe training: bad learning rate or epochs");
  }
  Eigen::VectorXd y(n);
  bool has_zero = false;
  bool has_one = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label != 0 && label != 1) {
      throw ValidationError("probe training: labels must be 0 or 1");
    }
    has_zero |= label == 0;
    has_one |= label == 1;
    y[i] = label;
  }
  if (!has_zero || !has_one) {
    throw ValidationError("probe training: both classes must be present");
  }

  TrainedProbe result;
  LinearProbe& probe = result.probe;
  probe.weights = Eigen::VectorXd::Zero(embeddings.cols());
  probe.bias = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::VectorXd residual(n);
  auto loss_and_residual = [&] {
    const Eigen::VectorXd z =
        (embeddings * probe.weights).array() + probe.bias;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      loss += log_loss(z[i], static_cast<int>(y[i]));
      residual[i] = sigmoid(z[i]) - y[i];
    }
    return loss * inv_n;
  };
  result.loss_history.reserve(static_cast<std::size_t>(options.epochs) + 1);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    result.loss_history.push_back(loss_and_residual());
    probe.weights -= options.learning_rate * inv_n *
                     (embeddings.transpose() * residual);
    probe.bias -= options.learning_rate * inv_n * residual.sum();
  }
  result.loss_history.push_back(loss_and_residual());
  return result;
}

void save_probe(const std::filesystem::path& path, const LinearProbe& probe) {
  nlohmann::ordered_json out;
  out["dim"] = probe.weights.size();
  out["bias"] = probe.bias;
  out["weights"] = std::vector<double>(probe.weights.begin(),
                                       probe.weights.end());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw ValidationError("cannot write " + path.string());
  file << out.dump(1) << '\n';
}

LinearProbe load_probe(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw ValidationError("cannot open probe " + path.string());
  json in;
  try {
    in = json::parse(file);
    const auto weights = in.at("weights").get<std::vector<double>>();
    LinearProbe probe;
    probe.weights = Eigen::Map<const Eigen::VectorXd>(
        weights.data(), static_cast<Eigen::Index>(weights.size()));
    probe.bias = in.at("bias").get<double>();
    if (probe.weights.size() == 0 || !probe.weights.allFinite() ||
        !std::isfinite(probe.bias)) {
      throw ValidationError("bad weights");
    }
    return probe;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": malformed probe: " + e.what());
  }
}

LinearScorer::LinearScorer(LinearProbe probe,
                           std::shared_ptr<const Encoder> encoder)
    : probe_(std::move(probe)), encoder_(std::move(encoder)) {
  if (!encoder_) throw ValidationError("linear scorer needs an encoder");
  if (encoder_->dim() != probe_.weights.size()) {
    throw ValidationError("linear scorer: probe dim " +
                          std::to_string(probe_.weights.size()) +
                          " differs from encoder dim " +
                          std::to_string(encoder_->dim()));
  }
}

std::vector<double> LinearScorer::score_batch(
    std::span<const std::string> texts) const {
  require_texts(texts);
  const Eigen::VectorXd p = probe_.probabilities(encoder_->encode(texts));
  return std::vector<double>(p.begin(), p.end());
}

std::string LinearScorer::describe() const {
  return json{{"kind", "linear"},
              {"dim", probe_.weights.size()},
              {"encoder", json::parse(encoder_->describe())}}
      .dump();
}

std::shared_ptr<LinearScorer> train_linear_scorer(
    const EmbeddingMatrix& embeddings, std::span<const int> labels,
    std::shared_ptr<const Encoder> encoder, const ProbeTraining& options) {
  auto trained = train_linear_probe(embeddings.data(), labels, options);
  return std::make_shared<LinearScorer>(std::move(trained.probe),
                                        std::move(encoder));
}

RemoteScorer::RemoteScorer(RemoteOptions options)
    : options_(std::move(options)) {}

std::vector<double> RemoteScorer::score_batch(
    std::span<const std::string> texts) const {
  require_texts(texts);
  std::vector<double> out(texts.size());
  for_each_batch(texts.size(), options_, [&](std::size_t begin,
                                             std::size_t end) {
    json request{{"texts", json::array()}};
    for (std::size_t i = begin; i < end; ++i) {
      request["texts"].push_back(texts[i]);
    }
    std::vector<double> probs;
    post_with_retries(
        options_, "/score", request.dump(), [&](const std::string& body) {
          json reply;
          try {
            reply = json::parse(body);
          } catch (const json::parse_error&) {
            throw ProtocolError("/score returned invalid JSON");
          }
          if (!reply.is_object() || !reply.contains("probs") ||
              !reply["probs"].is_array()) {
            throw ProtocolError("/score response lacks a probs array");
          }
          const auto& values = reply["probs"];
          if (values.size() != end - begin) {
            throw ProtocolError("/score returned " +
                                std::to_string(values.size()) +
                                " probabilities for " +
                                std::to_string(end - begin) + " texts");
          }
          probs.clear();
          for (const auto& v : values) {
            if (!v.is_number()) {
              throw ProtocolError("/score returned a non-number");
            }
            const double p = v.get<double>();
            if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
              throw ProtocolError("/score returned probability " +
                                  std::to_string(p) + " outside [0, 1]");
            }
            probs.push_back(p);
          }
        });
    std::copy(probs.begin(), probs.end(),
              out.begin() + static_cast<std::ptrdiff_t>(begin));
  });
  return out;
}

std::string RemoteScorer::describe() const {
  return json{{"kind", "remote"}, {"endpoint", options_.endpoint}}.dump();
}

}  // namespace scrub
