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
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "fake_service.h"
#include "scrub/encoding.h"
#include "scrub/error.h"
#include "scrub/remote.h"
#include "scrub/scoring.h"

namespace scrub {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::FakeService;

std::string fixture(const std::string& name) {
  std::ifstream in(fs::path(SCRUB_FIXTURE_DIR) / "protocol" / name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> request_texts(const std::string& name) {
  return json::parse(fixture(name))["texts"].get<std::vector<std::string>>();
}

RemoteOptions options_for(const FakeService& service) {
  RemoteOptions o;
  o.endpoint = service.endpoint();
  o.timeout_seconds = 5.0;
  o.retries = 0;
  return o;
}

// Serves a canned body on `path` and records the request bodies it saw.
struct Canned {
  std::mutex mutex;
  std::vector<std::string> requests;

  void serve(httplib::Server& s, const std::string& path,
             const std::string& body) {
    s.Post(path, [this, body](const httplib::Request& req,
                              httplib::Response& res) {
      {
        std::lock_guard lock(mutex);
        requests.push_back(req.body);
      }
      res.set_content(body, "application/json");
    });
  }
};

template <typename Fn>
std::string backend_error_of(Fn&& fn) {
  try {
    fn();
  } catch (const BackendError& e) {
    return e.what();
  }
  return "";
}

TEST(Health, ParsesDeclaredMetadata) {
  FakeService service([](httplib::Server& s) {
    s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(fixture("health_response.json"), "application/json");
    });
  });
  const HealthInfo info = fetch_health(options_for(service));
  EXPECT_EQ(info.dim, 4);
  EXPECT_EQ(info.encoder, "example-encoder");
  EXPECT_EQ(info.classifier, "example-classifier");
  EXPECT_EQ(info.pooling, "mean");
}

TEST(Health, MissingDimIsProtocolError) {
  FakeService service([](httplib::Server& s) {
    s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(fixture("health_response_no_dim.json"),
                      "application/json");
    });
  });
  EXPECT_THROW(RemoteEncoder(options_for(service), 0), BackendError);
}

TEST(RemoteEncoder, GoldenExchange) {
  Canned canned;
  FakeService service([&](httplib::Server& s) {
    canned.serve(s, "/encode", fixture("encode_response.json"));
    s.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(fixture("health_response.json"), "application/json");
    });
  });
  RemoteEncoder encoder(options_for(service), 0);
  EXPECT_EQ(encoder.dim(), 4);
  const auto texts = request_texts("encode_request.json");
  const RowMatrix m = encoder.encode(texts);
  ASSERT_EQ(canned.requests.size(), 1u);
  EXPECT_EQ(json::parse(canned.requests[0]),
            json::parse(fixture("encode_request.json")));
  const auto expected = json::parse(fixture("encode_response.json"));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      EXPECT_EQ(m(i, j), expected["embeddings"][i][j].get<double>());
    }
  }
  const json described = json::parse(encoder.describe());
  EXPECT_EQ(described["dim"], 4);
}

TEST(RemoteEncoder, NonConformingRepliesAreRejected) {
  for (const char* name :
       {"encode_response_wrong_dim.json", "encode_response_short.json",
        "encode_response_ragged.json"}) {
    Canned canned;
    FakeService service(
        [&](httplib::Server& s) { canned.serve(s, "/encode", fixture(name)); });
    RemoteEncoder encoder(options_for(service), 4);
    const auto texts = request_texts("encode_request.json");
    const std::string msg = backend_error_of([&] { encoder.encode(texts); });
    EXPECT_FALSE(msg.empty()) << name;
    EXPECT_NE(msg.find(service.endpoint()), std::string::npos) << msg;
  }
}

TEST(RemoteScorer, GoldenExchange) {
  Canned canned;
  FakeService service([&](httplib::Server& s) {
    canned.serve(s, "/score", fixture("score_response.json"));
  });
  RemoteScorer scorer(options_for(service));
  const auto probs = scorer.score_batch(request_texts("score_request.json"));
  EXPECT_EQ(probs, (std::vector<double>{0.05, 0.525, 0.7625}));
  ASSERT_EQ(canned.requests.size(), 1u);
  EXPECT_EQ(json::parse(canned.requests[0]),
            json::parse(fixture("score_request.json")));
}

TEST(RemoteScorer, NeverClampsOrPads) {
  for (const char* name :
       {"score_response_out_of_range.json", "score_response_negative.json",
        "score_response_short.json", "score_response_not_number.json",
        "score_response_missing.json"}) {
    Canned canned;
    FakeService service(
        [&](httplib::Server& s) { canned.serve(s, "/score", fixture(name)); });
    RemoteScorer scorer(options_for(service));
    const auto texts = request_texts("score_request.json");
    EXPECT_THROW(scorer.score_batch(texts), BackendError) << name;
  }
}

TEST(RemoteScorer, RetriesThenSucceeds) {
  std::atomic<int> calls{0};
  FakeService service([&](httplib::Server& s) {
    s.Post("/score", [&](const httplib::Request&, httplib::Response& res) {
      if (calls++ < 2) {
        res.status = 503;
        return;
      }
      res.set_content(fixture("score_response.json"), "application/json");
    });
  });
  RemoteOptions o = options_for(service);
  o.retries = 2;
  RemoteScorer scorer(o);
  EXPECT_EQ(scorer.score_batch(request_texts("score_request.json")).size(), 3u);
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteScorer, ClientErrorIsNotRetried) {
  std::atomic<int> calls{0};
  FakeService service([&](httplib::Server& s) {
    s.Post("/score", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 400;
    });
  });
  RemoteOptions o = options_for(service);
  o.retries = 3;
  RemoteScorer scorer(o);
  const std::string msg = backend_error_of(
      [&] { scorer.score_batch(std::vector<std::string>{"x"}); });
  EXPECT_NE(msg.find("HTTP 400"), std::string::npos) << msg;
  EXPECT_EQ(calls.load(), 1);
}

TEST(RemoteScorer, GivesUpAfterRetries) {
  std::atomic<int> calls{0};
  FakeService service([&](httplib::Server& s) {
    s.Post("/score", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 500;
    });
  });
  RemoteOptions o = options_for(service);
  o.retries = 1;
  RemoteScorer scorer(o);
  const std::string msg = backend_error_of(
      [&] { scorer.score_batch(std::vector<std::string>{"x"}); });
  EXPECT_NE(msg.find("after 2 attempts"), std::string::npos) << msg;
  EXPECT_EQ(calls.load(), 2);
}

TEST(RemoteScorer, UnreachableEndpointIsNamed) {
  RemoteOptions o;
  o.endpoint = testing::closed_endpoint();
  o.timeout_seconds = 2.0;
  o.retries = 0;
  RemoteScorer scorer(o);
  const std::string msg = backend_error_of(
      [&] { scorer.score_batch(std::vector<std::string>{"x"}); });
  EXPECT_NE(msg.find(o.endpoint), std::string::npos) << msg;
}

TEST(RemoteScorer, TimesOut) {
  FakeService service([&](httplib::Server& s) {
    s.Post("/score", [&](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(std::chrono::milliseconds(1500));
      res.set_content(R"({"probs":[0.1]})", "application/json");
    });
  });
  RemoteOptions o = options_for(service);
  o.timeout_seconds = 0.2;
  RemoteScorer scorer(o);
  EXPECT_THROW(scorer.score_batch(std::vector<std::string>{"x"}),
               BackendError);
}

TEST(RemoteScorer, BatchesKeepOrderAndBoundConcurrency) {
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
  std::atomic<int> requests{0};
  FakeService service([&](httplib::Server& s) {
    s.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      const int now = ++in_flight;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      const json body = json::parse(req.body);
      json probs = json::array();
      for (const auto& t : body["texts"]) {
        // Texts are "t<k>"; reply k / 100 so order is checkable.
        probs.push_back(std::stoi(t.get<std::string>().substr(1)) / 100.0);
      }
      --in_flight;
      res.set_content(json{{"probs", probs}}.dump(), "application/json");
    });
  });
  RemoteOptions o = options_for(service);
  o.max_batch = 3;
  o.max_in_flight = 2;
  RemoteScorer scorer(o);
  std::vector<std::string> texts;
  for (int k = 0; k < 20; ++k) texts.push_back("t" + std::to_string(k));
  const auto probs = scorer.score_batch(texts);
  ASSERT_EQ(probs.size(), 20u);
  for (int k = 0; k < 20; ++k) EXPECT_DOUBLE_EQ(probs[k], k / 100.0);
  EXPECT_EQ(requests.load(), 7);
  EXPECT_LE(peak.load(), 2);
}

TEST(ForEachBatch, CoversRangeOnce) {
  for (std::size_t n : {0u, 1u, 5u, 64u, 65u, 1000u}) {
    RemoteOptions o;
    o.max_batch = 7;
    o.max_in_flight = 3;
    std::vector<int> hits(n, 0);
    for_each_batch(n, o, [&](std::size_t b, std::size_t e) {
      EXPECT_LE(e - b, 7u);
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(),
                            [](int h) { return h == 1; }));
  }
}

TEST(ForEachBatch, RethrowsFirstFailure) {
  RemoteOptions o;
  o.max_batch = 1;
  o.max_in_flight = 4;
  EXPECT_THROW(for_each_batch(10, o,
                              [](std::size_t b, std::size_t) {
                                if (b == 3) throw ProtocolError("boom");
                              }),
               ProtocolError);
}

}  // namespace
}  // namespace scrub
