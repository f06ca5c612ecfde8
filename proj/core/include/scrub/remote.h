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

#ifndef SCRUB_REMOTE_H_
#define SCRUB_REMOTE_H_

// Client side of the /encode, /score and /health JSON protocol.

#include <cstddef>
#include <functional>
#include <string>

#include <Eigen/Core>

namespace scrub {

struct RemoteOptions {
  // "http://host:port"
  std::string endpoint;
  double timeout_seconds = 30.0;
  // Extra attempts after the first one fails with a retryable error.
  int retries = 2;
  std::size_t max_batch = 64;
  std::size_t max_in_flight = 4;
};

// Declared metadata from GET /health.
struct HealthInfo {
  Eigen::Index dim = 0;
  std::string encoder;
  std::string classifier;
  std::string pooling;
};

HealthInfo fetch_health(const RemoteOptions& options);

// Splits [0, n) into batches of at most max_batch and runs `fn(begin, end)`
// with at most max_in_flight batches outstanding. Each batch writes only its
// own index range, so results come back in input order. The first exception
// is rethrown after all batches settle.
void for_each_batch(std::size_t n, const RemoteOptions& options,
                    const std::function<void(std::size_t, std::size_t)>& fn);

// POSTs `body` to `path` and returns the response body of a 200 reply,
// retrying transport errors, 5xx and 429 replies. `validate` may throw
// ProtocolError to reject a reply; such replies are retried too.
std::string post_with_retries(
    const RemoteOptions& options, const std::string& path,
    const std::string& body,
    const std::function<void(const std::string&)>& validate);

}  // namespace scrub

#endif  // SCRUB_REMOTE_H_
