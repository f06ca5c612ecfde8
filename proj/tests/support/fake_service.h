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

#ifndef SCRUB_TESTS_SUPPORT_FAKE_SERVICE_H_
#define SCRUB_TESTS_SUPPORT_FAKE_SERVICE_H_

// In-process HTTP server standing in for the encoder/classifier service.

#include <functional>
#include <string>
#include <thread>

// Eigen first: httplib pulls in <resolv.h>, whose _res macro breaks Eigen.
#include <Eigen/Core>
#include <httplib.h>

namespace scrub::testing {

class FakeService {
 public:
  // `setup` registers handlers before the server starts listening.
  explicit FakeService(const std::function<void(httplib::Server&)>& setup) {
    setup(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeService() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  FakeService(const FakeService&) = delete;
  FakeService& operator=(const FakeService&) = delete;

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

// A port nothing listens on: bind one, then let it go.
inline std::string closed_endpoint() {
  httplib::Server probe;
  const int port = probe.bind_to_any_port("127.0.0.1");
  return "http://127.0.0.1:" + std::to_string(port);
}

}  // namespace scrub::testing

#endif  // SCRUB_TESTS_SUPPORT_FAKE_SERVICE_H_
