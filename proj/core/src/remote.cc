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

#include "scrub/remote.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "scrub/error.h"

namespace scrub {
namespace {

httplib::Client make_client(const RemoteOptions& options) {
  if (options.endpoint.empty()) {
    throw ValidationError("remote backend has no endpoint configured");
  }
  httplib::Client client(options.endpoint);
  if (!client.is_valid()) {
    throw ValidationError("invalid endpoint \"" + options.endpoint + "\"");
  }
  const auto seconds = static_cast<time_t>(options.timeout_seconds);
  const auto micros = static_cast<time_t>(
      (options.timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  return client;
}

std::string request_with_retries(
    const RemoteOptions& options, const std::string& path,
    const std::string* body,
    const std::function<void(const std::string&)>& validate) {
  std::string last_error;
  for (int attempt = 0; attempt <= std::max(0, options.retries); ++attempt) {
    try {
      auto client = make_client(options);
      auto result = body ? client.Post(path, *body, "application/json")
                         : client.Get(path);
      if (!result) {
        throw BackendError(
            "transport error: " + httplib::to_string(result.error()), true);
      }
      if (result->status != 200) {
        // Client errors will not go away on retry.
        const bool retryable = result->status >= 500 || result->status == 429;
        throw ProtocolError(
            path + " returned HTTP " + std::to_string(result->status),
            retryable);
      }
      if (validate) validate(result->body);
      return result->body;
    } catch (const BackendError& e) {
      if (!e.retryable()) throw;
      last_error = e.what();
    }
  }
  throw BackendError(options.endpoint + path + " failed after " +
                         std::to_string(std::max(0, options.retries) + 1) +
                         " attempts: " + last_error,
                     false);
}

}  // namespace

std::string post_with_retries(
    const RemoteOptions& options, const std::string& path,
    const std::string& body,
    const std::function<void(const std::string&)>& validate) {
  return request_with_retries(options, path, &body, validate);
}

HealthInfo fetch_health(const RemoteOptions& options) {
  HealthInfo info;
  request_with_retries(
      options, "/health", nullptr, [&](const std::string& body) {
        nlohmann::json reply;
        try {
          reply = nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error&) {
          throw ProtocolError("/health returned invalid JSON");
        }
        if (!reply.is_object() || !reply.contains("dim") ||
            !reply["dim"].is_number_integer()) {
          throw ProtocolError("/health response lacks an integer dim");
        }
        info.dim = reply["dim"].get<Eigen::Index>();
        info.encoder = reply.value("encoder", "");
        info.classifier = reply.value("classifier", "");
        info.pooling = reply.value("pooling", "");
      });
  return info;
}

void for_each_batch(std::size_t n, const RemoteOptions& options,
                    const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t batch = std::max<std::size_t>(1, options.max_batch);
  const std::size_t n_batches = (n + batch - 1) / batch;
  const std::size_t workers =
      std::min(std::max<std::size_t>(1, options.max_in_flight), n_batches);
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_batches; ++b) {
      fn(b * batch, std::min(n, (b + 1) * batch));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr failure;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t b = next++; b < n_batches; b = next++) {
        {
          std::lock_guard lock(mutex);
          if (failure) return;
        }
        try {
          fn(b * batch, std::min(n, (b + 1) * batch));
        } catch (...) {
          std::lock_guard lock(mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace scrub
