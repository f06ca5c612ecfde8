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

#ifndef SCRUB_ERROR_H_
#define SCRUB_ERROR_H_

#include <stdexcept>
#include <string>

namespace scrub {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input, schema violations, bad configuration.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A scorer or encoder backend failed. Transport failures and protocol
// violations are retryable; the remote client converts them into a
// non-retryable error once its retry budget is spent.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}

  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class ProtocolError : public BackendError {
 public:
  explicit ProtocolError(const std::string& what, bool retryable = true)
      : BackendError(what, retryable) {}
};

}  // namespace scrub

#endif  // SCRUB_ERROR_H_
