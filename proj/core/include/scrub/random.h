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

#ifndef SCRUB_RANDOM_H_
#define SCRUB_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace scrub {

// Stable 64-bit FNV-1a. Unlike std::hash the value is fixed across
// platforms and standard library versions.
std::uint64_t fnv1a64(std::string_view bytes);

// splitmix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seeded generator with portable derived draws. The engine is
// std::mt19937_64; the distributions are written out here because the
// standard library's are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n) by rejection; n must be > 0.
  std::size_t uniform_index(std::size_t n);

  // Uniform in [0, 1) with 53 random bits.
  double uniform01();

  // Standard normal via Box-Muller; caches the second variate.
  double gaussian();

  // Independent child generator for a named stream.
  Rng split(std::uint64_t stream) { return Rng(mix64(next() ^ mix64(stream))); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scrub

#endif  // SCRUB_RANDOM_H_
