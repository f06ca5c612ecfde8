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

#ifndef SCRUB_TOOLS_CLI_MANIFEST_H_
#define SCRUB_TOOLS_CLI_MANIFEST_H_

// run.manifest.json: the seed, backend declarations and one record per
// executed stage with content hashes of its inputs and outputs. Stages
// refuse to run when an upstream artifact no longer matches its record.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scrub/error.h"

namespace scrub::cli {

// An upstream artifact is missing or was modified after it was recorded.
class StaleArtifactError : public Error {
 public:
  using Error::Error;
};

struct ArtifactRef {
  // Relative to the run directory when inside it, absolute otherwise.
  std::string path;
  std::string sha256;
};

struct StageRecord {
  std::string command;
  std::string config_digest;
  nlohmann::json config;
  std::vector<ArtifactRef> inputs;
  std::vector<ArtifactRef> outputs;
  std::string timestamp;
};

// Exclusive advisory lock on <run_dir>/run.manifest.json.lock for the life
// of the object.
class ManifestLock {
 public:
  explicit ManifestLock(const std::filesystem::path& run_dir);
  ~ManifestLock();
  ManifestLock(const ManifestLock&) = delete;
  ManifestLock& operator=(const ManifestLock&) = delete;

 private:
  int fd_ = -1;
};

class RunManifest {
 public:
  static constexpr const char* kFileName = "run.manifest.json";

  static bool exists(const std::filesystem::path& run_dir);
  static RunManifest load(const std::filesystem::path& run_dir);
  static RunManifest create(const std::filesystem::path& run_dir,
                            std::string run_id, std::uint64_t seed,
                            std::string source);

  void save() const;

  const std::filesystem::path& run_dir() const { return run_dir_; }
  const std::string& run_id() const { return run_id_; }
  std::uint64_t seed() const { return seed_; }
  const std::string& source() const { return source_; }
  const std::vector<StageRecord>& stages() const { return stages_; }

  // Backend declarations ("encoder", "scorer"); null when undeclared.
  nlohmann::json backend(const std::string& role) const;
  void declare_backend(const std::string& role, nlohmann::json declaration);

  std::filesystem::path resolve(const std::string& path) const;
  std::string relative(const std::filesystem::path& path) const;

  // Hashes `path` after checking it, and everything it was derived from,
  // against the recorded hash chain. `producer` names the stage to rerun
  // when the file is missing and no record exists.
  ArtifactRef verify_input(const std::filesystem::path& path,
                           const std::string& producer) const;

  // A previous run of the same command with the same digest whose outputs
  // are all still intact.
  const StageRecord* find_up_to_date(const std::string& command,
                                     const std::string& config_digest) const;

  // Latest stage that produced `path`, if any.
  const StageRecord* producer_of(const std::string& relative_path) const;

  // Latest stage with this command name.
  const StageRecord* latest(const std::string& command) const;

  // Appends `stage`, dropping older records whose outputs it all rewrites.
  void record(StageRecord stage);

 private:
  void verify_chain(const std::string& relative_path,
                    std::vector<std::string>& visiting) const;

  std::filesystem::path run_dir_;
  std::string run_id_;
  std::uint64_t seed_ = 42;
  std::string source_;
  nlohmann::json backends_ = nlohmann::json::object();
  std::vector<StageRecord> stages_;
};

// Hash of the canonical dump of `config`.
std::string config_digest(const nlohmann::json& config);

// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

}  // namespace scrub::cli

#endif  // SCRUB_TOOLS_CLI_MANIFEST_H_
