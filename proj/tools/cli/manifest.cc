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

#include "manifest.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <fstream>
#include <set>
#include <utility>

#include "scrub/hash.h"

namespace scrub::cli {
namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "scrub-run-manifest";
constexpr int kVersion = 1;

ordered_json refs_to_json(const std::vector<ArtifactRef>& refs) {
  ordered_json out = ordered_json::array();
  for (const auto& r : refs) {
    out.push_back(ordered_json{{"path", r.path}, {"sha256", r.sha256}});
  }
  return out;
}

std::vector<ArtifactRef> refs_from_json(const json& j) {
  std::vector<ArtifactRef> out;
  for (const auto& r : j) {
    out.push_back({r.at("path").get<std::string>(),
                   r.at("sha256").get<std::string>()});
  }
  return out;
}

std::string rerun_hint(const std::string& stage) {
  return "; rerun 'scrub " + stage + "'";
}

}  // namespace

ManifestLock::ManifestLock(const fs::path& run_dir) {
  fs::create_directories(run_dir);
  const fs::path lock = run_dir / (std::string(RunManifest::kFileName) + ".lock");
  fd_ = ::open(lock.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw ValidationError("cannot open lock file " + lock.string() + ": " +
                          std::strerror(errno));
  }
  while (::flock(fd_, LOCK_EX) != 0) {
    if (errno != EINTR) {
      ::close(fd_);
      throw ValidationError("cannot lock " + lock.string() + ": " +
                            std::strerror(errno));
    }
  }
}

ManifestLock::~ManifestLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

bool RunManifest::exists(const fs::path& run_dir) {
  return fs::exists(run_dir / kFileName);
}

RunManifest RunManifest::create(const fs::path& run_dir, std::string run_id,
                                std::uint64_t seed, std::string source) {
  RunManifest m;
  m.run_dir_ = fs::absolute(run_dir).lexically_normal();
  m.run_id_ = std::move(run_id);
  m.seed_ = seed;
  m.source_ = std::move(source);
  return m;
}

RunManifest RunManifest::load(const fs::path& run_dir) {
  const fs::path file = run_dir / kFileName;
  std::ifstream in(file);
  if (!in) {
    throw StaleArtifactError("no run manifest in " + run_dir.string() +
                             rerun_hint("prepare"));
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw ValidationError(file.string() + ": not a run manifest");
    }
    if (j.at("version").get<int>() != kVersion) {
      throw ValidationError(file.string() + ": unsupported manifest version");
    }
    RunManifest m;
    m.run_dir_ = fs::absolute(run_dir).lexically_normal();
    m.run_id_ = j.at("run_id").get<std::string>();
    m.seed_ = j.at("seed").get<std::uint64_t>();
    m.source_ = j.at("source").get<std::string>();
    m.backends_ = j.at("backends");
    for (const auto& s : j.at("stages")) {
      StageRecord r;
      r.command = s.at("command").get<std::string>();
      r.config_digest = s.at("config_digest").get<std::string>();
      r.config = s.at("config");
      r.inputs = refs_from_json(s.at("inputs"));
      r.outputs = refs_from_json(s.at("outputs"));
      r.timestamp = s.at("timestamp").get<std::string>();
      m.stages_.push_back(std::move(r));
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(file.string() + ": " + e.what());
  }
}

void RunManifest::save() const {
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["run_id"] = run_id_;
  j["seed"] = seed_;
  j["source"] = source_;
  j["backends"] = ordered_json::parse(backends_.dump());
  ordered_json stages = ordered_json::array();
  for (const auto& s : stages_) {
    ordered_json r;
    r["command"] = s.command;
    r["config_digest"] = s.config_digest;
    r["config"] = ordered_json::parse(s.config.dump());
    r["inputs"] = refs_to_json(s.inputs);
    r["outputs"] = refs_to_json(s.outputs);
    r["timestamp"] = s.timestamp;
    stages.push_back(std::move(r));
  }
  j["stages"] = std::move(stages);

  fs::create_directories(run_dir_);
  const fs::path file = run_dir_ / kFileName;
  const fs::path tmp = run_dir_ / (std::string(kFileName) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw ValidationError("cannot write " + tmp.string());
  }
  fs::rename(tmp, file);
}

json RunManifest::backend(const std::string& role) const {
  auto it = backends_.find(role);
  return it == backends_.end() ? json() : *it;
}

void RunManifest::declare_backend(const std::string& role, json declaration) {
  backends_[role] = std::move(declaration);
}

fs::path RunManifest::resolve(const std::string& path) const {
  fs::path p(path);
  return p.is_absolute() ? p : run_dir_ / p;
}

std::string RunManifest::relative(const fs::path& path) const {
  const fs::path abs = fs::absolute(path).lexically_normal();
  const fs::path rel = abs.lexically_relative(run_dir_);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return abs.generic_string();
}

const StageRecord* RunManifest::producer_of(const std::string& rel) const {
  for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) {
    for (const auto& o : it->outputs) {
      if (o.path == rel) return &*it;
    }
  }
  return nullptr;
}

const StageRecord* RunManifest::latest(const std::string& command) const {
  for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) {
    if (it->command == command) return &*it;
  }
  return nullptr;
}

void RunManifest::verify_chain(const std::string& rel,
                               std::vector<std::string>& seen) const {
  if (std::find(seen.begin(), seen.end(), rel) != seen.end()) return;
  seen.push_back(rel);
  const StageRecord* producer = producer_of(rel);
  if (producer == nullptr) return;
  const fs::path file = resolve(rel);
  if (!fs::exists(file)) {
    throw StaleArtifactError(rel + " (written by stage '" + producer->command +
                             "') is missing" + rerun_hint(producer->command));
  }
  const auto& recorded = *std::find_if(
      producer->outputs.begin(), producer->outputs.end(),
      [&](const ArtifactRef& r) { return r.path == rel; });
  if (sha256_file(file) != recorded.sha256) {
    throw StaleArtifactError(rel + " no longer matches the hash recorded by "
                             "stage '" + producer->command + "'" +
                             rerun_hint(producer->command));
  }
  for (const auto& in : producer->inputs) {
    // Upstream first, so a tampered file names its own producer.
    verify_chain(in.path, seen);
    const fs::path in_file = resolve(in.path);
    if (!fs::exists(in_file) || sha256_file(in_file) != in.sha256) {
      throw StaleArtifactError(in.path + " changed after stage '" +
                               producer->command + "' consumed it" +
                               rerun_hint(producer->command));
    }
  }
}

ArtifactRef RunManifest::verify_input(const fs::path& path,
                                      const std::string& producer) const {
  const std::string rel = relative(path);
  const fs::path file = resolve(rel);
  if (!fs::exists(file)) {
    const StageRecord* p = producer_of(rel);
    const std::string stage = p != nullptr ? p->command : producer;
    throw StaleArtifactError("missing input " + rel + rerun_hint(stage));
  }
  std::vector<std::string> seen;
  verify_chain(rel, seen);
  return {rel, sha256_file(file)};
}

const StageRecord* RunManifest::find_up_to_date(
    const std::string& command, const std::string& digest) const {
  for (auto it = stages_.rbegin(); it != stages_.rend(); ++it) {
    if (it->command != command || it->config_digest != digest) continue;
    bool intact = true;
    for (const auto& group : {&it->inputs, &it->outputs}) {
      for (const auto& ref : *group) {
        const fs::path file = resolve(ref.path);
        if (!fs::exists(file) || sha256_file(file) != ref.sha256) {
          intact = false;
          break;
        }
      }
      if (!intact) break;
    }
    if (intact) return &*it;
    return nullptr;
  }
  return nullptr;
}

void RunManifest::record(StageRecord stage) {
  std::set<std::string> written;
  for (const auto& o : stage.outputs) written.insert(o.path);
  std::erase_if(stages_, [&](const StageRecord& old) {
    return std::all_of(old.outputs.begin(), old.outputs.end(),
                       [&](const ArtifactRef& r) {
                         return written.count(r.path) > 0;
                       });
  });
  stages_.push_back(std::move(stage));
}

std::string config_digest(const json& config) {
  return sha256_hex(config.dump());
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace scrub::cli
