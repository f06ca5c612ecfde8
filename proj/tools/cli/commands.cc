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

#include "commands.h"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "manifest.h"
#include "scrub/corpus.h"
#include "scrub/encoding.h"
#include "scrub/error.h"
#include "scrub/eval.h"
#include "scrub/hash.h"
#include "scrub/masking.h"
#include "scrub/remote.h"
#include "scrub/report.h"
#include "scrub/scoring.h"
#include "scrub/subspace.h"
#include "scrub/synthetic.h"

namespace scrub::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kEncoderUrlEnv = "SCRUB_ENCODER_URL";
constexpr const char* kScorerUrlEnv = "SCRUB_SCORER_URL";

struct Common {
  std::string run_dir = ".";
  std::optional<std::uint64_t> seed;
  bool force = false;
};

struct RemoteFlags {
  double timeout = 30.0;
  int retries = 2;
  std::size_t max_batch = 64;
  std::size_t max_in_flight = 4;
};

struct EncoderFlags {
  std::string kind;  // empty: inherit the run's declaration
  std::optional<long> dim;
  std::optional<std::uint64_t> seed;
  std::string store;
  std::string url;
};

struct ScorerFlags {
  std::string kind;
  std::string lexicon;
  std::optional<double> base_rate;
  std::string model;
  std::string url;
};

struct Flags {
  Common common;
  RemoteFlags remote;
  EncoderFlags encoder;
  ScorerFlags scorer;
};

// --- helpers ---------------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw ValidationError("cannot write " + path.string());
}

std::string replace_suffix(const std::string& path, const std::string& from,
                           const std::string& to) {
  if (path.size() >= from.size() &&
      path.compare(path.size() - from.size(), from.size(), from) == 0) {
    return path.substr(0, path.size() - from.size()) + to;
  }
  return path + to;
}

std::string env_or_empty(const char* name) {
  const char* value = std::getenv(name);
  return value == nullptr ? std::string() : std::string(value);
}

// Best guess at which stage writes a conventional artifact name.
std::string producer_for(const std::string& path) {
  const std::string name = fs::path(path).filename().string();
  if (path.rfind("split/", 0) == 0) return "prepare";
  if (name.rfind("parallel", 0) == 0) return "mask";
  if (name.find(".selected.") != std::string::npos) return "select";
  if (name.ends_with(".toxsub.json") || name.ends_with(".scores.jsonl")) {
    return "fit";
  }
  if (name.ends_with(".embstore")) return "encode";
  if (name == "probe.json" || name.rfind("metrics.", 0) == 0) {
    return "evaluate";
  }
  return "prepare";
}

// Declarations compare on what identifies the model, not where it lives.
json identity(json declaration) {
  if (declaration.is_object()) {
    declaration.erase("path");
    declaration.erase("endpoint");
  }
  return declaration;
}

RemoteOptions remote_options(const RemoteFlags& flags, std::string endpoint) {
  RemoteOptions options;
  options.endpoint = std::move(endpoint);
  options.timeout_seconds = flags.timeout;
  options.retries = flags.retries;
  options.max_batch = flags.max_batch;
  options.max_in_flight = flags.max_in_flight;
  return options;
}

// --- stages ----------------------------------------------------------------

class Stage {
 public:
  Stage(RunManifest& manifest, std::string command)
      : manifest_(manifest), command_(std::move(command)) {}

  // Run-directory artifact consumed by this stage.
  fs::path input(const std::string& path) {
    const fs::path file = manifest_.resolve(path);
    ArtifactRef ref = manifest_.verify_input(file, producer_for(path));
    inputs_.push_back(ref);
    return manifest_.resolve(ref.path);
  }

  // User-supplied file outside the stage graph, identified by content only.
  fs::path external(const std::string& path, const std::string& what) {
    const fs::path file = fs::absolute(path);
    if (!fs::is_regular_file(file)) {
      throw ValidationError(what + " not found: " + path);
    }
    inputs_.push_back({file.generic_string(), sha256_file(file)});
    return file;
  }

  fs::path output(const std::string& path) {
    const fs::path file = manifest_.resolve(path);
    outputs_.push_back(manifest_.relative(file));
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    return file;
  }

  json& params() { return params_; }

  void use_backend(const std::string& role, const json& declaration) {
    backends_[role] = declaration;
  }

  std::string digest() const {
    json inputs = json::array();
    for (const auto& ref : inputs_) inputs.push_back(ref.sha256);
    json backends = json::object();
    for (const auto& [role, decl] : backends_.items()) {
      backends[role] = identity(decl);
    }
    return config_digest(json{{"command", command_},
                              {"params", params_},
                              {"seed", manifest_.seed()},
                              {"backends", backends},
                              {"inputs", inputs},
                              {"outputs", outputs_}});
  }

  // True when an identical earlier run left every artifact intact.
  bool up_to_date(bool force, std::ostream& out) const {
    if (force) return false;
    if (manifest_.find_up_to_date(command_, digest()) == nullptr) return false;
    out << command_ << ": up to date\n";
    return true;
  }

  void commit() {
    StageRecord record;
    record.command = command_;
    record.config_digest = digest();
    record.config = params_;
    record.inputs = inputs_;
    for (const auto& rel : outputs_) {
      record.outputs.push_back({rel, sha256_file(manifest_.resolve(rel))});
    }
    record.timestamp = utc_timestamp();
    for (const auto& [role, decl] : backends_.items()) {
      manifest_.declare_backend(role, decl);
    }
    manifest_.record(std::move(record));
    manifest_.save();
  }

 private:
  RunManifest& manifest_;
  std::string command_;
  json params_ = json::object();
  json backends_ = json::object();
  std::vector<ArtifactRef> inputs_;
  std::vector<std::string> outputs_;
};

RunManifest open_run(const Common& common) {
  RunManifest manifest = RunManifest::load(common.run_dir);
  if (common.seed && *common.seed != manifest.seed()) {
    throw ValidationError("run " + manifest.run_id() + " is seeded with " +
                          std::to_string(manifest.seed()) +
                          "; the seed is fixed at prepare time");
  }
  return manifest;
}

// --- backends --------------------------------------------------------------

json choose_declaration(const RunManifest& manifest, const std::string& role,
                        const json& from_flags, bool force, json fallback) {
  const json declared = manifest.backend(role);
  if (!from_flags.is_null()) {
    if (!declared.is_null() && identity(declared) != identity(from_flags) &&
        !force) {
      throw ValidationError(role + " " + identity(from_flags).dump() +
                            " differs from the one declared for this run " +
                            identity(declared).dump() +
                            "; pass --force to redeclare");
    }
    return from_flags;
  }
  if (!declared.is_null()) return declared;
  if (!fallback.is_null()) return fallback;
  throw ValidationError("no " + role + " declared for this run; pass --" +
                        role);
}

// Backend kind named by --encoder or --scorer, else implied by a
// kind-specific flag; empty when no backend flag was given.
std::string implied_kind(const std::string& explicit_kind,
                         const json& declared, const std::string& fallback,
                         std::initializer_list<std::pair<bool, const char*>>
                             implied) {
  if (!explicit_kind.empty()) return explicit_kind;
  for (const auto& [given, kind] : implied) {
    if (given) return kind;
  }
  if (fallback.empty()) return "";
  return declared.is_object() ? declared.value("kind", fallback) : fallback;
}

json encoder_flags_declaration(const Flags& flags, const RunManifest& manifest) {
  const EncoderFlags& f = flags.encoder;
  const json declared = manifest.backend("encoder");
  const std::string kind = implied_kind(
      f.kind, declared, f.dim || f.seed ? "toy" : "",
      {{!f.store.empty(), "store"}, {!f.url.empty(), "remote"}});
  if (kind.empty()) return nullptr;
  const bool same_kind = declared.is_object() &&
                         declared.value("kind", std::string()) == kind;
  if (kind == "toy") {
    long dim = f.dim.value_or(same_kind ? declared.value("dim", 64L) : 64L);
    std::uint64_t seed = f.seed.value_or(
        same_kind ? declared.value("seed", manifest.seed()) : manifest.seed());
    return json{{"kind", "toy"}, {"dim", dim}, {"seed", seed}};
  }
  if (kind == "store") {
    if (f.store.empty()) {
      throw ValidationError("--encoder store needs --encoder-store");
    }
    const fs::path file = fs::absolute(f.store);
    if (!fs::is_regular_file(file)) {
      throw ValidationError("encoder store not found: " + f.store);
    }
    return json{{"kind", "store"},
                {"path", file.generic_string()},
                {"sha256", sha256_file(file)}};
  }
  if (kind == "remote") {
    long dim = f.dim.value_or(same_kind ? declared.value("dim", 0L) : 0L);
    return json{{"kind", "remote"}, {"endpoint", f.url}, {"dim", dim}};
  }
  throw ValidationError("unknown encoder '" + kind +
                        "' (expected toy, store or remote)");
}

// Builds the encoder and completes the declaration (a remote dim of 0 is
// filled from /health).
std::shared_ptr<const Encoder> make_encoder(json& decl, const Flags& flags) {
  const std::string kind = decl.at("kind").get<std::string>();
  if (kind == "toy") {
    const long dim = decl.at("dim").get<long>();
    if (dim <= 0) throw ValidationError("encoder dim must be positive");
    return std::make_shared<ToyEncoder>(dim,
                                        decl.at("seed").get<std::uint64_t>());
  }
  if (kind == "store") {
    const fs::path file = decl.at("path").get<std::string>();
    if (!fs::is_regular_file(file) ||
        sha256_file(file) != decl.at("sha256").get<std::string>()) {
      throw StaleArtifactError("encoder store " + file.string() +
                               " changed since it was declared; pass "
                               "--encoder store --force to redeclare");
    }
    return std::make_shared<StoreEncoder>(file);
  }
  if (kind == "remote") {
    std::string endpoint = flags.encoder.url;
    if (endpoint.empty()) endpoint = env_or_empty(kEncoderUrlEnv);
    if (endpoint.empty()) endpoint = decl.value("endpoint", std::string());
    if (endpoint.empty()) {
      throw ValidationError(std::string("remote encoder needs --encoder-url "
                                        "or ") + kEncoderUrlEnv);
    }
    decl["endpoint"] = endpoint;
    auto encoder = std::make_shared<RemoteEncoder>(
        remote_options(flags.remote, endpoint), decl.value("dim", 0L));
    decl["dim"] = static_cast<long>(encoder->dim());
    return encoder;
  }
  throw ValidationError("unknown encoder kind '" + kind + "'");
}

std::shared_ptr<const Encoder> resolve_encoder(Stage& stage,
                                               const RunManifest& manifest,
                                               const Flags& flags) {
  json from_flags = encoder_flags_declaration(flags, manifest);
  json fallback = {{"kind", "toy"}, {"dim", 64}, {"seed", manifest.seed()}};
  json decl;
  std::shared_ptr<const Encoder> encoder;
  if (!from_flags.is_null()) {
    // Complete the flag declaration before comparing it.
    encoder = make_encoder(from_flags, flags);
    decl = choose_declaration(manifest, "encoder", from_flags,
                              flags.common.force, nullptr);
  } else {
    decl = choose_declaration(manifest, "encoder", nullptr, flags.common.force,
                              fallback);
    encoder = make_encoder(decl, flags);
  }
  stage.use_backend("encoder", decl);
  return encoder;
}

json scorer_flags_declaration(const Flags& flags, const RunManifest& manifest) {
  const ScorerFlags& f = flags.scorer;
  const json declared = manifest.backend("scorer");
  const std::string kind = implied_kind(
      f.kind, declared, f.base_rate ? "lexicon" : "",
      {{!f.lexicon.empty(), "lexicon"},
       {!f.model.empty(), "linear"},
       {!f.url.empty(), "remote"}});
  if (kind.empty()) return nullptr;
  const bool same_kind = declared.is_object() &&
                         declared.value("kind", std::string()) == kind;
  if (kind == "lexicon") {
    if (f.lexicon.empty()) {
      throw ValidationError("--scorer lexicon needs --lexicon");
    }
    const fs::path file = fs::absolute(f.lexicon);
    if (!fs::is_regular_file(file)) {
      throw ValidationError("lexicon not found: " + f.lexicon);
    }
    double base_rate = f.base_rate.value_or(
        same_kind ? declared.value("base_rate", 0.05) : 0.05);
    return json{{"kind", "lexicon"},
                {"path", file.generic_string()},
                {"sha256", sha256_file(file)},
                {"base_rate", base_rate}};
  }
  if (kind == "linear") {
    if (f.model.empty()) {
      throw ValidationError("--scorer linear needs --scorer-model");
    }
    const fs::path file = fs::absolute(f.model);
    if (!fs::is_regular_file(file)) {
      throw ValidationError("scorer model not found: " + f.model);
    }
    return json{{"kind", "linear"},
                {"path", file.generic_string()},
                {"sha256", sha256_file(file)}};
  }
  if (kind == "remote") {
    return json{{"kind", "remote"}, {"endpoint", f.url}};
  }
  throw ValidationError("unknown scorer '" + kind +
                        "' (expected lexicon, linear or remote)");
}

void check_declared_file(const json& decl, const std::string& what) {
  const fs::path file = decl.at("path").get<std::string>();
  if (!fs::is_regular_file(file) ||
      sha256_file(file) != decl.at("sha256").get<std::string>()) {
    throw StaleArtifactError(what + " " + file.string() +
                             " changed since it was declared; pass --scorer "
                             "with --force to redeclare");
  }
}

std::shared_ptr<const ToxicityScorer> make_scorer(
    json& decl, const Flags& flags,
    const std::shared_ptr<const Encoder>& encoder) {
  const std::string kind = decl.at("kind").get<std::string>();
  if (kind == "lexicon") {
    check_declared_file(decl, "lexicon");
    return std::make_shared<LexiconScorer>(
        load_lexicon(decl.at("path").get<std::string>()),
        decl.at("base_rate").get<double>());
  }
  if (kind == "linear") {
    check_declared_file(decl, "scorer model");
    if (!encoder) throw ValidationError("linear scorer needs an encoder");
    return std::make_shared<LinearScorer>(
        load_probe(decl.at("path").get<std::string>()), encoder);
  }
  if (kind == "remote") {
    std::string endpoint = flags.scorer.url;
    if (endpoint.empty()) endpoint = env_or_empty(kScorerUrlEnv);
    if (endpoint.empty()) endpoint = decl.value("endpoint", std::string());
    if (endpoint.empty()) {
      throw ValidationError(std::string("remote scorer needs --scorer-url "
                                        "or ") + kScorerUrlEnv);
    }
    decl["endpoint"] = endpoint;
    return std::make_shared<RemoteScorer>(
        remote_options(flags.remote, endpoint));
  }
  throw ValidationError("unknown scorer kind '" + kind + "'");
}

std::shared_ptr<const ToxicityScorer> resolve_scorer(
    Stage& stage, const RunManifest& manifest, const Flags& flags,
    const std::shared_ptr<const Encoder>& encoder) {
  json decl = choose_declaration(manifest, "scorer",
                                 scorer_flags_declaration(flags, manifest),
                                 flags.common.force, nullptr);
  auto scorer = make_scorer(decl, flags, encoder);
  stage.use_backend("scorer", decl);
  return scorer;
}

bool scorer_needs_encoder(const RunManifest& manifest, const Flags& flags) {
  if (!flags.scorer.kind.empty()) return flags.scorer.kind == "linear";
  if (!flags.scorer.model.empty()) return true;
  const json declared = manifest.backend("scorer");
  return declared.is_object() &&
         declared.value("kind", std::string()) == "linear";
}

// --- shared readers --------------------------------------------------------

struct TextRows {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
};

TextRows read_text_rows(const fs::path& path, const std::string& field) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  TextRows rows;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json row = json::parse(line);
      rows.ids.push_back(row.at("id").get<std::string>());
      rows.texts.push_back(row.at(field).get<std::string>());
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(number) +
                            ": " + e.what());
    }
  }
  if (rows.ids.empty()) throw ValidationError(path.string() + " is empty");
  return rows;
}

struct Labeled {
  RowMatrix x;
  std::vector<int> y;
};

Labeled stack_labeled(const EmbeddingMatrix& toxic,
                      const EmbeddingMatrix& nontoxic) {
  if (toxic.dim() != nontoxic.dim()) {
    throw ValidationError("toxic and non-toxic stores differ in dimension");
  }
  Labeled out;
  out.x.resize(toxic.rows() + nontoxic.rows(), toxic.dim());
  out.x << toxic.data(), nontoxic.data();
  out.y.assign(static_cast<std::size_t>(toxic.rows()), 1);
  out.y.resize(out.y.size() + static_cast<std::size_t>(nontoxic.rows()), 0);
  return out;
}

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto begin = item.find_first_not_of(' ');
    if (begin == std::string::npos) continue;
    item = item.substr(begin, item.find_last_not_of(' ') - begin + 1);
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) {
      throw ValidationError("--overrides: '" + item + "' is not an index");
    }
    out.push_back(value);
  }
  if (out.empty()) throw ValidationError("--overrides is empty");
  return out;
}

ordered_json metrics_json(const EvalMetrics& m) {
  ordered_json j;
  j["tox"] = m.tox;
  j["non_tox"] = m.non_tox;
  j["acc"] = m.acc;
  j["cos"] = m.cos;
  j["cos_t"] = m.cos_t ? ordered_json(*m.cos_t) : ordered_json(nullptr);
  j["n_toxic"] = m.n_toxic;
  j["n_nontoxic"] = m.n_nontoxic;
  return j;
}

EvalMetrics metrics_from_json(const json& j) {
  EvalMetrics m;
  m.tox = j.at("tox").get<int>();
  m.non_tox = j.at("non_tox").get<int>();
  m.acc = j.at("acc").get<double>();
  m.cos = j.at("cos").get<double>();
  if (!j.at("cos_t").is_null()) m.cos_t = j.at("cos_t").get<double>();
  m.n_toxic = j.at("n_toxic").get<int>();
  m.n_nontoxic = j.at("n_nontoxic").get<int>();
  return m;
}

// --- commands --------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string lexicon_out;
  int n_toxic = 1500;
  int n_nontoxic = 1500;
  int vocabulary = 400;
  std::uint64_t seed = 42;
};

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  TextCorpusConfig config;
  config.n_toxic = args.n_toxic;
  config.n_nontoxic = args.n_nontoxic;
  config.vocabulary = args.vocabulary;
  const auto records = make_text_corpus(config, args.seed);
  if (fs::path(args.out).has_parent_path()) {
    fs::create_directories(fs::path(args.out).parent_path());
  }
  write_jsonl_corpus(args.out, records);
  if (!args.lexicon_out.empty()) {
    std::string words;
    for (const auto& w : config.lexicon) words += w + "\n";
    write_file(args.lexicon_out, words);
  }
  out << "synth: wrote " << records.size() << " sentences to " << args.out
      << "\n";
  return kExitOk;
}

struct PrepareArgs {
  std::string corpus;
  std::string format;
  std::string source = "custom";
  std::string preset;
  bool confidence_filter = false;
  double confidence_threshold = 0.8;
  std::size_t n_val = 1000;
  CsvColumns columns;
};

int cmd_prepare(const PrepareArgs& args, const Flags& flags,
                std::ostream& out) {
  const Common& common = flags.common;
  const Source source = parse_source(args.source);
  const FilterPreset preset =
      args.preset.empty() ? default_preset(source) : parse_preset(args.preset);
  std::string format = args.format;
  if (format.empty()) {
    format = fs::path(args.corpus).extension() == ".csv" ? "csv" : "jsonl";
  }
  const CorpusFormat corpus_format = parse_format(format);
  if (!fs::is_regular_file(args.corpus)) {
    throw ValidationError("corpus not found: " + args.corpus);
  }

  ManifestLock lock(common.run_dir);
  const std::uint64_t seed = common.seed.value_or(42);
  const std::string corpus_hash = sha256_file(args.corpus);
  const std::string source_name(to_string(source));
  std::optional<RunManifest> existing;
  if (RunManifest::exists(common.run_dir)) {
    existing = RunManifest::load(common.run_dir);
    const bool reseeded = common.seed && *common.seed != existing->seed();
    const bool resourced = existing->source() != source_name;
    if ((reseeded || resourced) && !common.force) {
      throw ValidationError(
          reseeded ? "run is seeded with " + std::to_string(existing->seed()) +
                         "; pass --force to start the run over"
                   : "run was prepared from a '" + existing->source() +
                         "' corpus; pass --force to start the run over");
    }
    if (reseeded || resourced) existing.reset();
  }
  RunManifest manifest =
      existing ? std::move(*existing)
               : RunManifest::create(
                     common.run_dir,
                     "run-" + sha256_hex(corpus_hash + "/" + source_name + "/" +
                                         std::to_string(seed))
                                  .substr(0, 12),
                     seed, source_name);

  Stage stage(manifest, "prepare");
  const fs::path corpus_path = stage.external(args.corpus, "corpus");
  auto& p = stage.params();
  p["format"] = format;
  p["source"] = source_name;
  p["preset"] = std::string(to_string(preset));
  p["confidence_filter"] = args.confidence_filter;
  p["confidence_threshold"] = args.confidence_threshold;
  p["n_val"] = args.n_val;
  if (corpus_format == CorpusFormat::kCsv) {
    p["columns"] = {args.columns.id, args.columns.text, args.columns.score,
                    args.columns.label};
  }
  std::shared_ptr<const ToxicityScorer> scorer;
  if (args.confidence_filter) {
    std::shared_ptr<const Encoder> encoder;
    if (scorer_needs_encoder(manifest, flags)) {
      encoder = resolve_encoder(stage, manifest, flags);
    }
    scorer = resolve_scorer(stage, manifest, flags, encoder);
  }
  const fs::path train_t = stage.output("split/train_toxic.jsonl");
  const fs::path train_nt = stage.output("split/train_nontoxic.jsonl");
  const fs::path val_t = stage.output("split/val_toxic.jsonl");
  const fs::path val_nt = stage.output("split/val_nontoxic.jsonl");
  if (stage.up_to_date(common.force, out)) return kExitOk;

  const auto records =
      load_corpus(corpus_path, corpus_format, source, args.columns);
  FilterRules rules;
  rules.preset = preset;
  rules.confidence_filter = args.confidence_filter;
  rules.confidence_threshold = args.confidence_threshold;
  const auto filtered = apply_filter_rules(records, rules, scorer.get());
  const CorpusSplit split = make_split(filtered, args.n_val, manifest.seed());
  write_jsonl_corpus(train_t, split.train_toxic);
  write_jsonl_corpus(train_nt, split.train_nontoxic);
  write_jsonl_corpus(val_t, split.val_toxic);
  write_jsonl_corpus(val_nt, split.val_nontoxic);
  stage.commit();
  out << "prepare: " << manifest.run_id() << " kept " << filtered.size()
      << " of " << records.size() << "; train " << split.train_toxic.size()
      << "+" << split.train_nontoxic.size() << ", val "
      << split.val_toxic.size() << "+" << split.val_nontoxic.size() << "\n";
  return kExitOk;
}

struct MaskArgs {
  std::string input = "split/train_toxic.jsonl";
  std::string out = "parallel.jsonl";
  double threshold = 0.25;
  double sim_floor = 0.8;
  double max_mask_fraction = 0.5;
  unsigned threads = 1;
};

int cmd_mask(const MaskArgs& args, const Flags& flags, std::ostream& out) {
  ManifestLock lock(flags.common.run_dir);
  RunManifest manifest = open_run(flags.common);
  Stage stage(manifest, "mask");
  const fs::path input = stage.input(args.input);
  auto& p = stage.params();
  p["threshold"] = args.threshold;
  p["sim_floor"] = args.sim_floor;
  p["max_mask_fraction"] = args.max_mask_fraction;

  MaskingConfig config;
  config.threshold = args.threshold;
  config.sim_floor = args.sim_floor;
  config.max_mask_fraction = args.max_mask_fraction;
  config.threads = std::max(1u, args.threads);
  config.encoder = resolve_encoder(stage, manifest, flags);
  config.scorer = resolve_scorer(stage, manifest, flags, config.encoder);
  config.validate();

  const fs::path pairs = stage.output(args.out);
  const fs::path discards =
      stage.output(replace_suffix(args.out, ".jsonl", ".discards.jsonl"));
  const fs::path stats_path = stage.output(
      (fs::path(args.out).parent_path() / "masking_stats.json").string());
  if (stage.up_to_date(flags.common.force, out)) return kExitOk;

  const auto records = parse_jsonl_corpus(read_file(input), Source::kCustom);
  const ParallelCorpus corpus = build_parallel_corpus(records, config);
  write_parallel_corpus(pairs, discards, corpus);
  const MaskingStats& s = corpus.stats;
  ordered_json stats;
  stats["attempted"] = s.attempted;
  stats["accepted"] = s.accepted;
  stats["discarded_budget"] = s.discarded_budget;
  stats["discarded_similarity"] = s.discarded_similarity;
  stats["mean_similarity"] = s.mean_similarity;
  stats["std_similarity"] = s.std_similarity;
  write_file(stats_path, stats.dump(2) + "\n");
  stage.commit();
  out << "mask: accepted " << s.accepted << " of " << s.attempted
      << " (budget " << s.discarded_budget << ", similarity "
      << s.discarded_similarity << "), similarity " << fixed3(s.mean_similarity)
      << " +/- " << fixed3(s.std_similarity) << "\n";
  return kExitOk;
}

struct EncodeArgs {
  std::string input;
  std::string field = "text";
  std::string out;
  std::string export_jsonl;
};

int cmd_encode(const EncodeArgs& args, const Flags& flags, std::ostream& out) {
  ManifestLock lock(flags.common.run_dir);
  RunManifest manifest = open_run(flags.common);
  Stage stage(manifest, "encode");
  const fs::path input = stage.input(args.input);
  stage.params()["field"] = args.field;
  auto encoder = resolve_encoder(stage, manifest, flags);
  const fs::path store = stage.output(args.out);
  std::optional<fs::path> exported;
  if (!args.export_jsonl.empty()) exported = stage.output(args.export_jsonl);
  if (stage.up_to_date(flags.common.force, out)) return kExitOk;

  TextRows rows = read_text_rows(input, args.field);
  const EmbeddingMatrix m = encoder->encode_batch(rows.texts, rows.ids);
  save_store(store, m);
  if (exported) export_jsonl(*exported, m);
  stage.commit();
  out << "encode: " << m.rows() << " x " << m.dim() << " -> " << args.out
      << "\n";
  return kExitOk;
}

struct FitArgs {
  std::string toxic = "toxic.embstore";
  std::string masked = "masked.embstore";
  std::string out = "subspace.toxsub.json";
  int n_components = 32;
  bool centered = false;
};

int cmd_fit(const FitArgs& args, const Flags& flags, std::ostream& out) {
  ManifestLock lock(flags.common.run_dir);
  RunManifest manifest = open_run(flags.common);
  Stage stage(manifest, "fit");
  const fs::path toxic_path = stage.input(args.toxic);
  const fs::path masked_path = stage.input(args.masked);
  auto& p = stage.params();
  p["toxic"] = manifest.relative(toxic_path);
  p["masked"] = manifest.relative(masked_path);
  p["n_components"] = args.n_components;
  p["centered"] = args.centered;
  const std::string scores_name =
      replace_suffix(args.out, ".toxsub.json", ".scores.jsonl");
  p["scores"] = scores_name;
  const fs::path model_path = stage.output(args.out);
  const fs::path scores_path = stage.output(scores_name);
  if (stage.up_to_date(flags.common.force, out)) return kExitOk;

  const EmbeddingMatrix toxic = load_store(toxic_path);
  const EmbeddingMatrix masked = load_store(masked_path);
  const DirectionSet dirs = compute_directions(toxic, masked);
  SubspaceModel model = args.centered
                            ? fit_centered_basis(dirs, args.n_components)
                            : fit_candidate_basis(dirs, args.n_components);
  model.provenance = {manifest.source(), manifest.seed(), stage.digest()};
  const auto scores =
      score_eigenvectors(model, toxic.data(), masked.data(), dirs);
  save_subspace(model_path, model);
  save_scores(scores_path, scores);
  stage.commit();
  out << "fit: " << model.n_candidates() << " candidates from "
      << dirs.rows() << " pairs, d = " << model.dim() << "\n";
  return kExitOk;
}

struct SelectArgs {
  std::string subspace = "subspace.toxsub.json";
  std::string scores;
  std::string out = "subspace.selected.toxsub.json";
  int k = 7;
  std::string overrides;
};

int cmd_select(const SelectArgs& args, const Flags& flags, std::ostream& out) {
  if (args.overrides.empty() && args.k <= 0) {
    throw ValidationError("--k must be at least 1; an empty selection "
                          "removes nothing");
  }
  std::optional<std::vector<int>> overrides;
  if (!args.overrides.empty()) overrides = parse_index_list(args.overrides);

  ManifestLock lock(flags.common.run_dir);
  RunManifest manifest = open_run(flags.common);
  Stage stage(manifest, "select");
  const fs::path model_path = stage.input(args.subspace);
  const fs::path scores_path = stage.input(
      args.scores.empty()
          ? replace_suffix(args.subspace, ".toxsub.json", ".scores.jsonl")
          : args.scores);
  auto& p = stage.params();
  p["k"] = args.k;
  p["overrides"] = overrides ? json(*overrides) : json(nullptr);
  const fs::path out_path = stage.output(args.out);
  if (stage.up_to_date(flags.common.force, out)) return kExitOk;

  const SubspaceModel model = load_subspace(model_path);
  const auto scores = load_scores(scores_path);
  const SubspaceModel chosen =
      select_eigenvectors(model, scores, args.k, overrides);
  save_subspace(out_path, chosen);
  stage.commit();
  out << "select:";
  for (int i : chosen.selected) out << " " << i;
  out << "\n";
  return kExitOk;
}

struct RemoveArgs {
  std::string input;
  std::string subspace = "subspace.selected.toxsub.json";
  std::string out;
};

int cmd_remove(const RemoveArgs& args, const Flags& flags, std::ostream& out) {
  ManifestLock lock(flags.common.run_dir);
  RunManifest manifest = open_run(flags.common);
  Stage stage(manifest, "remove");
  const fs::path input = stage.input(args.input);
  const fs::path model_path = stage.input(args.subspace);
  const fs::path out_path = stage.output(args.out);
  if (stage.up_to_date(flags.common.force, out)) return kExitOk;

  const EmbeddingMatrix w = load_store(input);
  const SubspaceModel model = load_subspace(model_path);
  const EmbeddingMatrix cleaned =
      model.center ? w.with_data(remove_subspace_centered(w.data(), model))
                   : remove_subspace(w, model);
  save_store(out_path, cleaned);
  stage.commit();
  out << "remove: " << cleaned.rows() << " rows, " << model.selected.size()
      << " directions removed -> " << args.out << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string train_toxic = "train_toxic.embstore";
  std::string train_nontoxic = "train_nontoxic.embstore";
  std::string val_toxic = "val_toxic.embstore";
  std::string val_nontoxic = "val_nontoxic.embstore";
  std::string subspace = "subspace.selected.toxsub.json";
  bool baseline = false;
  std::string probe;
  std::string probe_out = "probe.json";
  std::string name;
  double learning_rate = 0.01;
  int epochs = 500;
};

int cmd_evaluate(const EvaluateArgs& args, const Flags& flags,
                 std::ostream& out) {
  ManifestLock lock(flags.common.run_dir);
  RunManifest manifest = open_run(flags.common);
  Stage stage(manifest, "evaluate");
  auto& p = stage.params();

  std::optional<fs::path> model_path;
  bool cross = false;
  if (!args.baseline) {
    model_path = stage.input(args.subspace);
    cross = manifest.producer_of(manifest.relative(*model_path)) == nullptr;
  }
  std::string name = args.name;
  if (name.empty()) name = args.baseline ? "baseline" : "removal";
  if (name.find('/') != std::string::npos || name.empty()) {
    throw ValidationError("--name must be a plain word");
  }

  std::optional<fs::path> probe_in;
  std::optional<fs::path> train_t, train_nt;
  if (!args.probe.empty()) {
    probe_in = stage.input(args.probe);
    p["probe"] = manifest.relative(*probe_in);
  } else {
    train_t = stage.input(args.train_toxic);
    train_nt = stage.input(args.train_nontoxic);
    p["learning_rate"] = args.learning_rate;
    p["epochs"] = args.epochs;
  }
  const fs::path val_t = stage.input(args.val_toxic);
  const fs::path val_nt = stage.input(args.val_nontoxic);
  p["name"] = name;
  p["baseline"] = args.baseline;
  p["cross"] = cross;
  p["val_toxic"] = manifest.relative(val_t);
  p["val_nontoxic"] = manifest.relative(val_nt);
  std::optional<fs::path> probe_out;
  if (!probe_in) {
    probe_out = stage.output(args.probe_out);
    p["probe"] = manifest.relative(*probe_out);
  }
  const std::string metrics_name = "metrics." + name + ".jsonl";
  p["metrics"] = metrics_name;
  const fs::path metrics_path = stage.output(metrics_name);
  if (stage.up_to_date(flags.common.force, out)) return kExitOk;

  LinearProbe probe;
  if (probe_in) {
    probe = load_probe(*probe_in);
  } else {
    const Labeled train =
        stack_labeled(load_store(*train_t), load_store(*train_nt));
    ProbeTraining options;
    options.learning_rate = args.learning_rate;
    options.epochs = args.epochs;
    options.seed = manifest.seed();
    probe = train_eval_probe(train.x, train.y, options).probe;
    save_probe(*probe_out, probe);
  }
  const Labeled val = stack_labeled(load_store(val_t), load_store(val_nt));
  std::optional<SubspaceModel> model;
  if (model_path) model = load_subspace(*model_path);
  const EvalMetrics metrics =
      evaluate_removal(probe, val.x, val.y, model ? &*model : nullptr);

  ordered_json row;
  row["name"] = name;
  row["dataset"] = manifest.source();
  row["train_corpus"] = model ? model->provenance.source : manifest.source();
  row["removal"] = !args.baseline;
  row["cross"] = cross;
  const ordered_json fields = metrics_json(metrics);
  for (const auto& [key, value] : fields.items()) row[key] = value;
  write_file(metrics_path, row.dump() + "\n");
  stage.commit();
  out << "evaluate " << name << ": tox " << metrics.tox << ", non-tox "
      << metrics.non_tox << ", acc " << fixed3(metrics.acc) << ", cos "
      << fixed3(metrics.cos) << "\n";
  return kExitOk;
}

struct ReportArgs {
  std::string out_dir = "report";
  std::string run_id;
};

int cmd_report(const ReportArgs& args, const Flags& flags, std::ostream& out) {
  ManifestLock lock(flags.common.run_dir);
  RunManifest manifest = open_run(flags.common);
  if (!args.run_id.empty() && args.run_id != manifest.run_id()) {
    throw ValidationError("run directory holds " + manifest.run_id() +
                          ", not " + args.run_id);
  }
  Stage stage(manifest, "report");
  const std::string dir = args.out_dir;
  stage.params()["out_dir"] = dir;
  std::vector<std::pair<std::string, std::string>> files;

  // Tables 1 and 2 from every evaluation.
  std::vector<json> evaluations;
  for (const auto& s : manifest.stages()) {
    if (s.command != "evaluate") continue;
    const fs::path path =
        stage.input(s.config.at("metrics").get<std::string>());
    evaluations.push_back(json::parse(read_file(path)));
  }
  std::stable_sort(evaluations.begin(), evaluations.end(),
                   [](const json& a, const json& b) {
                     return std::make_tuple(a.at("removal").get<bool>(),
                                            a.at("cross").get<bool>(),
                                            a.at("name").get<std::string>()) <
                            std::make_tuple(b.at("removal").get<bool>(),
                                            b.at("cross").get<bool>(),
                                            b.at("name").get<std::string>());
                   });
  std::vector<RemovalRow> removal_rows;
  std::vector<CrossCorpusRow> cross_rows;
  for (const auto& e : evaluations) {
    const EvalMetrics m = metrics_from_json(e);
    if (!e.at("cross").get<bool>()) {
      removal_rows.push_back({e.at("dataset").get<std::string>(),
                              e.at("removal").get<bool>(), m});
    }
    if (e.at("removal").get<bool>()) {
      cross_rows.push_back({e.at("train_corpus").get<std::string>(),
                            e.at("dataset").get<std::string>(), m});
    }
  }
  if (!removal_rows.empty()) {
    files.emplace_back("table1.txt", render_removal_table(removal_rows));
    files.emplace_back("table1.jsonl", removal_jsonl(removal_rows));
  }
  if (!cross_rows.empty()) {
    files.emplace_back("table2.txt", render_cross_table(cross_rows));
    files.emplace_back("table2.jsonl", cross_jsonl(cross_rows));
  }

  // Masking similarity statistics.
  if (const StageRecord* mask = manifest.latest("mask")) {
    for (const auto& o : mask->outputs) {
      if (fs::path(o.path).filename() != "masking_stats.json") continue;
      const json s = json::parse(read_file(stage.input(o.path)));
      std::ostringstream text;
      text << "attempted " << s.at("attempted").get<long>() << ", accepted "
           << s.at("accepted").get<long>() << ", discarded (budget) "
           << s.at("discarded_budget").get<long>()
           << ", discarded (similarity) "
           << s.at("discarded_similarity").get<long>() << "\n"
           << "similarity " << fixed3(s.at("mean_similarity").get<double>())
           << " +/- " << fixed3(s.at("std_similarity").get<double>()) << "\n";
      files.emplace_back("masking.txt", text.str());
    }
  }

  // Error table, singular values and eigenvector analysis.
  const StageRecord* fit = manifest.latest("fit");
  const StageRecord* select = manifest.latest("select");
  if (fit != nullptr) {
    const EmbeddingMatrix toxic =
        load_store(stage.input(fit->config.at("toxic").get<std::string>()));
    const EmbeddingMatrix masked =
        load_store(stage.input(fit->config.at("masked").get<std::string>()));
    const SubspaceModel candidates =
        load_subspace(stage.input(fit->outputs.front().path));
    const DirectionSet dirs = compute_directions(toxic, masked);

    const auto values = singular_value_report(candidates, 7);
    files.emplace_back("singular_values.csv", singular_values_csv(values));
    files.emplace_back("singular_values.txt", render_singular_values(values));

    if (select != nullptr) {
      const SubspaceModel chosen = load_subspace(
          stage.input(select->outputs.front().path));
      const RowMatrix d = dirs.stacked();
      RowMatrix w(2 * toxic.rows(), toxic.dim());
      w << toxic.data(), masked.data();
      ErrorRow row;
      row.dataset = manifest.source();
      row.pca_input_rows = static_cast<long>(d.rows());
      row.selected_scaled_error = scaled_error(
          reconstruction_error(d, w, chosen, true), dirs.toxic);
      row.full_scaled_error = scaled_error(
          reconstruction_error(d, w, candidates, false), dirs.toxic);
      const std::vector<ErrorRow> rows = {row};
      files.emplace_back("table3.txt", render_error_table(rows));
      files.emplace_back("table3.jsonl", error_jsonl(rows));
    }

    const StageRecord* probe_stage = nullptr;
    for (const auto& s : manifest.stages()) {
      if (s.command == "evaluate" && !s.config.at("cross").get<bool>()) {
        probe_stage = &s;
      }
    }
    if (probe_stage != nullptr) {
      const auto& c = probe_stage->config;
      const LinearProbe probe =
          load_probe(stage.input(c.at("probe").get<std::string>()));
      const Labeled val = stack_labeled(
          load_store(stage.input(c.at("val_toxic").get<std::string>())),
          load_store(stage.input(c.at("val_nontoxic").get<std::string>())));
      const auto rows =
          eigenvector_analysis(candidates, probe, val.x, val.y, toxic.data(),
                               masked.data(), dirs);
      files.emplace_back("eigen_analysis.txt", render_analysis(rows));
      files.emplace_back("eigen_analysis.jsonl", analysis_jsonl(rows));
    }
  }
  if (files.empty()) {
    throw StaleArtifactError("nothing to report; run 'scrub evaluate' or "
                             "'scrub fit' first");
  }

  std::vector<fs::path> paths;
  for (const auto& [name, content] : files) {
    paths.push_back(stage.output(dir + "/" + name));
  }
  if (stage.up_to_date(flags.common.force, out)) return kExitOk;
  std::string summary;
  for (std::size_t i = 0; i < files.size(); ++i) {
    write_file(paths[i], files[i].second);
    if (files[i].first.ends_with(".txt")) {
      summary += "== " + files[i].first + "\n" + files[i].second + "\n";
    }
  }
  stage.commit();
  out << summary;
  return kExitOk;
}

// --- wiring ----------------------------------------------------------------

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--run-dir", common.run_dir,
                  "Run directory; artifact paths are relative to it")
      ->capture_default_str();
  cmd->add_option("--seed", common.seed,
                  "Run seed, fixed when the run is prepared (default 42)");
  cmd->add_flag("--force", common.force,
                "Rerun even when up to date; allow redeclaring backends");
}

void add_remote(CLI::App* cmd, RemoteFlags& remote) {
  cmd->add_option("--timeout", remote.timeout, "Request timeout in seconds")
      ->capture_default_str();
  cmd->add_option("--retries", remote.retries,
                  "Extra attempts after a failed request")
      ->capture_default_str();
  cmd->add_option("--max-batch", remote.max_batch, "Texts per request")
      ->capture_default_str();
  cmd->add_option("--max-in-flight", remote.max_in_flight,
                  "Concurrent requests")
      ->capture_default_str();
}

void add_encoder(CLI::App* cmd, EncoderFlags& encoder) {
  cmd->add_option("--encoder", encoder.kind, "toy, store or remote");
  cmd->add_option("--dim", encoder.dim, "Embedding dimension");
  cmd->add_option("--encoder-seed", encoder.seed,
                  "Toy encoder seed (default: the run seed)");
  cmd->add_option("--encoder-store", encoder.store,
                  "Embedding store for --encoder store");
  cmd->add_option("--encoder-url", encoder.url,
                  std::string("Endpoint for --encoder remote (or ") +
                      kEncoderUrlEnv + ")");
}

void add_scorer(CLI::App* cmd, ScorerFlags& scorer) {
  cmd->add_option("--scorer", scorer.kind, "lexicon, linear or remote");
  cmd->add_option("--lexicon", scorer.lexicon, "Word list for the lexicon scorer");
  cmd->add_option("--base-rate", scorer.base_rate,
                  "Lexicon scorer probability with no hits (default 0.05)");
  cmd->add_option("--scorer-model", scorer.model,
                  "Probe file for --scorer linear");
  cmd->add_option("--scorer-url", scorer.url,
                  std::string("Endpoint for --scorer remote (or ") +
                      kScorerUrlEnv + ")");
}

int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Toxic subspace identification and removal for sentence "
               "embeddings",
               "scrub"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "scrub 0.1.0");
  Flags flags;

  SynthArgs synth;
  auto* c_synth = app.add_subcommand(
      "synth", "Write a synthetic text corpus and its lexicon");
  c_synth->add_option("--out", synth.out, "Corpus JSONL path")->required();
  c_synth->add_option("--lexicon-out", synth.lexicon_out, "Lexicon path");
  c_synth->add_option("--n-toxic", synth.n_toxic)->capture_default_str();
  c_synth->add_option("--n-nontoxic", synth.n_nontoxic)->capture_default_str();
  c_synth->add_option("--vocabulary", synth.vocabulary)->capture_default_str();
  c_synth->add_option("--seed", synth.seed)->capture_default_str();

  PrepareArgs prepare;
  auto* c_prepare = app.add_subcommand(
      "prepare", "Filter a corpus and split it into train and validation");
  add_common(c_prepare, flags.common);
  add_remote(c_prepare, flags.remote);
  add_encoder(c_prepare, flags.encoder);
  add_scorer(c_prepare, flags.scorer);
  c_prepare->add_option("--corpus", prepare.corpus, "Corpus file")->required();
  c_prepare->add_option("--format", prepare.format,
                        "jsonl or csv (default: by extension)");
  c_prepare->add_option("--source", prepare.source,
                        "civil, wiki, real or custom")
      ->capture_default_str();
  c_prepare->add_option("--preset", prepare.preset,
                        "civil, real or label (default: by source)");
  c_prepare->add_flag("--confidence-filter", prepare.confidence_filter,
                      "Keep toxic records the scorer is confident about");
  c_prepare->add_option("--confidence-threshold",
                        prepare.confidence_threshold)
      ->capture_default_str();
  c_prepare->add_option("--n-val", prepare.n_val,
                        "Validation records per class")
      ->capture_default_str();
  c_prepare->add_option("--csv-id", prepare.columns.id)->capture_default_str();
  c_prepare->add_option("--csv-text", prepare.columns.text)
      ->capture_default_str();
  c_prepare->add_option("--csv-score", prepare.columns.score)
      ->capture_default_str();
  c_prepare->add_option("--csv-label", prepare.columns.label)
      ->capture_default_str();

  MaskArgs mask;
  auto* c_mask = app.add_subcommand(
      "mask", "Build the parallel corpus by greedy token masking");
  add_common(c_mask, flags.common);
  add_remote(c_mask, flags.remote);
  add_encoder(c_mask, flags.encoder);
  add_scorer(c_mask, flags.scorer);
  c_mask->add_option("--input", mask.input)->capture_default_str();
  c_mask->add_option("--out", mask.out)->capture_default_str();
  c_mask->add_option("--threshold", mask.threshold)->capture_default_str();
  c_mask->add_option("--sim-floor", mask.sim_floor)->capture_default_str();
  c_mask->add_option("--max-mask-fraction", mask.max_mask_fraction)
      ->capture_default_str();
  c_mask->add_option("--threads", mask.threads)->capture_default_str();

  EncodeArgs encode;
  auto* c_encode =
      app.add_subcommand("encode", "Encode a JSONL text field into a store");
  add_common(c_encode, flags.common);
  add_remote(c_encode, flags.remote);
  add_encoder(c_encode, flags.encoder);
  c_encode->add_option("--input", encode.input)->required();
  c_encode->add_option("--field", encode.field,
                       "text, toxic or masked")
      ->capture_default_str();
  c_encode->add_option("--out", encode.out, ".embstore path")->required();
  c_encode->add_option("--export-jsonl", encode.export_jsonl,
                       "Also write the rows as JSONL");

  FitArgs fit;
  auto* c_fit = app.add_subcommand(
      "fit", "Fit candidate eigenvectors to the toxic directions");
  add_common(c_fit, flags.common);
  c_fit->add_option("--toxic", fit.toxic)->capture_default_str();
  c_fit->add_option("--masked", fit.masked)->capture_default_str();
  c_fit->add_option("--out", fit.out)->capture_default_str();
  c_fit->add_option("--n-components", fit.n_components)->capture_default_str();
  c_fit->add_flag("--centered", fit.centered,
                  "Center the toxic directions and fit them alone");

  SelectArgs select;
  auto* c_select =
      app.add_subcommand("select", "Choose the eigenvectors to remove");
  add_common(c_select, flags.common);
  c_select->add_option("--subspace", select.subspace)->capture_default_str();
  c_select->add_option("--scores", select.scores,
                       "Scores file (default: beside --subspace)");
  c_select->add_option("--out", select.out)->capture_default_str();
  c_select->add_option("--k", select.k)->capture_default_str();
  c_select->add_option("--overrides", select.overrides,
                       "Comma-separated candidate indices, taken verbatim");

  RemoveArgs remove;
  auto* c_remove = app.add_subcommand(
      "remove", "Project the selected subspace out of a store");
  add_common(c_remove, flags.common);
  c_remove->add_option("--input", remove.input)->required();
  c_remove->add_option("--subspace", remove.subspace)->capture_default_str();
  c_remove->add_option("--out", remove.out)->required();

  EvaluateArgs evaluate;
  auto* c_evaluate = app.add_subcommand(
      "evaluate", "Probe the validation split with or without removal");
  add_common(c_evaluate, flags.common);
  c_evaluate->add_option("--train-toxic", evaluate.train_toxic)
      ->capture_default_str();
  c_evaluate->add_option("--train-nontoxic", evaluate.train_nontoxic)
      ->capture_default_str();
  c_evaluate->add_option("--val-toxic", evaluate.val_toxic)
      ->capture_default_str();
  c_evaluate->add_option("--val-nontoxic", evaluate.val_nontoxic)
      ->capture_default_str();
  c_evaluate->add_option("--subspace", evaluate.subspace)
      ->capture_default_str();
  c_evaluate->add_flag("--baseline", evaluate.baseline, "Evaluate without removal");
  c_evaluate->add_option("--probe", evaluate.probe,
                         "Use this probe instead of training one");
  c_evaluate->add_option("--probe-out", evaluate.probe_out)
      ->capture_default_str();
  c_evaluate->add_option("--name", evaluate.name,
                         "Metrics name (default: baseline or removal)");
  c_evaluate->add_option("--lr", evaluate.learning_rate)
      ->capture_default_str();
  c_evaluate->add_option("--epochs", evaluate.epochs)->capture_default_str();

  ReportArgs report;
  auto* c_report =
      app.add_subcommand("report", "Write the consolidated report tables");
  add_common(c_report, flags.common);
  c_report->add_option("--out-dir", report.out_dir)->capture_default_str();
  c_report->add_option("--run-id", report.run_id,
                       "Fail unless the run directory holds this run");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (c_synth->parsed()) return cmd_synth(synth, out);
  if (c_prepare->parsed()) return cmd_prepare(prepare, flags, out);
  if (c_mask->parsed()) return cmd_mask(mask, flags, out);
  if (c_encode->parsed()) return cmd_encode(encode, flags, out);
  if (c_fit->parsed()) return cmd_fit(fit, flags, out);
  if (c_select->parsed()) return cmd_select(select, flags, out);
  if (c_remove->parsed()) return cmd_remove(remove, flags, out);
  if (c_evaluate->parsed()) return cmd_evaluate(evaluate, flags, out);
  return cmd_report(report, flags, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const StaleArtifactError& e) {
    err << "scrub: stale: " << e.what() << "\n";
    return kExitStale;
  } catch (const BackendError& e) {
    err << "scrub: backend: " << e.what() << "\n";
    return kExitBackend;
  } catch (const ValidationError& e) {
    err << "scrub: invalid: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "scrub: invalid: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "scrub: invalid: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "scrub: error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace scrub::cli
