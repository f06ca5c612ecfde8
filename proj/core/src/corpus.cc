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

#include "scrub/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "scrub/error.h"
#include "scrub/random.h"
#include "scrub/scoring.h"

namespace scrub {

using json = nlohmann::json;

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kToxic:
      return "toxic";
    case Label::kNontoxic:
      return "nontoxic";
    case Label::kUnlabeled:
      return "unlabeled";
  }
  return "unlabeled";
}

std::string_view to_string(Source source) {
  switch (source) {
    case Source::kCivil:
      return "civil";
    case Source::kWiki:
      return "wiki";
    case Source::kReal:
      return "real";
    case Source::kCustom:
      return "custom";
  }
  return "custom";
}

Label parse_label(std::string_view text) {
  if (text == "toxic") return Label::kToxic;
  if (text == "nontoxic") return Label::kNontoxic;
  if (text == "unlabeled") return Label::kUnlabeled;
  throw ValidationError("unknown label '" + std::string(text) + "'");
}

Source parse_source(std::string_view text) {
  if (text == "civil") return Source::kCivil;
  if (text == "wiki") return Source::kWiki;
  if (text == "real") return Source::kReal;
  if (text == "custom") return Source::kCustom;
  throw ValidationError("unknown source '" + std::string(text) + "'");
}

CorpusFormat parse_format(std::string_view text) {
  if (text == "jsonl") return CorpusFormat::kJsonl;
  if (text == "csv") return CorpusFormat::kCsv;
  throw ValidationError("unknown corpus format '" + std::string(text) + "'");
}

namespace {

std::string line_context(std::size_t line) {
  return "line " + std::to_string(line) + ": ";
}

double checked_score(double score, std::size_t line) {
  if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
    throw ValidationError(line_context(line) + "score " +
                          std::to_string(score) + " outside [0, 1]");
  }
  return score;
}

Label checked_label(std::string_view text, std::size_t line) {
  if (text == "toxic") return Label::kToxic;
  if (text == "nontoxic") return Label::kNontoxic;
  throw ValidationError(line_context(line) + "label must be \"toxic\" or "
                        "\"nontoxic\", got \"" + std::string(text) + "\"");
}

void check_unique(std::vector<SentenceRecord>& records,
                  std::unordered_map<std::string, std::size_t>& seen,
                  std::size_t line) {
  const auto& id = records.back().id;
  if (id.empty()) throw ValidationError(line_context(line) + "empty id");
  auto [it, inserted] = seen.emplace(id, line);
  if (!inserted) {
    throw ValidationError(line_context(line) + "duplicate id \"" + id +
                          "\" (first seen on line " +
                          std::to_string(it->second) + ")");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open corpus " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// RFC 4180 record reader. Returns false at end of input. `line` is advanced
// past every physical line consumed.
bool next_csv_record(std::string_view content, std::size_t& pos,
                     std::size_t& line, std::vector<std::string>& fields) {
  fields.clear();
  if (pos >= content.size()) return false;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  while (pos < content.size()) {
    const char c = content[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < content.size() && content[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
          continue;
        }
        quoted = false;
        ++pos;
        continue;
      }
      if (c == '\n') ++line;
      field.push_back(c);
      ++pos;
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
      ++pos;
    } else if (c == '\r' || c == '\n') {
      pos += (c == '\r' && pos + 1 < content.size() &&
              content[pos + 1] == '\n')
                 ? 2
                 : 1;
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
      field_started = true;
      ++pos;
    }
  }
  if (quoted) {
    throw ValidationError(line_context(line) + "unterminated quoted field");
  }
  fields.push_back(std::move(field));
  ++line;
  return true;
}

}  // namespace

std::vector<SentenceRecord> parse_jsonl_corpus(std::string_view content,
                                               Source source) {
  std::vector<SentenceRecord> records;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    ++line;
    std::string_view row = content.substr(start, end - start);
    start = end + 1;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.find_first_not_of(" \t") == std::string_view::npos) continue;

    json object;
    try {
      object = json::parse(row);
    } catch (const json::parse_error& e) {
      throw ValidationError(line_context(line) + "invalid JSON: " + e.what());
    }
    if (!object.is_object()) {
      throw ValidationError(line_context(line) + "expected a JSON object");
    }
    SentenceRecord record;
    record.source = source;
    const auto id = object.find("id");
    if (id == object.end() || !id->is_string()) {
      throw ValidationError(line_context(line) + "missing string field \"id\"");
    }
    record.id = id->get<std::string>();
    const auto text = object.find("text");
    if (text == object.end() || !text->is_string()) {
      throw ValidationError(line_context(line) +
                            "missing string field \"text\"");
    }
    record.text = text->get<std::string>();
    if (const auto score = object.find("score");
        score != object.end() && !score->is_null()) {
      if (!score->is_number()) {
        throw ValidationError(line_context(line) + "\"score\" is not a number");
      }
      record.score = checked_score(score->get<double>(), line);
    }
    if (const auto label = object.find("label");
        label != object.end() && !label->is_null()) {
      if (!label->is_string()) {
        throw ValidationError(line_context(line) + "\"label\" is not a string");
      }
      record.raw_label = checked_label(label->get<std::string>(), line);
    }
    records.push_back(std::move(record));
    check_unique(records, seen, line);
  }
  if (records.empty()) throw ValidationError("corpus is empty");
  return records;
}

std::vector<SentenceRecord> parse_csv_corpus(std::string_view content,
                                             Source source,
                                             const CsvColumns& columns) {
  std::size_t pos = 0;
  std::size_t line = 1;
  std::vector<std::string> fields;
  if (!next_csv_record(content, pos, line, fields)) {
    throw ValidationError("corpus is empty");
  }
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(fields.begin(), fields.end(), name);
    if (it == fields.end()) return std::nullopt;
    return static_cast<std::size_t>(it - fields.begin());
  };
  const auto id_col = column(columns.id);
  const auto text_col = column(columns.text);
  const auto score_col = column(columns.score);
  const auto label_col = column(columns.label);
  if (!id_col || !text_col) {
    throw ValidationError("line 1: header must name columns \"" + columns.id +
                          "\" and \"" + columns.text + "\"");
  }
  const std::size_t width = fields.size();

  std::vector<SentenceRecord> records;
  std::unordered_map<std::string, std::size_t> seen;
  while (true) {
    const std::size_t row_line = line;
    if (!next_csv_record(content, pos, line, fields)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != width) {
      throw ValidationError(line_context(row_line) + "expected " +
                            std::to_string(width) + " fields, got " +
                            std::to_string(fields.size()));
    }
    SentenceRecord record;
    record.source = source;
    record.id = fields[*id_col];
    record.text = fields[*text_col];
    if (score_col && !fields[*score_col].empty()) {
      double score = 0.0;
      try {
        std::size_t used = 0;
        score = std::stod(fields[*score_col], &used);
        if (used != fields[*score_col].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ValidationError(line_context(row_line) + "score \"" +
                              fields[*score_col] + "\" is not a number");
      }
      record.score = checked_score(score, row_line);
    }
    if (label_col && !fields[*label_col].empty()) {
      record.raw_label = checked_label(fields[*label_col], row_line);
    }
    records.push_back(std::move(record));
    check_unique(records, seen, row_line);
  }
  if (records.empty()) throw ValidationError("corpus has no rows");
  return records;
}

std::vector<SentenceRecord> load_corpus(const std::filesystem::path& path,
                                        CorpusFormat format, Source source,
                                        const CsvColumns& columns) {
  const std::string content = read_file(path);
  try {
    return format == CorpusFormat::kJsonl
               ? parse_jsonl_corpus(content, source)
               : parse_csv_corpus(content, source, columns);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_jsonl_corpus(const std::filesystem::path& path,
                        std::span<const SentenceRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  for (const auto& record : records) {
    nlohmann::ordered_json row;
    row["id"] = record.id;
    row["text"] = record.text;
    if (record.score) row["score"] = *record.score;
    if (record.label != Label::kUnlabeled) {
      row["label"] = to_string(record.label);
    } else if (record.raw_label) {
      row["label"] = to_string(*record.raw_label);
    }
    out << row.dump() << '\n';
  }
}

FilterPreset parse_preset(std::string_view text) {
  if (text == "civil") return FilterPreset::kCivil;
  if (text == "real") return FilterPreset::kReal;
  if (text == "label" || text == "wiki") return FilterPreset::kLabel;
  throw ValidationError("unknown filter preset '" + std::string(text) + "'");
}

std::string_view to_string(FilterPreset preset) {
  switch (preset) {
    case FilterPreset::kCivil:
      return "civil";
    case FilterPreset::kReal:
      return "real";
    case FilterPreset::kLabel:
      return "label";
  }
  return "label";
}

FilterPreset default_preset(Source source) {
  switch (source) {
    case Source::kCivil:
      return FilterPreset::kCivil;
    case Source::kReal:
      return FilterPreset::kReal;
    default:
      return FilterPreset::kLabel;
  }
}

namespace {

std::optional<Label> preset_label(const SentenceRecord& record,
                                  FilterPreset preset) {
  if (preset == FilterPreset::kLabel) {
    if (!record.raw_label) {
      throw ValidationError("label preset: record \"" + record.id +
                            "\" has no label field");
    }
    return *record.raw_label;
  }
  if (!record.score) {
    throw ValidationError(std::string(to_string(preset)) +
                          " preset: record \"" + record.id +
                          "\" has no score field");
  }
  const double score = *record.score;
  if (preset == FilterPreset::kCivil) {
    if (score > 0.75) return Label::kToxic;
    if (score == 0.0) return Label::kNontoxic;
    return std::nullopt;
  }
  if (score > 0.7) return Label::kToxic;
  if (score < 0.3) return Label::kNontoxic;
  return std::nullopt;
}

}  // namespace

std::vector<SentenceRecord> apply_filter_rules(
    std::span<const SentenceRecord> records, const FilterRules& rules,
    const ToxicityScorer* scorer) {
  if (rules.confidence_filter && scorer == nullptr) {
    throw ValidationError(
        "confidence filter requested but no toxicity scorer is configured");
  }
  std::vector<SentenceRecord> kept;
  for (const auto& record : records) {
    if (auto label = preset_label(record, rules.preset)) {
      kept.push_back(record);
      kept.back().label = *label;
    }
  }
  if (!rules.confidence_filter) return kept;

  std::vector<std::string> toxic_texts;
  for (const auto& record : kept) {
    if (record.label == Label::kToxic) toxic_texts.push_back(record.text);
  }
  if (toxic_texts.empty()) return kept;
  const std::vector<double> probs = scorer->score_batch(toxic_texts);

  std::vector<SentenceRecord> confident;
  std::size_t next = 0;
  for (auto& record : kept) {
    if (record.label == Label::kToxic &&
        !(probs[next++] > rules.confidence_threshold)) {
      continue;
    }
    confident.push_back(std::move(record));
  }
  return confident;
}

namespace {

// Partial Fisher-Yates: the first `count` entries of the returned order
// are a uniform sample without replacement.
std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  return order;
}

std::vector<SentenceRecord> gather(std::span<const SentenceRecord> pool,
                                   std::vector<std::size_t> picks) {
  std::sort(picks.begin(), picks.end());
  std::vector<SentenceRecord> out;
  out.reserve(picks.size());
  for (std::size_t i : picks) out.push_back(pool[i]);
  return out;
}

}  // namespace

CorpusSplit make_split(std::span<const SentenceRecord> records,
                       std::size_t n_val_per_class, std::uint64_t seed) {
  std::vector<SentenceRecord> toxic;
  std::vector<SentenceRecord> nontoxic;
  for (const auto& record : records) {
    if (record.label == Label::kToxic) toxic.push_back(record);
    if (record.label == Label::kNontoxic) nontoxic.push_back(record);
  }
  auto require = [&](std::size_t have, const char* name) {
    if (have < n_val_per_class) {
      throw ValidationError(
          "need " + std::to_string(n_val_per_class) + " " + name +
          " records for validation, have " + std::to_string(have) +
          " (short by " + std::to_string(n_val_per_class - have) + ")");
    }
  };
  require(toxic.size(), "toxic");
  require(nontoxic.size(), "nontoxic");

  Rng rng(seed);
  const auto toxic_order = shuffled(toxic.size(), rng);
  const auto nontoxic_order = shuffled(nontoxic.size(), rng);
  const std::size_t n_train = std::min(toxic.size(), nontoxic.size()) -
                              n_val_per_class;

  auto slice = [](const std::vector<std::size_t>& order, std::size_t begin,
                  std::size_t end) {
    return std::vector<std::size_t>(order.begin() + begin,
                                    order.begin() + end);
  };
  CorpusSplit split;
  split.seed = seed;
  split.val_toxic = gather(toxic, slice(toxic_order, 0, n_val_per_class));
  split.val_nontoxic =
      gather(nontoxic, slice(nontoxic_order, 0, n_val_per_class));
  split.train_toxic = gather(
      toxic, slice(toxic_order, n_val_per_class, n_val_per_class + n_train));
  split.train_nontoxic =
      gather(nontoxic, slice(nontoxic_order, n_val_per_class,
                             n_val_per_class + n_train));
  return split;
}

}  // namespace scrub
