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

#ifndef SCRUB_CORPUS_H_
#define SCRUB_CORPUS_H_

// Toxicity corpus ingestion: loading, per-dataset label filtering and the
// balanced train/validation split.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scrub {

class ToxicityScorer;

enum class Label { kToxic, kNontoxic, kUnlabeled };
enum class Source { kCivil, kWiki, kReal, kCustom };
enum class CorpusFormat { kJsonl, kCsv };

std::string_view to_string(Label label);
std::string_view to_string(Source source);
Label parse_label(std::string_view text);
Source parse_source(std::string_view text);
CorpusFormat parse_format(std::string_view text);

struct SentenceRecord {
  std::string id;
  std::string text;
  Label label = Label::kUnlabeled;
  // Annotator fraction or API score in [0, 1].
  std::optional<double> score;
  Source source = Source::kCustom;
  // Label column as read from the file, kept so filtering can be re-run.
  std::optional<Label> raw_label;

  bool operator==(const SentenceRecord&) const = default;
};

// Column names for CSV input. JSONL always uses the canonical names.
struct CsvColumns {
  std::string id = "id";
  std::string text = "text";
  std::string score = "score";
  std::string label = "label";
};

// One record per row in file order, every label kUnlabeled. Throws
// ValidationError naming the 1-based line on malformed rows, on duplicate
// ids and on empty files.
std::vector<SentenceRecord> load_corpus(const std::filesystem::path& path,
                                        CorpusFormat format, Source source,
                                        const CsvColumns& columns = {});

// Same as load_corpus for in-memory JSONL text.
std::vector<SentenceRecord> parse_jsonl_corpus(std::string_view content,
                                               Source source);
std::vector<SentenceRecord> parse_csv_corpus(std::string_view content,
                                             Source source,
                                             const CsvColumns& columns = {});

void write_jsonl_corpus(const std::filesystem::path& path,
                        std::span<const SentenceRecord> records);

enum class FilterPreset {
  kCivil,  // score > 0.75 toxic, score == 0 nontoxic, else dropped
  kReal,   // score > 0.7 toxic, score < 0.3 nontoxic, else dropped
  kLabel,  // binary label passes through (Wikipedia Toxicity Subtypes)
};

FilterPreset parse_preset(std::string_view text);
std::string_view to_string(FilterPreset preset);
FilterPreset default_preset(Source source);

struct FilterRules {
  FilterPreset preset = FilterPreset::kLabel;
  // Keep toxic records only when the scorer puts them above the
  // confidence threshold. Applied after the preset thresholds.
  bool confidence_filter = false;
  double confidence_threshold = 0.8;
};

// All comparisons are strict; boundary scores are dropped. `scorer` is
// required iff rules.confidence_filter is set.
std::vector<SentenceRecord> apply_filter_rules(
    std::span<const SentenceRecord> records, const FilterRules& rules,
    const ToxicityScorer* scorer = nullptr);

struct CorpusSplit {
  std::vector<SentenceRecord> train_toxic;
  std::vector<SentenceRecord> train_nontoxic;
  std::vector<SentenceRecord> val_toxic;
  std::vector<SentenceRecord> val_nontoxic;
  std::uint64_t seed = 0;
};

// Samples n_val_per_class validation records per class uniformly without
// replacement, then undersamples the larger remaining class so both
// training partitions have equal size. Partitions keep input order.
// Unlabeled records are ignored.
CorpusSplit make_split(std::span<const SentenceRecord> records,
                       std::size_t n_val_per_class, std::uint64_t seed);

}  // namespace scrub

#endif  // SCRUB_CORPUS_H_
