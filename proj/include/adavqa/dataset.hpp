#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adavqa/numerics.hpp"

namespace adavqa {

/// Ordered answer vocabulary with a reverse index. Ids are assigned in
/// first-appearance order.
class AnswerVocab {
 public:
  int add_or_get(const std::string& answer);
  int id_of(std::string_view answer) const;  // -1 when absent
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> index_;
};

/// Ordered question-type registry, same shape as AnswerVocab.
class QTypeRegistry {
 public:
  int add_or_get(const std::string& qtype);
  int id_of(std::string_view qtype) const;
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int, std::less<>> index_;
};

/// One question: its type, the annotator answer tally, and (for synthetic
/// or benchmark data) a feature vector. answer_counts is sorted by answer id.
struct Record {
  std::string question_id;
  int qtype_id = -1;
  std::vector<std::pair<int, int>> answer_counts;
  Vec64 features;  // empty when absent

  int count_of(int answer_id) const;
  /// Answer id with the highest count; ties break toward the lower id.
  int top_answer() const;
};

/// Per-question-type answer occurrence counts.
struct CountTable {
  int num_types = 0;
  int num_answers = 0;
  std::vector<std::int64_t> counts;  // row-major [type][answer]

  CountTable() = default;
  CountTable(int types, int answers)
      : num_types(types), num_answers(answers),
        counts(static_cast<std::size_t>(types) * static_cast<std::size_t>(answers), 0) {}

  std::int64_t at(int type, int answer) const {
    return counts[static_cast<std::size_t>(type) * num_answers + answer];
  }
  std::int64_t& at(int type, int answer) {
    return counts[static_cast<std::size_t>(type) * num_answers + answer];
  }
};

struct LoadedAnnotations {
  AnswerVocab vocab;
  QTypeRegistry registry;
  std::vector<Record> records;
};

/// Parses VQA-CP-format question/annotation files (JSON arrays, UTF-8).
/// Only question_id, question_type and the answers array are consumed;
/// unknown fields are ignored. Questions and annotations must reference
/// each other one-to-one.
LoadedAnnotations load_vqacp_annotations(const std::filesystem::path& questions_file,
                                         const std::filesystem::path& annotations_file);

/// Same, but parsing in-memory JSON text (used by tests and the loader).
LoadedAnnotations parse_vqacp_annotations(std::string_view questions_json,
                                          std::string_view annotations_json);

/// Drops answers with total occurrence count < min_count, reassigning ids.
/// Records keep only counts of surviving answers.
void prune_vocab(LoadedAnnotations& data, int min_count);

CountTable build_count_table(const std::vector<Record>& records, const AnswerVocab& vocab,
                             const QTypeRegistry& registry);

/// Soft multi-label target: a_i = min(1, count_i / 3).
Vec64 soft_targets(const Record& record, const AnswerVocab& vocab);

enum class Split { Train, Test };

/// Synthetic distribution-shift benchmark configuration. Train answer
/// priors are per-type Zipf-skewed permutations; test priors invert the
/// frequency ranking (most frequent at train becomes least frequent at test).
struct ShiftConfig {
  std::string preset = "default";
  int num_types = 0;
  int num_answers = 0;
  std::vector<Vec64> train_priors;  // one per type, each over answers
  std::vector<Vec64> test_priors;
  double evidence_noise_sigma = 0.0;
  double type_signal_gain = 1.0;
  int n_train = 0;
  int n_test = 0;
  std::uint64_t seed = 0;

  int feature_dim() const { return num_types + num_answers; }
  void validate() const;
};

/// Presets: default, mild, severe.
ShiftConfig make_shift_config(const std::string& preset_name);

/// Draws one split. Features are concat(gain * onehot(qtype),
/// onehot(answer) + N(0, sigma^2) noise); labels are unanimous
/// (count 10 for the drawn answer). Deterministic given seed and split.
std::vector<Record> sample_dataset(const ShiftConfig& config, Split split, const Rng& rng);

/// Vocabulary/registry shared by both synthetic splits: answers a0..a{n-1},
/// types t0..t{K-1}.
AnswerVocab synthetic_vocab(const ShiftConfig& config);
QTypeRegistry synthetic_registry(const ShiftConfig& config);

struct SyntheticDataset {
  ShiftConfig config;
  AnswerVocab vocab;
  QTypeRegistry registry;
  std::map<std::string, std::string> categories;  // answer -> yes/no|number|other
  std::vector<Record> train;
  std::vector<Record> test;
};

SyntheticDataset generate_dataset(const ShiftConfig& config);

/// On-disk layout: train.jsonl / test.jsonl (one record object per line)
/// plus manifest.json carrying the config, vocab, registry and categories.
void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data);
SyntheticDataset load_dataset(const std::filesystem::path& dir);

}  // namespace adavqa
