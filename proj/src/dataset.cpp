#include "adavqa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "adavqa/io.hpp"

namespace adavqa {

using nlohmann::json;

int AnswerVocab::add_or_get(const std::string& answer) {
  auto it = index_.find(answer);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(names_.size());
  names_.push_back(answer);
  index_.emplace(answer, id);
  return id;
}

int AnswerVocab::id_of(std::string_view answer) const {
  auto it = index_.find(answer);
  return it == index_.end() ? -1 : it->second;
}

int QTypeRegistry::add_or_get(const std::string& qtype) {
  auto it = index_.find(qtype);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(names_.size());
  names_.push_back(qtype);
  index_.emplace(qtype, id);
  return id;
}

int QTypeRegistry::id_of(std::string_view qtype) const {
  auto it = index_.find(qtype);
  return it == index_.end() ? -1 : it->second;
}

int Record::count_of(int answer_id) const {
  auto it = std::lower_bound(answer_counts.begin(), answer_counts.end(),
                             std::make_pair(answer_id, 0),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
  if (it != answer_counts.end() && it->first == answer_id) return it->second;
  return 0;
}

int Record::top_answer() const {
  int best_id = -1;
  int best_count = 0;
  for (const auto& [id, count] : answer_counts) {
    if (count > best_count) {
      best_count = count;
      best_id = id;
    }
  }
  return best_id;
}

namespace {

json parse_json_or_throw(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(what + ": " + e.what());
  }
}

// Accepts either a bare array or an object wrapping the array under `key`.
const json& entry_array(const json& doc, const char* key, const std::string& what) {
  if (doc.is_array()) return doc;
  if (doc.is_object() && doc.contains(key) && doc[key].is_array()) return doc[key];
  throw std::runtime_error(what + ": expected an array of entries (or an object with '" +
                           key + "')");
}

std::string id_to_string(const json& id) {
  if (id.is_string()) return id.get<std::string>();
  if (id.is_number_integer()) return std::to_string(id.get<std::int64_t>());
  throw std::runtime_error("question_id must be a string or integer");
}

}  // namespace

LoadedAnnotations parse_vqacp_annotations(std::string_view questions_json,
                                          std::string_view annotations_json) {
  const json qdoc = parse_json_or_throw(questions_json, "questions file");
  const json adoc = parse_json_or_throw(annotations_json, "annotations file");
  const json& questions = entry_array(qdoc, "questions", "questions file");
  const json& annotations = entry_array(adoc, "annotations", "annotations file");

  std::set<std::string> question_ids;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    const json& q = questions[i];
    if (!q.is_object() || !q.contains("question_id")) {
      throw std::runtime_error("questions file: entry " + std::to_string(i) +
                               " lacks question_id");
    }
    const std::string id = id_to_string(q["question_id"]);
    if (!question_ids.insert(id).second) {
      throw std::runtime_error("questions file: duplicate question_id " + id);
    }
  }

  LoadedAnnotations out;
  std::set<std::string> annotated_ids;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const json& a = annotations[i];
    const std::string where = "annotations file: entry " + std::to_string(i);
    if (!a.is_object() || !a.contains("question_id")) {
      throw std::runtime_error(where + " lacks question_id");
    }
    if (!a.contains("question_type") || !a["question_type"].is_string()) {
      throw std::runtime_error(where + " lacks question_type");
    }
    if (!a.contains("answers") || !a["answers"].is_array()) {
      throw std::runtime_error(where + " lacks answers array");
    }
    Record rec;
    rec.question_id = id_to_string(a["question_id"]);
    if (!question_ids.count(rec.question_id)) {
      throw std::runtime_error(where + ": question_id " + rec.question_id +
                               " not present in questions file");
    }
    if (!annotated_ids.insert(rec.question_id).second) {
      throw std::runtime_error(where + ": duplicate annotation for question_id " +
                               rec.question_id);
    }
    rec.qtype_id = out.registry.add_or_get(a["question_type"].get<std::string>());

    const json& answers = a["answers"];
    if (answers.size() > 10) {
      throw std::runtime_error(where + ": " + std::to_string(answers.size()) +
                               " annotator answers, at most 10 allowed");
    }
    std::map<int, int> tally;
    for (std::size_t k = 0; k < answers.size(); ++k) {
      const json& entry = answers[k];
      std::string text;
      if (entry.is_string()) {
        text = entry.get<std::string>();
      } else if (entry.is_object() && entry.contains("answer") && entry["answer"].is_string()) {
        text = entry["answer"].get<std::string>();
      } else {
        throw std::runtime_error(where + ": answers[" + std::to_string(k) +
                                 "] has no answer string");
      }
      tally[out.vocab.add_or_get(text)] += 1;
    }
    rec.answer_counts.assign(tally.begin(), tally.end());
    out.records.push_back(std::move(rec));
  }

  for (const std::string& id : question_ids) {
    if (!annotated_ids.count(id)) {
      throw std::runtime_error("questions file: question_id " + id +
                               " has no matching annotation");
    }
  }
  return out;
}

LoadedAnnotations load_vqacp_annotations(const std::filesystem::path& questions_file,
                                         const std::filesystem::path& annotations_file) {
  return parse_vqacp_annotations(read_text_file(questions_file),
                                 read_text_file(annotations_file));
}

void prune_vocab(LoadedAnnotations& data, int min_count) {
  if (min_count <= 1) return;
  std::vector<std::int64_t> totals(static_cast<std::size_t>(data.vocab.size()), 0);
  for (const Record& rec : data.records) {
    for (const auto& [id, count] : rec.answer_counts) totals[static_cast<std::size_t>(id)] += count;
  }
  AnswerVocab pruned;
  std::vector<int> remap(totals.size(), -1);
  for (int id = 0; id < data.vocab.size(); ++id) {
    if (totals[static_cast<std::size_t>(id)] >= min_count) {
      remap[static_cast<std::size_t>(id)] = pruned.add_or_get(data.vocab.name(id));
    }
  }
  for (Record& rec : data.records) {
    std::vector<std::pair<int, int>> kept;
    for (const auto& [id, count] : rec.answer_counts) {
      const int new_id = remap[static_cast<std::size_t>(id)];
      if (new_id >= 0) kept.emplace_back(new_id, count);
    }
    rec.answer_counts = std::move(kept);
  }
  data.vocab = std::move(pruned);
}

CountTable build_count_table(const std::vector<Record>& records, const AnswerVocab& vocab,
                             const QTypeRegistry& registry) {
  CountTable table(registry.size(), vocab.size());
  for (const Record& rec : records) {
    if (rec.qtype_id < 0 || rec.qtype_id >= table.num_types) {
      throw std::out_of_range("build_count_table: qtype id out of range");
    }
    for (const auto& [answer_id, count] : rec.answer_counts) {
      if (answer_id < 0 || answer_id >= table.num_answers) {
        throw std::out_of_range("build_count_table: answer id out of range");
      }
      table.at(rec.qtype_id, answer_id) += count;
    }
  }
  return table;
}

Vec64 soft_targets(const Record& record, const AnswerVocab& vocab) {
  Vec64 targets(static_cast<std::size_t>(vocab.size()), 0.0);
  for (const auto& [answer_id, count] : record.answer_counts) {
    targets[static_cast<std::size_t>(answer_id)] = std::min(1.0, count / 3.0);
  }
  return targets;
}

void ShiftConfig::validate() const {
  if (num_types < 1 || num_answers < 2) {
    throw std::invalid_argument("ShiftConfig: need at least 1 type and 2 answers");
  }
  if (n_train < 1 || n_test < 1) throw std::invalid_argument("ShiftConfig: empty split");
  if (evidence_noise_sigma < 0.0 || type_signal_gain < 0.0) {
    throw std::invalid_argument("ShiftConfig: sigma and gain must be nonnegative");
  }
  auto check_priors = [&](const std::vector<Vec64>& priors, const char* which) {
    if (static_cast<int>(priors.size()) != num_types) {
      throw std::invalid_argument(std::string("ShiftConfig: ") + which + " size mismatch");
    }
    for (const Vec64& p : priors) {
      if (static_cast<int>(p.size()) != num_answers) {
        throw std::invalid_argument(std::string("ShiftConfig: ") + which + " row size mismatch");
      }
      double sum = 0.0;
      for (double x : p) {
        if (x < 0.0) throw std::invalid_argument("ShiftConfig: negative prior entry");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument(std::string("ShiftConfig: ") + which +
                                    " row does not sum to 1");
      }
    }
  };
  check_priors(train_priors, "train_priors");
  check_priors(test_priors, "test_priors");
}

namespace {

// Zipf weights 1/(r+1)^alpha, normalized, rank 0 heaviest.
Vec64 zipf_weights(int n, double alpha) {
  Vec64 w(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (int r = 0; r < n; ++r) {
    w[static_cast<std::size_t>(r)] = 1.0 / std::pow(static_cast<double>(r + 1), alpha);
    sum += w[static_cast<std::size_t>(r)];
  }
  for (auto& x : w) x /= sum;
  return w;
}

}  // namespace

ShiftConfig make_shift_config(const std::string& preset_name) {
  ShiftConfig cfg;
  cfg.preset = preset_name;
  cfg.num_types = 5;
  cfg.num_answers = 10;
  cfg.n_train = 5000;
  cfg.n_test = 2000;
  cfg.seed = 1;
  double alpha = 0.0;
  if (preset_name == "default") {
    cfg.evidence_noise_sigma = 0.5;
    cfg.type_signal_gain = 1.0;
    alpha = 1.0;
  } else if (preset_name == "mild") {
    cfg.evidence_noise_sigma = 0.25;
    cfg.type_signal_gain = 0.5;
    alpha = 0.6;
  } else if (preset_name == "severe") {
    cfg.evidence_noise_sigma = 1.0;
    cfg.type_signal_gain = 2.0;
    alpha = 1.4;
  } else {
    throw std::invalid_argument("unknown preset '" + preset_name +
                                "' (available: default, mild, severe)");
  }

  const Vec64 zipf = zipf_weights(cfg.num_answers, alpha);
  for (int k = 0; k < cfg.num_types; ++k) {
    Vec64 train(static_cast<std::size_t>(cfg.num_answers));
    Vec64 test(static_cast<std::size_t>(cfg.num_answers));
    for (int a = 0; a < cfg.num_answers; ++a) {
      // answer a holds frequency rank (a - k) mod n at train; the test
      // prior flips the ranking so the trained-frequent answer is rare.
      const int rank = ((a - k) % cfg.num_answers + cfg.num_answers) % cfg.num_answers;
      train[static_cast<std::size_t>(a)] = zipf[static_cast<std::size_t>(rank)];
      test[static_cast<std::size_t>(a)] = zipf[static_cast<std::size_t>(cfg.num_answers - 1 - rank)];
    }
    cfg.train_priors.push_back(std::move(train));
    cfg.test_priors.push_back(std::move(test));
  }
  cfg.validate();
  return cfg;
}

std::vector<Record> sample_dataset(const ShiftConfig& config, Split split, const Rng& rng) {
  config.validate();
  const bool train = split == Split::Train;
  Rng stream = rng.split(train ? "train" : "test");
  const auto& priors = train ? config.train_priors : config.test_priors;
  const int n = train ? config.n_train : config.n_test;
  const char* prefix = train ? "train" : "test";

  std::vector<Record> records;
  records.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng r = stream.split(static_cast<std::uint64_t>(i));
    const int qtype = static_cast<int>(r.next_below(static_cast<std::uint64_t>(config.num_types)));
    const Vec64& prior = priors[static_cast<std::size_t>(qtype)];
    const double u = r.next_double();
    int answer = config.num_answers - 1;
    double cdf = 0.0;
    for (int a = 0; a < config.num_answers; ++a) {
      cdf += prior[static_cast<std::size_t>(a)];
      if (u < cdf) {
        answer = a;
        break;
      }
    }

    Record rec;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%06d", prefix, i);
    rec.question_id = buf;
    rec.qtype_id = qtype;
    rec.answer_counts = {{answer, 10}};
    rec.features = Vec64(static_cast<std::size_t>(config.feature_dim()), 0.0);
    rec.features[static_cast<std::size_t>(qtype)] = config.type_signal_gain;
    for (int a = 0; a < config.num_answers; ++a) {
      const double noise = config.evidence_noise_sigma * r.next_gaussian();
      rec.features[static_cast<std::size_t>(config.num_types + a)] =
          (a == answer ? 1.0 : 0.0) + noise;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

AnswerVocab synthetic_vocab(const ShiftConfig& config) {
  AnswerVocab vocab;
  for (int a = 0; a < config.num_answers; ++a) vocab.add_or_get("a" + std::to_string(a));
  return vocab;
}

QTypeRegistry synthetic_registry(const ShiftConfig& config) {
  QTypeRegistry registry;
  for (int k = 0; k < config.num_types; ++k) registry.add_or_get("t" + std::to_string(k));
  return registry;
}

SyntheticDataset generate_dataset(const ShiftConfig& config) {
  SyntheticDataset data;
  data.config = config;
  data.vocab = synthetic_vocab(config);
  data.registry = synthetic_registry(config);
  for (const std::string& answer : data.vocab.names()) data.categories[answer] = "other";
  Rng rng(config.seed);
  data.train = sample_dataset(config, Split::Train, rng);
  data.test = sample_dataset(config, Split::Test, rng);
  return data;
}

namespace {

json record_to_json(const Record& rec, const AnswerVocab& vocab, const QTypeRegistry& registry) {
  json counts = json::object();
  for (const auto& [id, count] : rec.answer_counts) counts[vocab.name(id)] = count;
  json features = json::array();
  for (double x : rec.features) features.push_back(x);
  return json{{"question_id", rec.question_id},
              {"qtype", registry.name(rec.qtype_id)},
              {"answer_counts", std::move(counts)},
              {"features", std::move(features)}};
}

Record record_from_json(const json& j, const AnswerVocab& vocab, const QTypeRegistry& registry) {
  Record rec;
  rec.question_id = j.at("question_id").get<std::string>();
  const std::string qtype = j.at("qtype").get<std::string>();
  rec.qtype_id = registry.id_of(qtype);
  if (rec.qtype_id < 0) throw std::runtime_error("record references unknown qtype " + qtype);
  std::map<int, int> tally;
  for (const auto& [name, count] : j.at("answer_counts").items()) {
    const int id = vocab.id_of(name);
    if (id < 0) throw std::runtime_error("record references unknown answer " + name);
    tally[id] = count.get<int>();
  }
  rec.answer_counts.assign(tally.begin(), tally.end());
  std::vector<double> xs;
  for (const auto& x : j.at("features")) xs.push_back(x.get<double>());
  rec.features = Vec64::from(std::move(xs));
  return rec;
}

std::string records_to_jsonl(const std::vector<Record>& records, const AnswerVocab& vocab,
                             const QTypeRegistry& registry) {
  std::string out;
  for (const Record& rec : records) {
    out += record_to_json(rec, vocab, registry).dump();
    out += '\n';
  }
  return out;
}

std::vector<Record> records_from_jsonl(const std::string& text, const AnswerVocab& vocab,
                                       const QTypeRegistry& registry) {
  std::vector<Record> records;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(json::parse(line), vocab, registry));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format"] = "adavqa-dataset-v1";
  manifest["preset"] = data.config.preset;
  manifest["num_types"] = data.config.num_types;
  manifest["num_answers"] = data.config.num_answers;
  manifest["n_train"] = data.config.n_train;
  manifest["n_test"] = data.config.n_test;
  manifest["evidence_noise_sigma"] = data.config.evidence_noise_sigma;
  manifest["type_signal_gain"] = data.config.type_signal_gain;
  manifest["seed"] = data.config.seed;
  manifest["feature_dim"] = data.config.feature_dim();
  json train_priors = json::array();
  json test_priors = json::array();
  for (const Vec64& p : data.config.train_priors) train_priors.push_back(p.raw());
  for (const Vec64& p : data.config.test_priors) test_priors.push_back(p.raw());
  manifest["train_priors"] = std::move(train_priors);
  manifest["test_priors"] = std::move(test_priors);
  manifest["answers"] = data.vocab.names();
  manifest["question_types"] = data.registry.names();
  manifest["categories"] = data.categories;

  write_text_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  write_text_file_atomic(dir / "train.jsonl",
                         records_to_jsonl(data.train, data.vocab, data.registry));
  write_text_file_atomic(dir / "test.jsonl",
                         records_to_jsonl(data.test, data.vocab, data.registry));
}

SyntheticDataset load_dataset(const std::filesystem::path& dir) {
  const json manifest = parse_json_or_throw(read_text_file(dir / "manifest.json"),
                                            (dir / "manifest.json").string());
  SyntheticDataset data;
  ShiftConfig& cfg = data.config;
  cfg.preset = manifest.at("preset").get<std::string>();
  cfg.num_types = manifest.at("num_types").get<int>();
  cfg.num_answers = manifest.at("num_answers").get<int>();
  cfg.n_train = manifest.at("n_train").get<int>();
  cfg.n_test = manifest.at("n_test").get<int>();
  cfg.evidence_noise_sigma = manifest.at("evidence_noise_sigma").get<double>();
  cfg.type_signal_gain = manifest.at("type_signal_gain").get<double>();
  cfg.seed = manifest.at("seed").get<std::uint64_t>();
  for (const auto& row : manifest.at("train_priors")) {
    cfg.train_priors.push_back(Vec64::from(row.get<std::vector<double>>()));
  }
  for (const auto& row : manifest.at("test_priors")) {
    cfg.test_priors.push_back(Vec64::from(row.get<std::vector<double>>()));
  }
  cfg.validate();
  for (const auto& name : manifest.at("answers")) {
    data.vocab.add_or_get(name.get<std::string>());
  }
  for (const auto& name : manifest.at("question_types")) {
    data.registry.add_or_get(name.get<std::string>());
  }
  if (manifest.contains("categories")) {
    for (const auto& [answer, cat] : manifest.at("categories").items()) {
      data.categories[answer] = cat.get<std::string>();
    }
  }
  try {
    data.train = records_from_jsonl(read_text_file(dir / "train.jsonl"), data.vocab, data.registry);
    data.test = records_from_jsonl(read_text_file(dir / "test.jsonl"), data.vocab, data.registry);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(dir.string() + ": " + e.what());
  }
  return data;
}

}  // namespace adavqa
