#include "adavqa/margins.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "adavqa/io.hpp"

namespace adavqa {

using nlohmann::json;

Mat64 normalized_frequencies(const CountTable& counts, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("normalized_frequencies: epsilon must be > 0");
  Mat64 freq(static_cast<std::size_t>(counts.num_types),
             static_cast<std::size_t>(counts.num_answers));
  for (int k = 0; k < counts.num_types; ++k) {
    double total = epsilon;
    for (int a = 0; a < counts.num_answers; ++a) total += static_cast<double>(counts.at(k, a));
    for (int a = 0; a < counts.num_answers; ++a) {
      freq.at(static_cast<std::size_t>(k), static_cast<std::size_t>(a)) =
          (static_cast<double>(counts.at(k, a)) + epsilon) / total;
    }
  }
  return freq;
}

Mat64 adapted_margins(const Mat64& freq) {
  Mat64 margin(freq.rows(), freq.cols());
  for (std::size_t i = 0; i < freq.rows(); ++i) {
    for (std::size_t j = 0; j < freq.cols(); ++j) {
      const double f = freq.at(i, j);
      if (f < 0.0 || f > 1.0) throw std::invalid_argument("adapted_margins: entry outside [0,1]");
      margin.at(i, j) = 1.0 - f;
    }
  }
  return margin;
}

double type_entropy(std::span<const double> freq_row) {
  double e = 0.0;
  for (double p : freq_row) {
    if (p < 0.0) throw std::invalid_argument("type_entropy: negative entry");
    if (p > 0.0) e -= p * std::log2(p);
  }
  return e;
}

MarginTable build_margin_table(const CountTable& counts, double epsilon) {
  MarginTable table;
  table.num_types = counts.num_types;
  table.num_answers = counts.num_answers;
  table.epsilon = epsilon;
  table.freq = normalized_frequencies(counts, epsilon);
  table.margin = adapted_margins(table.freq);
  table.entropy = Vec64(static_cast<std::size_t>(counts.num_types));
  table.unseen.resize(static_cast<std::size_t>(counts.num_types), false);
  for (int k = 0; k < counts.num_types; ++k) {
    std::int64_t total = 0;
    for (int a = 0; a < counts.num_answers; ++a) total += counts.at(k, a);
    table.unseen[static_cast<std::size_t>(k)] = total == 0;
    table.entropy[static_cast<std::size_t>(k)] =
        type_entropy(table.freq.row(static_cast<std::size_t>(k)));
  }
  return table;
}

Vec64 effective_margins(const MarginTable& table, int qtype, double threshold) {
  if (qtype < 0 || qtype >= table.num_types) {
    throw std::out_of_range("effective_margins: qtype out of range");
  }
  Vec64 out(static_cast<std::size_t>(table.num_answers), 0.0);
  if (table.unseen[static_cast<std::size_t>(qtype)]) return out;
  if (table.entropy[static_cast<std::size_t>(qtype)] <= threshold) return out;
  auto row = table.margin.row(static_cast<std::size_t>(qtype));
  std::copy(row.begin(), row.end(), out.begin());
  return out;
}

void BoundQuery::validate() const {
  if (margins.size() < 2) throw std::invalid_argument("BoundQuery: need at least 2 classes");
  if (target < 0 || target >= static_cast<int>(margins.size())) {
    throw std::out_of_range("BoundQuery: target out of range");
  }
  for (double m : margins) {
    if (m < 0.0 || m > 1.0) throw std::invalid_argument("BoundQuery: margin outside [0,1]");
  }
  if (!(p_target > 0.0 && p_target < 1.0)) {
    throw std::invalid_argument("BoundQuery: p_target must lie in (0,1)");
  }
}

double scale_bound_paper(const BoundQuery& q) {
  q.validate();
  const std::size_t n = q.margins.size();
  double others = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (static_cast<int>(j) != q.target) others += q.margins[j];
  }
  const double denom = 2.0 - q.margins[static_cast<std::size_t>(q.target)] -
                       others / static_cast<double>(n - 1);
  if (denom == 0.0) throw std::domain_error("scale_bound_paper: zero denominator");
  return -std::log(1.0 / q.p_target - 1.0) / denom;
}

namespace {

double ideal_probability_at(const Vec64& margins, int target, double s) {
  const std::size_t n = margins.size();
  Vec64 logits(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double cos = static_cast<int>(j) == target ? 1.0 : -1.0;
    logits[j] = s * (cos - margins[j]);
  }
  return std::exp(logits[static_cast<std::size_t>(target)] - log_sum_exp(logits));
}

}  // namespace

double ideal_config_probability(const BoundQuery& q) {
  q.validate();
  return ideal_probability_at(q.margins, q.target, q.scale);
}

double scale_bound_exact(const BoundQuery& q) {
  q.validate();
  auto prob = [&](double s) { return ideal_probability_at(q.margins, q.target, s); };

  double lo = -1.0;
  double hi = 1.0;
  while (prob(lo) >= q.p_target) lo *= 2.0;
  while (prob(hi) < q.p_target) hi *= 2.0;
  // invariant: prob(lo) < p_target <= prob(hi)
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (prob(mid) >= q.p_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

std::string format_stats_report(const MarginTable& table, const AnswerVocab& vocab,
                                const QTypeRegistry& registry, int top_k) {
  std::ostringstream out;
  out << "question-type margin statistics (epsilon=" << table.epsilon << ")\n";
  for (int k = 0; k < table.num_types; ++k) {
    out << "type " << registry.name(k) << "  entropy "
        << format_sig9(table.entropy[static_cast<std::size_t>(k)]) << " bits";
    if (table.unseen[static_cast<std::size_t>(k)]) out << "  (unseen in training)";
    out << "\n";
    std::vector<int> order(static_cast<std::size_t>(table.num_answers));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return table.freq.at(static_cast<std::size_t>(k), static_cast<std::size_t>(a)) >
             table.freq.at(static_cast<std::size_t>(k), static_cast<std::size_t>(b));
    });
    const int shown = std::min<int>(top_k, table.num_answers);
    for (int r = 0; r < shown; ++r) {
      const int a = order[static_cast<std::size_t>(r)];
      out << "  " << vocab.name(a) << "  freq "
          << format_sig9(table.freq.at(static_cast<std::size_t>(k), static_cast<std::size_t>(a)))
          << "  margin "
          << format_sig9(table.margin.at(static_cast<std::size_t>(k), static_cast<std::size_t>(a)))
          << "\n";
    }
  }
  return std::move(out).str();
}

void write_stats_report(const std::filesystem::path& dir, const MarginTable& table,
                        const AnswerVocab& vocab, const QTypeRegistry& registry) {
  write_text_file_atomic(dir / "stats.txt", format_stats_report(table, vocab, registry));

  json j;
  j["format"] = "adavqa-stats-v1";
  j["epsilon"] = table.epsilon;
  j["answers"] = vocab.names();
  json types = json::array();
  for (int k = 0; k < table.num_types; ++k) {
    json row;
    row["qtype"] = registry.name(k);
    row["entropy_bits"] = table.entropy[static_cast<std::size_t>(k)];
    row["unseen"] = static_cast<bool>(table.unseen[static_cast<std::size_t>(k)]);
    auto freq = table.freq.row(static_cast<std::size_t>(k));
    auto margin = table.margin.row(static_cast<std::size_t>(k));
    row["freq"] = std::vector<double>(freq.begin(), freq.end());
    row["margin"] = std::vector<double>(margin.begin(), margin.end());
    types.push_back(std::move(row));
  }
  j["types"] = std::move(types);
  write_text_file_atomic(dir / "stats.json", j.dump(2) + "\n");
}

}  // namespace adavqa
