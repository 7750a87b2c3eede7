#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "adavqa/dataset.hpp"
#include "adavqa/numerics.hpp"

namespace adavqa {

inline constexpr double kDefaultEpsilon = 1e-6;

/// Per-question-type margin statistics. freq holds the smoothed answer
/// frequencies, margin = 1 - freq, entropy is in bits. Types whose count
/// row is all zeros are marked unseen; effective_margins falls back to
/// zero margins for them.
struct MarginTable {
  int num_types = 0;
  int num_answers = 0;
  double epsilon = kDefaultEpsilon;
  Mat64 freq;
  Mat64 margin;
  Vec64 entropy;
  std::vector<bool> unseen;
};

/// Smoothed frequencies: (n_i + eps) / (sum_j n_j + eps), computed per row.
/// The single eps in the denominator follows the defining formula; an
/// all-zero row degenerates to 1.0 in every entry.
Mat64 normalized_frequencies(const CountTable& counts, double epsilon = kDefaultEpsilon);

/// m = 1 - freq elementwise; frequent answers get small margins.
Mat64 adapted_margins(const Mat64& freq);

/// Shannon entropy in bits with 0 log 0 := 0.
double type_entropy(std::span<const double> freq_row);

MarginTable build_margin_table(const CountTable& counts, double epsilon = kDefaultEpsilon);

/// Margin row used for a question of the given type: the adapted row when
/// the type entropy exceeds the threshold, the zero row (plain normalized
/// softmax behavior) otherwise or when the type was unseen in training.
Vec64 effective_margins(const MarginTable& table, int qtype, double threshold);

/// Query for the scale lower bound: reach probability p_target for class
/// `target` in the ideal configuration (cos = 1 for the target, -1 for all
/// other classes). `scale` is only read by ideal_config_probability.
struct BoundQuery {
  int target = 0;
  Vec64 margins;
  double p_target = 0.99;
  double scale = 0.0;

  void validate() const;
};

/// The published closed-form bound:
///   -ln(1/P - 1) / (2 - m_t - sum_{j != t} m_j / (n - 1)).
double scale_bound_paper(const BoundQuery& q);

/// Probability assigned to the target class in the ideal configuration at
/// scale q.scale, evaluated via log-sum-exp. Strictly increasing in the
/// scale for margins in [0, 1].
double ideal_config_probability(const BoundQuery& q);

/// Minimal scale s with ideal_config_probability(s) >= p_target, found by
/// bisection on the monotone curve. Disagrees with scale_bound_paper in
/// general; both are exposed so the gap can be inspected.
double scale_bound_exact(const BoundQuery& q);

/// Human-readable per-type statistics (entropy plus the top answers by
/// frequency) and a machine-readable mirror of the full table.
std::string format_stats_report(const MarginTable& table, const AnswerVocab& vocab,
                                const QTypeRegistry& registry, int top_k = 5);
void write_stats_report(const std::filesystem::path& dir, const MarginTable& table,
                        const AnswerVocab& vocab, const QTypeRegistry& registry);

}  // namespace adavqa
