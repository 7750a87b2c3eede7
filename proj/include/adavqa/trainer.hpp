#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adavqa/dataset.hpp"
#include "adavqa/losses.hpp"
#include "adavqa/margins.hpp"
#include "adavqa/numerics.hpp"

namespace adavqa {

/// Bias-free classifier head, optionally behind one tanh hidden layer.
/// weights is class_count x head_dim; hidden (when hidden_dim > 0) is
/// hidden_dim x feature_dim and head_dim == hidden_dim.
struct ClassifierModel {
  int feature_dim = 0;
  int class_count = 0;
  int hidden_dim = 0;  // 0 = linear head
  Mat64 hidden;
  Mat64 weights;

  int head_dim() const { return hidden_dim > 0 ? hidden_dim : feature_dim; }
};

ClassifierModel init_model(int feature_dim, int class_count, int hidden_dim, Rng rng);

/// Feature vector seen by the loss head (tanh(H x) with a hidden layer,
/// x itself otherwise).
Vec64 model_features(const ClassifierModel& model, const Vec64& input);

/// Per-class scores used for prediction: raw logits for ce, cosines for the
/// normalized kinds.
Vec64 model_scores(const ClassifierModel& model, const Vec64& input, LossKind kind);

struct TrainConfig {
  LossConfig loss;
  double learning_rate = 0.05;
  int epochs = 30;
  int batch_size = 128;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochStats {
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochStats> epochs;
};

/// Deterministic mini-batch SGD. Shuffling depends only on (seed, epoch);
/// gradient reduction runs in batch index order. `margins` must be the
/// train-set margin table when the loss kind is adavqa, null otherwise.
std::pair<ClassifierModel, TrainLog> train(ClassifierModel model,
                                           const std::vector<Record>& records,
                                           const TrainConfig& config,
                                           const MarginTable* margins);

/// Compares analytic gradients against central finite differences over
/// random instances; returns the max relative error seen.
double gradcheck(LossKind kind, int feature_dim, int class_count, int trials, Rng rng,
                 double h = 1e-5);

/// Same check through a tanh hidden layer (loss -> grad_x -> hidden
/// weights), exercising the full chain used by train().
double gradcheck_hidden(LossKind kind, int feature_dim, int hidden_dim, int class_count,
                        int trials, Rng rng, double h = 1e-5);

struct SweepCell {
  std::string label;
  LossKind kind;
  double fixed_margin = 0.0;  // lmc rows
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> per_seed;
};

struct SweepReport {
  std::vector<SweepCell> rows;
};

/// Trains ce / nsl / lmc at each fixed margin / adavqa on the train split
/// and reports mean +- std test accuracy over the seeds. Rows appear in
/// that order (2 + |margins| + 1 rows).
SweepReport margin_sweep(const std::vector<Record>& records_train,
                         const std::vector<Record>& records_test, int num_types,
                         int num_answers, const TrainConfig& base_config,
                         std::span<const double> fixed_margins,
                         std::span<const std::uint64_t> seeds);

std::string format_sweep_report(const SweepReport& report);

/// Versioned text checkpoint; weights render as hex floats so the file
/// round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const ClassifierModel& model,
                     const LossConfig& loss, std::uint64_t seed);

struct Checkpoint {
  ClassifierModel model;
  LossConfig loss;
  std::uint64_t seed = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace adavqa
