#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "adavqa/numerics.hpp"

namespace adavqa {

/// The four-loss family over a bias-free classifier head.
///   Ce:     softmax cross entropy on raw logits W x.
///   Nsl:    cross entropy on s * cos(theta) with unit-normalized rows and
///           features.
///   Lmc:    Nsl with one fixed margin subtracted from the target-indexed
///           term only (each target term has its own softmax denominator).
///   AdaVqa: one shared softmax over s * (cos(theta_j) - m_j) with
///           per-class margins.
enum class LossKind { Ce, Nsl, Lmc, AdaVqa };

std::string_view loss_kind_name(LossKind kind);
std::optional<LossKind> parse_loss_kind(std::string_view name);

struct LossConfig {
  LossKind kind = LossKind::AdaVqa;
  double scale = 16.0;             // s; ignored by Ce
  double fixed_margin = 0.0;       // Lmc only, in [0, 1]
  double entropy_threshold = 1.0;  // AdaVqa only, bits

  void validate() const;
};

struct LossOutput {
  double loss = 0.0;
  Vec64 cos_theta;  // per class
  Vec64 probs;      // predictive distribution, sums to 1
  Vec64 grad_x;     // filled by loss_backward
  Mat64 grad_w;
};

/// cos(theta_i) = (W_i / ||W_i||) . (x / ||x||); zero-norm rows or features
/// are a domain error.
Vec64 cosine_logits(const Mat64& weights, const Vec64& x);

/// Forward pass only (loss, cos_theta, probs). `margins` must be supplied
/// exactly when kind == AdaVqa (one entry per class, from effective_margins).
LossOutput loss_forward(const LossConfig& config, const Mat64& weights, const Vec64& x,
                        const Vec64& targets, const Vec64* margins = nullptr);

/// Forward plus analytic gradients with respect to x and W. Normalized
/// kinds route through the norm Jacobian, so grad_x is orthogonal to x and
/// each grad_w row is orthogonal to the matching weight row.
LossOutput loss_backward(const LossConfig& config, const Mat64& weights, const Vec64& x,
                         const Vec64& targets, const Vec64* margins = nullptr);

}  // namespace adavqa
