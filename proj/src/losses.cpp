#include "adavqa/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace adavqa {

std::string_view loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::Ce: return "ce";
    case LossKind::Nsl: return "nsl";
    case LossKind::Lmc: return "lmc";
    case LossKind::AdaVqa: return "adavqa";
  }
  return "?";
}

std::optional<LossKind> parse_loss_kind(std::string_view name) {
  if (name == "ce") return LossKind::Ce;
  if (name == "nsl") return LossKind::Nsl;
  if (name == "lmc") return LossKind::Lmc;
  if (name == "adavqa") return LossKind::AdaVqa;
  return std::nullopt;
}

void LossConfig::validate() const {
  if (kind != LossKind::Ce && !(scale > 0.0)) {
    throw std::invalid_argument("LossConfig: scale must be positive");
  }
  if (fixed_margin < 0.0 || fixed_margin > 1.0) {
    throw std::invalid_argument("LossConfig: fixed_margin must lie in [0,1]");
  }
  if (fixed_margin != 0.0 && kind != LossKind::Lmc) {
    throw std::invalid_argument("LossConfig: fixed_margin only applies to the lmc kind");
  }
  if (entropy_threshold < 0.0) {
    throw std::invalid_argument("LossConfig: entropy_threshold must be nonnegative");
  }
}

namespace {

struct Prepared {
  std::size_t classes = 0;
  std::size_t dim = 0;
  Vec64 x_hat;
  Vec64 w_norms;      // per row
  Mat64 w_hat;        // normalized rows
  Vec64 cos_theta;
  Vec64 raw_logits;   // W x, Ce only
};

Prepared prepare(const LossConfig& config, const Mat64& weights, const Vec64& x,
                 const Vec64& targets, const Vec64* margins) {
  config.validate();
  if (weights.cols() != x.size()) throw std::invalid_argument("loss: W/x dimension mismatch");
  if (targets.size() != weights.rows()) {
    throw std::invalid_argument("loss: target size must equal class count");
  }
  for (double a : targets) {
    if (a < 0.0 || a > 1.0) throw std::invalid_argument("loss: targets must lie in [0,1]");
  }
  if (config.kind == LossKind::AdaVqa) {
    if (margins == nullptr || margins->size() != weights.rows()) {
      throw std::invalid_argument("loss: adavqa requires one margin per class");
    }
  } else if (margins != nullptr) {
    throw std::invalid_argument("loss: per-class margins only apply to the adavqa kind");
  }

  Prepared prep;
  prep.classes = weights.rows();
  prep.dim = x.size();
  const double xn = norm2(x);
  if (xn == 0.0) throw std::domain_error("loss: zero-norm feature vector");
  prep.x_hat = Vec64(prep.dim);
  for (std::size_t i = 0; i < prep.dim; ++i) prep.x_hat[i] = x[i] / xn;

  prep.w_norms = Vec64(prep.classes);
  prep.w_hat = Mat64(prep.classes, prep.dim);
  prep.cos_theta = Vec64(prep.classes);
  for (std::size_t c = 0; c < prep.classes; ++c) {
    const double wn = norm2(weights.row(c));
    if (wn == 0.0) throw std::domain_error("loss: zero-norm weight row");
    prep.w_norms[c] = wn;
    for (std::size_t i = 0; i < prep.dim; ++i) prep.w_hat.at(c, i) = weights.at(c, i) / wn;
    prep.cos_theta[c] = dot(prep.w_hat.row(c), prep.x_hat);
  }
  if (config.kind == LossKind::Ce) {
    prep.raw_logits = Vec64(prep.classes);
    for (std::size_t c = 0; c < prep.classes; ++c) {
      prep.raw_logits[c] = dot(weights.row(c), x);
    }
  }
  return prep;
}

// Shared-softmax loss sum_i -a_i (z_i - lse(z)) and the logit gradient
// g_i = (sum_j a_j) p_hat_i - a_i.
double shared_softmax_loss(const Vec64& logits, const Vec64& targets, Vec64& probs) {
  const double lse = log_sum_exp(logits);
  const std::size_t n = logits.size();
  probs = Vec64(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = std::exp(logits[i] - lse);
    loss -= targets[i] * (logits[i] - lse);
  }
  return loss;
}

Vec64 shared_softmax_grad(const Vec64& probs, const Vec64& targets) {
  double target_sum = 0.0;
  for (double a : targets) target_sum += a;
  Vec64 g(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) g[i] = target_sum * probs[i] - targets[i];
  return g;
}

// Lmc: every target term i carries its own denominator in which only the
// i-th logit is shifted by the margin. Returns the loss and accumulates the
// gradient with respect to s*cos(theta_j) into g.
double lmc_loss_and_grad(const Vec64& scaled_cos, double scaled_margin, const Vec64& targets,
                         Vec64* g) {
  const std::size_t n = scaled_cos.size();
  double loss = 0.0;
  Vec64 logits = scaled_cos;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] == 0.0) continue;
    logits[i] = scaled_cos[i] - scaled_margin;
    const double lse = log_sum_exp(logits);
    loss -= targets[i] * (logits[i] - lse);
    if (g != nullptr) {
      for (std::size_t j = 0; j < n; ++j) {
        const double p = std::exp(logits[j] - lse);
        (*g)[j] += targets[i] * (p - (j == i ? 1.0 : 0.0));
      }
    }
    logits[i] = scaled_cos[i];
  }
  return loss;
}

LossOutput evaluate(const LossConfig& config, const Mat64& weights, const Vec64& x,
                    const Vec64& targets, const Vec64* margins, bool with_grad) {
  Prepared prep = prepare(config, weights, x, targets, margins);
  const std::size_t n = prep.classes;

  LossOutput out;
  out.cos_theta = prep.cos_theta;

  Vec64 logit_grad;  // dL/dz where z is the (scaled) logit vector
  switch (config.kind) {
    case LossKind::Ce: {
      out.loss = shared_softmax_loss(prep.raw_logits, targets, out.probs);
      if (with_grad) logit_grad = shared_softmax_grad(out.probs, targets);
      break;
    }
    case LossKind::Nsl:
    case LossKind::AdaVqa: {
      Vec64 logits(n);
      for (std::size_t c = 0; c < n; ++c) {
        const double m = config.kind == LossKind::AdaVqa ? (*margins)[c] : 0.0;
        logits[c] = config.scale * (prep.cos_theta[c] - m);
      }
      out.loss = shared_softmax_loss(logits, targets, out.probs);
      if (with_grad) logit_grad = shared_softmax_grad(out.probs, targets);
      break;
    }
    case LossKind::Lmc: {
      Vec64 scaled(n);
      for (std::size_t c = 0; c < n; ++c) scaled[c] = config.scale * prep.cos_theta[c];
      if (with_grad) logit_grad = Vec64(n, 0.0);
      out.loss = lmc_loss_and_grad(scaled, config.scale * config.fixed_margin, targets,
                                   with_grad ? &logit_grad : nullptr);
      // predictive distribution: the margin shifts only the target term, so
      // scoring uses the margin-free softmax
      shared_softmax_loss(scaled, targets, out.probs);
      break;
    }
  }

  if (!with_grad) return out;

  out.grad_w = Mat64(n, prep.dim);
  if (config.kind == LossKind::Ce) {
    out.grad_x = Vec64(prep.dim, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t i = 0; i < prep.dim; ++i) {
        out.grad_x[i] += logit_grad[c] * weights.at(c, i);
        out.grad_w.at(c, i) = logit_grad[c] * x[i];
      }
    }
    return out;
  }

  // Normalized kinds: z_c = s * (cos(theta_c) - m_c), so
  //   dL/dx   = J_norm(x) * (s * sum_c g_c w_hat_c)
  //   dL/dW_c = g_c * s * J_norm(W_c) * x_hat.
  Vec64 u(prep.dim, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < prep.dim; ++i) u[i] += logit_grad[c] * prep.w_hat.at(c, i);
  }
  for (auto& v : u) v *= config.scale;
  out.grad_x = normalize_jacobian_apply(x, u);

  for (std::size_t c = 0; c < n; ++c) {
    const Vec64 jw = normalize_jacobian_apply(weights.row(c), prep.x_hat);
    const double coeff = logit_grad[c] * config.scale;
    for (std::size_t i = 0; i < prep.dim; ++i) out.grad_w.at(c, i) = coeff * jw[i];
  }
  return out;
}

}  // namespace

Vec64 cosine_logits(const Mat64& weights, const Vec64& x) {
  if (weights.cols() != x.size()) {
    throw std::invalid_argument("cosine_logits: dimension mismatch");
  }
  const double xn = norm2(x);
  if (xn == 0.0) throw std::domain_error("cosine_logits: zero-norm feature vector");
  Vec64 out(weights.rows());
  for (std::size_t c = 0; c < weights.rows(); ++c) {
    const double wn = norm2(weights.row(c));
    if (wn == 0.0) throw std::domain_error("cosine_logits: zero-norm weight row");
    out[c] = dot(weights.row(c), x) / (wn * xn);
  }
  return out;
}

LossOutput loss_forward(const LossConfig& config, const Mat64& weights, const Vec64& x,
                        const Vec64& targets, const Vec64* margins) {
  return evaluate(config, weights, x, targets, margins, /*with_grad=*/false);
}

LossOutput loss_backward(const LossConfig& config, const Mat64& weights, const Vec64& x,
                         const Vec64& targets, const Vec64* margins) {
  return evaluate(config, weights, x, targets, margins, /*with_grad=*/true);
}

}  // namespace adavqa
