#include "adavqa/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace adavqa {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer; bijective mixing of a 64-bit word.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Vec64::Vec64(std::initializer_list<double> xs) : xs_(xs) {
  require_finite(xs_, "Vec64");
}

Vec64 Vec64::from(std::vector<double> xs) {
  require_finite(xs, "Vec64");
  Vec64 v;
  v.xs_ = std::move(xs);
  return v;
}

Mat64 Mat64::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Mat64 m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols_) throw std::invalid_argument("Mat64: ragged rows");
    require_finite(rows[i], "Mat64");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw std::domain_error(std::string(what) + ": non-finite element");
    }
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vec64 l2_normalize(const Vec64& v) {
  const double n = norm2(v);
  if (n == 0.0) throw std::domain_error("l2_normalize: zero vector");
  Vec64 out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

Mat64 normalize_jacobian(const Vec64& v) {
  const double n = norm2(v);
  if (n == 0.0) throw std::domain_error("normalize_jacobian: zero vector");
  const std::size_t d = v.size();
  const double n3 = n * n * n;
  Mat64 j(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      j.at(i, k) = (i == k ? 1.0 / n : 0.0) - v[i] * v[k] / n3;
    }
  }
  return j;
}

Vec64 normalize_jacobian_apply(std::span<const double> v, std::span<const double> u) {
  const double n = norm2(v);
  if (n == 0.0) throw std::domain_error("normalize_jacobian_apply: zero vector");
  const double scale = dot(v, u) / (n * n * n);
  Vec64 out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = u[i] / n - v[i] * scale;
  return out;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const double m = *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

Vec64 finite_diff_grad(const std::function<double(const Vec64&)>& f, const Vec64& x, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_grad: h must be positive");
  Vec64 grad(x.size());
  Vec64 probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    probe[i] = xi + h;
    const double fp = f(probe);
    probe[i] = xi - h;
    const double fm = f(probe);
    probe[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::domain_error("finite_diff_grad: non-finite function value");
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

Rng Rng::split(std::uint64_t label) const {
  return Rng(mix64(key_ + kGamma * (label + 1)), 0);
}

Rng Rng::split(std::string_view label) const { return split(fnv1a64(label)); }

std::uint64_t Rng::next_u64() {
  counter_ += kGamma;
  return mix64(key_ ^ counter_);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::next_below: n must be positive");
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

double Rng::next_gaussian() {
  double u1 = next_double();
  const double u2 = next_double();
  while (u1 <= 0.0) u1 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace adavqa
