#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace adavqa {

/// Dense double-precision vector. Construction from external data rejects
/// NaN/Inf entries; internally produced values stay finite by the contracts
/// of the operations that build them.
class Vec64 {
 public:
  Vec64() = default;
  explicit Vec64(std::size_t n, double fill = 0.0) : xs_(n, fill) {}
  Vec64(std::initializer_list<double> xs);

  /// Validating constructor for data that crosses an API boundary.
  static Vec64 from(std::vector<double> xs);

  std::size_t size() const { return xs_.size(); }
  bool empty() const { return xs_.empty(); }
  double& operator[](std::size_t i) { return xs_[i]; }
  double operator[](std::size_t i) const { return xs_[i]; }
  double* data() { return xs_.data(); }
  const double* data() const { return xs_.data(); }
  auto begin() { return xs_.begin(); }
  auto end() { return xs_.end(); }
  auto begin() const { return xs_.begin(); }
  auto end() const { return xs_.end(); }

  operator std::span<const double>() const { return xs_; }
  operator std::span<double>() { return xs_; }
  std::span<const double> span() const { return xs_; }
  const std::vector<double>& raw() const { return xs_; }

  friend bool operator==(const Vec64& a, const Vec64& b) { return a.xs_ == b.xs_; }

 private:
  std::vector<double> xs_;
};

/// Dense row-major matrix.
class Mat64 {
 public:
  Mat64() = default;
  Mat64(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), xs_(rows * cols, fill) {}

  static Mat64 from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& at(std::size_t i, std::size_t j) { return xs_[i * cols_ + j]; }
  double at(std::size_t i, std::size_t j) const { return xs_[i * cols_ + j]; }
  std::span<double> row(std::size_t i) { return {xs_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {xs_.data() + i * cols_, cols_}; }
  std::span<const double> flat() const { return xs_; }
  std::span<double> flat() { return xs_; }

  friend bool operator==(const Mat64& a, const Mat64& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.xs_ == b.xs_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> xs_;
};

/// Throws std::domain_error if any element is NaN or infinite.
void require_finite(std::span<const double> xs, const char* what);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

/// v / ||v||_2. Zero-norm input is a domain error.
Vec64 l2_normalize(const Vec64& v);

/// Derivative of v / ||v||_2 with respect to v:
///   J = I/||v|| - v v^T / ||v||^3.
/// Symmetric, annihilates the radial direction (J v = 0).
Mat64 normalize_jacobian(const Vec64& v);

/// Matrix-free J_norm(v) * u for the Jacobian above.
Vec64 normalize_jacobian_apply(std::span<const double> v, std::span<const double> u);

/// log(sum_i exp(v_i)) via max subtraction; finite for finite inputs.
double log_sum_exp(std::span<const double> v);

/// Central finite differences (f(x+h e_i) - f(x-h e_i)) / (2h).
/// Non-finite evaluations of f raise a domain error.
Vec64 finite_diff_grad(const std::function<double(const Vec64&)>& f, const Vec64& x, double h);

/// Counter-based deterministic generator. Identical seeds give bitwise
/// identical streams; substreams obtained through split() are independent
/// of the parent stream and of each other. The exact mixing scheme is
/// documented in the README so streams reproduce across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(seed) {}

  Rng split(std::uint64_t label) const;
  Rng split(std::string_view label) const;

  std::uint64_t next_u64();
  /// Unbiased-enough integer in [0, n); n > 0.
  std::uint64_t next_below(std::uint64_t n);
  /// Uniform in [0, 1).
  double next_double();
  double next_uniform(double lo, double hi);
  /// Standard normal via Box-Muller (two uniforms per call).
  double next_gaussian();

 private:
  Rng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// FNV-1a 64-bit hash; used for labeled substreams and input digests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace adavqa
