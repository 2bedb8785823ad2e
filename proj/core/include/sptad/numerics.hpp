// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace sptad {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Takes ownership of row-major `data`; throws ShapeMismatch on a size mismatch.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// y = x W^T + b, with W stored (out x in).
struct LinearParams {
  Matrix weight;
  std::vector<double> bias;

  std::size_t in_features() const { return weight.cols(); }
  std::size_t out_features() const { return weight.rows(); }
};

struct LayerNormParams {
  std::vector<double> gamma;
  std::vector<double> beta;
};

/// Query/key/value/output projections of a multi-head self-attention block.
struct AttentionParams {
  LinearParams query;
  LinearParams key;
  LinearParams value;
  LinearParams output;
};

inline constexpr double kLayerNormEps = 1e-5;

/// Exact product; each entry accumulates k = 0..K-1 in order.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);

Matrix linear(const Matrix& x, const LinearParams& p);
/// Same result for any thread count; output features are split across threads.
Matrix linear(const Matrix& x, const LinearParams& p, int threads);
std::vector<double> linear(std::span<const double> x, const LinearParams& p);

/// Per-row normalization to zero mean and unit (population) variance, then affine.
Matrix layer_norm(const Matrix& x, std::span<const double> gamma, std::span<const double> beta,
                  double eps = kLayerNormEps);
Matrix layer_norm(const Matrix& x, const LayerNormParams& p, double eps = kLayerNormEps);

void relu_inplace(Matrix& x);
void relu_inplace(std::span<double> x);
double sigmoid(double x);

/// Numerically stable softmax over each row.
void softmax_rows_inplace(Matrix& x);

/// Scaled dot-product attention over the rows of `x`, split into `heads`
/// equal column groups, concatenated and passed through the output projection.
Matrix multi_head_self_attention(const Matrix& x, const AttentionParams& p, int heads);

/// Stateless counter-based generator: value(i) depends only on (key, i).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stream);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform in [0, 1).
  double uniform(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

std::uint64_t fnv1a64(std::string_view s);

enum class InitScheme { kUniformFan, kZeros };

/// Deterministic in (rows, cols, seed, scheme, name). Uniform-fan draws from
/// +-sqrt(6 / (cols + rows)), i.e. fan_in = cols and fan_out = rows.
Matrix seeded_init(std::size_t rows, std::size_t cols, std::uint64_t seed, InitScheme scheme,
                   std::string_view name = {});

/// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `threads`
/// threads. Chunks write disjoint outputs, so results do not depend on `threads`.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace sptad
