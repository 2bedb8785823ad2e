// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "sptad/error.hpp"

namespace sptad {

namespace {

std::string shape_str(const Matrix& m) {
  std::ostringstream s;
  s << m.rows() << "x" << m.cols();
  return s.str();
}

// Column block of B kept hot in cache while sweeping the rows of A.
constexpr std::size_t kColBlock = 128;

std::uint64_t pcg_output(std::uint64_t state) {
  // PCG RXS-M-XS 64/64 output permutation.
  const std::uint64_t word =
      ((state >> ((state >> 59u) + 5u)) ^ state) * 12605985483714917081ull;
  return (word >> 43u) ^ word;
}

constexpr std::uint64_t kPcgMultiplier = 6364136223846793005ull;
constexpr std::uint64_t kPcgIncrement = 1442695040888963407ull;

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    std::ostringstream msg;
    msg << "matrix " << rows << "x" << cols << " given " << data_.size() << " values";
    throw ShapeMismatch(msg.str());
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeMismatch("ragged initializer rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("matmul " + shape_str(a) + " * " + shape_str(b));
  }
  const std::size_t m = a.rows();
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  Matrix c(m, n);
  const double* ap = a.values().data();
  const double* bp = b.values().data();
  double* cp = c.values().data();
  for (std::size_t jb = 0; jb < n; jb += kColBlock) {
    const std::size_t je = std::min(n, jb + kColBlock);
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = cp + i * n;
      const double* arow = ap + i * inner;
      for (std::size_t k = 0; k < inner; ++k) {
        const double aik = arow[k];
        const double* brow = bp + k * n;
        for (std::size_t j = jb; j < je; ++j) crow[j] += aik * brow[j];
      }
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  constexpr std::size_t kTile = 32;
  for (std::size_t ib = 0; ib < a.rows(); ib += kTile) {
    for (std::size_t jb = 0; jb < a.cols(); jb += kTile) {
      const std::size_t ie = std::min(a.rows(), ib + kTile);
      const std::size_t je = std::min(a.cols(), jb + kTile);
      for (std::size_t i = ib; i < ie; ++i)
        for (std::size_t j = jb; j < je; ++j) t(j, i) = a(i, j);
    }
  }
  return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch("add " + shape_str(a) + " + " + shape_str(b));
  }
  Matrix c = a;
  auto cv = c.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < cv.size(); ++i) cv[i] += bv[i];
  return c;
}

Matrix linear(const Matrix& x, const LinearParams& p) { return linear(x, p, 1); }

Matrix linear(const Matrix& x, const LinearParams& p, int threads) {
  if (x.cols() != p.in_features() || p.bias.size() != p.out_features()) {
    std::ostringstream msg;
    msg << "linear: input " << shape_str(x) << ", weight " << shape_str(p.weight) << ", bias "
        << p.bias.size();
    throw ShapeMismatch(msg.str());
  }
  // Computed as W * x^T so the weight streams once, row by row; every output
  // still sums over the input index in ascending order.
  const std::size_t n = x.rows();
  const std::size_t inner = x.cols();
  const Matrix xt = transpose(x);
  Matrix yt(p.out_features(), n);
  parallel_for(p.out_features(), threads, [&](std::size_t begin, std::size_t end) {
    const double* xp = xt.values().data();
    for (std::size_t o = begin; o < end; ++o) {
      double* yrow = yt.row(o).data();
      const double* wrow = p.weight.row(o).data();
      for (std::size_t k = 0; k < inner; ++k) {
        const double w = wrow[k];
        const double* xrow = xp + k * n;
        for (std::size_t i = 0; i < n; ++i) yrow[i] += w * xrow[i];
      }
    }
  });
  Matrix y(n, p.out_features());
  for (std::size_t i = 0; i < n; ++i) {
    auto row = y.row(i);
    for (std::size_t o = 0; o < row.size(); ++o) row[o] = yt(o, i) + p.bias[o];
  }
  return y;
}

std::vector<double> linear(std::span<const double> x, const LinearParams& p) {
  Matrix row(1, x.size(), std::vector<double>(x.begin(), x.end()));
  Matrix y = linear(row, p);
  return {y.values().begin(), y.values().end()};
}

Matrix layer_norm(const Matrix& x, std::span<const double> gamma, std::span<const double> beta,
                  double eps) {
  if (gamma.size() != x.cols() || beta.size() != x.cols()) {
    throw ShapeMismatch("layer_norm: affine parameters do not match " + shape_str(x));
  }
  Matrix y(x.rows(), x.cols());
  const double n = static_cast<double>(x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    double mean = 0.0;
    for (double v : in) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : in) var += (v - mean) * (v - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = (in[c] - mean) * inv * gamma[c] + beta[c];
    }
  }
  return y;
}

Matrix layer_norm(const Matrix& x, const LayerNormParams& p, double eps) {
  return layer_norm(x, p.gamma, p.beta, eps);
}

void relu_inplace(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_inplace(Matrix& x) { relu_inplace(x.values()); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_rows_inplace(Matrix& x) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    if (row.empty()) continue;
    const double mx = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (double& v : row) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : row) v /= total;
  }
}

Matrix multi_head_self_attention(const Matrix& x, const AttentionParams& p, int heads) {
  const std::size_t d = x.cols();
  if (heads < 1 || d % static_cast<std::size_t>(heads) != 0) {
    throw ShapeMismatch("attention: width " + std::to_string(d) + " not divisible by " +
                        std::to_string(heads) + " heads");
  }
  const Matrix q = linear(x, p.query);
  const Matrix k = linear(x, p.key);
  const Matrix v = linear(x, p.value);
  if (q.cols() != d || k.cols() != d || v.cols() != d) {
    throw ShapeMismatch("attention: projections must preserve width");
  }
  const std::size_t n = x.rows();
  const std::size_t head_dim = d / static_cast<std::size_t>(heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  Matrix concat(n, d);
  Matrix weights(n, n);
  for (std::size_t h = 0; h < static_cast<std::size_t>(heads); ++h) {
    const std::size_t off = h * head_dim;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < head_dim; ++c) s += q(i, off + c) * k(j, off + c);
        weights(i, j) = s * scale;
      }
    }
    softmax_rows_inplace(weights);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double w = weights(i, j);
        for (std::size_t c = 0; c < head_dim; ++c) concat(i, off + c) += w * v(j, off + c);
      }
    }
  }
  return linear(concat, p.output);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

CounterRng::CounterRng(std::uint64_t seed, std::string_view stream)
    : key_(pcg_output(seed * kPcgMultiplier + kPcgIncrement) ^ fnv1a64(stream)) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return pcg_output((counter + key_) * kPcgMultiplier + kPcgIncrement);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

Matrix seeded_init(std::size_t rows, std::size_t cols, std::uint64_t seed, InitScheme scheme,
                   std::string_view name) {
  Matrix m(rows, cols);
  if (scheme == InitScheme::kZeros || m.empty()) return m;
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  const CounterRng rng(seed, name);
  auto v = m.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (2.0 * rng.uniform(i) - 1.0) * bound;
  return m;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, &errors, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace sptad
