// Copyright 2026 The ActiveAlign Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small dense linear algebra used by the embedding and alignment models.
// Everything is row-major double precision; dimensions at desk scale are
// at most a few hundred, so no BLAS is involved.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace activealign {

using Vec = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

// out += scale * a
inline void axpy(double scale, std::span<const double> a, std::span<double> out) {
  assert(a.size() == out.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += scale * a[i];
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline Vec matvec(const Matrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
  Vec out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), x);
  return out;
}

// m^T * y
inline Vec matTvec(const Matrix& m, std::span<const double> y) {
  if (m.rows() != y.size()) throw std::invalid_argument("matTvec: dimension mismatch");
  Vec out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) axpy(y[r], m.row(r), out);
  return out;
}

// Gradient of cos(u, y) with respect to u and y. Zero-norm inputs give a
// cosine of 0 and zero gradients.
struct CosineGrad {
  double value = 0.0;
  Vec d_u;
  Vec d_y;
};

inline CosineGrad cosine_grad(std::span<const double> u, std::span<const double> y) {
  CosineGrad g;
  g.d_u.assign(u.size(), 0.0);
  g.d_y.assign(y.size(), 0.0);
  const double nu = norm(u);
  const double ny = norm(y);
  if (nu == 0.0 || ny == 0.0) return g;
  g.value = dot(u, y) / (nu * ny);
  for (std::size_t i = 0; i < u.size(); ++i) {
    g.d_u[i] = y[i] / (nu * ny) - g.value * u[i] / (nu * nu);
    g.d_y[i] = u[i] / (nu * ny) - g.value * y[i] / (ny * ny);
  }
  return g;
}

inline double cosine(std::span<const double> u, std::span<const double> y) {
  const double nu = norm(u);
  const double ny = norm(y);
  if (nu == 0.0 || ny == 0.0) return 0.0;
  return std::clamp(dot(u, y) / (nu * ny), -1.0, 1.0);
}

// Rank-one update m += scale * a b^T.
inline void add_outer(Matrix& m, double scale, std::span<const double> a,
                      std::span<const double> b) {
  assert(m.rows() == a.size() && m.cols() == b.size());
  for (std::size_t r = 0; r < a.size(); ++r) axpy(scale * a[r], b, m.row(r));
}

}  // namespace activealign
