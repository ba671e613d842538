// Copyright 2026 The lmkit Authors
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

#ifndef LMKIT_MATRIX_HPP
#define LMKIT_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "lmkit/error.hpp"
#include "lmkit/rng.hpp"

namespace lmkit {

// Dense row-major matrix of doubles. Deliberately minimal: the workloads in
// this project are desk-scale, and keeping the arithmetic order explicit in
// the call sites matters more than BLAS throughput.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng,
                         double scale = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data_) v = rng.gaussian() * scale;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void append_row(std::span<const double> values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    require(values.size() == cols_, Errc::shape_mismatch,
            "appended row width does not match matrix");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
  }

  // Rows [begin, end) as a new matrix.
  Matrix slice_rows(std::size_t begin, std::size_t end) const {
    Matrix out(end - begin, cols_);
    for (std::size_t r = begin; r < end; ++r)
      for (std::size_t c = 0; c < cols_; ++c) out(r - begin, c) = (*this)(r, c);
    return out;
  }

  void drop_front_rows(std::size_t n) {
    data_.erase(data_.begin(),
                data_.begin() + static_cast<std::ptrdiff_t>(n * cols_));
    rows_ -= n;
  }

  void clear_rows() {
    data_.clear();
    rows_ = 0;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), Errc::shape_mismatch, "matmul shapes");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace lmkit

#endif  // LMKIT_MATRIX_HPP
