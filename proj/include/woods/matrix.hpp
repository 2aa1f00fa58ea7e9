// include/woods/matrix.hpp

// Copyright 2026 woods contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WOODS_MATRIX_HPP_
#define WOODS_MATRIX_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "woods/numeric.hpp"

namespace woods {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = M x
Vector matvec(const Matrix& m, std::span<const double> x);

// y = M^T x
Vector matvec_transpose(const Matrix& m, std::span<const double> x);

// out += scale * (a b^T)
void add_outer(Matrix& out, std::span<const double> a, std::span<const double> b,
               double scale);

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// Throws ConfigError when the input is not symmetric positive definite.
Matrix cholesky(const Matrix& a);

}  // namespace woods

#endif  // WOODS_MATRIX_HPP_
