// src/matrix.cpp

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

#include "woods/matrix.hpp"

#include <cmath>

#include "woods/errors.hpp"

namespace woods {

Vector matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) {
    throw ConfigError("matvec: vector length " + std::to_string(x.size()) +
                      " does not match matrix cols " + std::to_string(m.cols()));
  }
  Vector y(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

Vector matvec_transpose(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.rows()) {
    throw ConfigError("matvec_transpose: vector length " + std::to_string(x.size()) +
                      " does not match matrix rows " + std::to_string(m.rows()));
  }
  Vector y(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) y[j] += m(i, j) * x[i];
  }
  return y;
}

void add_outer(Matrix& out, std::span<const double> a, std::span<const double> b,
               double scale) {
  if (a.size() != out.rows() || b.size() != out.cols()) {
    throw ConfigError("add_outer: shape mismatch");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = scale * a[i];
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) += ai * b[j];
  }
}

Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ConfigError("cholesky: matrix not square");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * (1.0 + std::abs(a(i, j)))) {
        throw ConfigError("cholesky: matrix not symmetric");
      }
    }
  }
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s)) {
          throw ConfigError("cholesky: matrix not positive definite");
        }
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

}  // namespace woods
