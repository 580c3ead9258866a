// Copyright 2026 The sepdec Authors
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

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sepdec/errors.hpp"
#include "sepdec/types.hpp"

namespace sepdec {

/// Generalized Gell-Mann generators of SU(N).
///
/// Order: index pairs (j,k), j<k, are visited as (1,2),(1,3),(2,3),(1,4),...;
/// each pair contributes its symmetric then its antisymmetric generator, and
/// the d-th diagonal generator follows the last pair confined to the first
/// d+1 basis states. For N=2 this is (sigma_x, sigma_y, sigma_z), for N=3 the
/// usual eight Gell-Mann matrices, and for N=4 index 13 (1-based) is the
/// symmetric generator on states (3,4).
struct HermitianBasis {
  int dimension = 0;
  std::vector<CMatrix> generators;

  [[nodiscard]] int size() const { return static_cast<int>(generators.size()); }
  /// 0-based access.
  [[nodiscard]] const CMatrix& operator[](int mu) const { return generators[mu]; }
};

inline HermitianBasis generators(int n) {
  if (n < 2) {
    throw InvalidDimension("SU(N) generators need N >= 2, got " + std::to_string(n));
  }
  HermitianBasis basis;
  basis.dimension = n;
  basis.generators.reserve(static_cast<std::size_t>(n * n - 1));
  const cplx i_unit(0.0, 1.0);
  for (int k = 1; k < n; ++k) {
    for (int j = 0; j < k; ++j) {
      CMatrix sym = CMatrix::Zero(n, n);
      sym(j, k) = 1.0;
      sym(k, j) = 1.0;
      CMatrix anti = CMatrix::Zero(n, n);
      anti(j, k) = -i_unit;
      anti(k, j) = i_unit;
      basis.generators.push_back(std::move(sym));
      basis.generators.push_back(std::move(anti));
    }
    // Diagonal generator on the first k+1 states.
    const double d = k;
    const double scale = std::sqrt(2.0 / (d * (d + 1.0)));
    CMatrix diag = CMatrix::Zero(n, n);
    for (int j = 0; j < k; ++j) diag(j, j) = scale;
    diag(k, k) = -d * scale;
    basis.generators.push_back(std::move(diag));
  }
  return basis;
}

/// Column-stacking vectorization.
template <typename Derived>
auto vectorize(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense = a;
  return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(
      Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(dense.data(), dense.size()));
}

/// Inverse of vectorize.
template <typename Derived>
auto wrap(const Eigen::MatrixBase<Derived>& v, Eigen::Index rows, Eigen::Index cols) {
  using Scalar = typename Derived::Scalar;
  if (rows < 0 || cols < 0 || v.size() != rows * cols) {
    throw ShapeError("wrap: vector of length " + std::to_string(v.size()) +
                     " cannot form a " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " matrix");
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dense = v;
  return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(
      Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>(dense.data(), rows,
                                                                               cols));
}

/// Realignment of an (I1*I2)x(I1*I2) matrix viewed as I1xI1 blocks of size
/// I2xI2. Column (i + j*I1) of the I2^2 x I1^2 result is vectorize(A_ij), so
/// realign(B (x) C) = vectorize(C) vectorize(B)^T.
inline CMatrix realign(const CMatrix& a, int i1, int i2) {
  if (i1 < 1 || i2 < 1 || a.rows() != a.cols() || a.rows() != i1 * i2) {
    throw ShapeError("realign: expected a square " + std::to_string(i1 * i2) + "x" +
                     std::to_string(i1 * i2) + " matrix");
  }
  CMatrix out(i2 * i2, i1 * i1);
  for (int j = 0; j < i1; ++j) {
    for (int i = 0; i < i1; ++i) {
      const CMatrix block = a.block(i * i2, j * i2, i2, i2);
      out.col(i + j * i1) = vectorize(block);
    }
  }
  return out;
}

inline CMatrix realign_inverse(const CMatrix& r, int i1, int i2) {
  if (i1 < 1 || i2 < 1 || r.rows() != i2 * i2 || r.cols() != i1 * i1) {
    throw ShapeError("realign_inverse: expected a " + std::to_string(i2 * i2) + "x" +
                     std::to_string(i1 * i1) + " matrix");
  }
  CMatrix out(i1 * i2, i1 * i2);
  for (int j = 0; j < i1; ++j) {
    for (int i = 0; i < i1; ++i) {
      out.block(i * i2, j * i2, i2, i2) = wrap(r.col(i + j * i1), i2, i2);
    }
  }
  return out;
}

}  // namespace sepdec
