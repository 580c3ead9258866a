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

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include <unsupported/Eigen/KroneckerProduct>

#include "sepdec/bloch.hpp"
#include "sepdec/verdict.hpp"

namespace sepdec {

enum class Family { Example2x4, Octahedral, Tetrahedral };

struct FamilyParams {
  Family family = Family::Example2x4;
  double t[3] = {0.0, 0.0, 0.0};
};

namespace detail {

// 1/(NM) + (1/4) sum_k t_k lambda_{a_k} (x) sigma_{b_k}, indices 0-based.
inline HermitianUnitTrace correlated_family(int n, int m, const int (&ia)[3], const int (&ib)[3],
                                            double t1, double t2, double t3) {
  const auto& ga = cached_generators(n);
  const auto& gb = cached_generators(m);
  const double t[3] = {t1, t2, t3};
  CMatrix op = CMatrix::Identity(n * m, n * m) / static_cast<double>(n * m);
  for (int k = 0; k < 3; ++k) {
    if (t[k] != 0.0) op += 0.25 * t[k] * Eigen::kroneckerProduct(ga[ia[k]], gb[ib[k]]).eval();
  }
  return {op, n, m};
}

}  // namespace detail

/// 2x4 state with couplings sigma_1 (x) lambda_1, sigma_2 (x) lambda_13, sigma_3 (x) lambda_3.
inline HermitianUnitTrace example_2x4(double t1, double t2, double t3) {
  return detail::correlated_family(2, 4, {0, 1, 2}, {0, 12, 2}, t1, t2, t3);
}

/// 3x3 state with couplings lambda_k (x) lambda_k, k = 1, 2, 3.
inline HermitianUnitTrace octahedral(double t1, double t2, double t3) {
  return detail::correlated_family(3, 3, {0, 1, 2}, {0, 1, 2}, t1, t2, t3);
}

/// 3x3 state with couplings lambda_1 (x) lambda_1, lambda_2 (x) lambda_4, lambda_3 (x) lambda_6.
inline HermitianUnitTrace tetrahedral(double t1, double t2, double t3) {
  return detail::correlated_family(3, 3, {0, 1, 2}, {0, 3, 5}, t1, t2, t3);
}

inline HermitianUnitTrace make_family(const FamilyParams& p) {
  switch (p.family) {
    case Family::Example2x4:
      return example_2x4(p.t[0], p.t[1], p.t[2]);
    case Family::Octahedral:
      return octahedral(p.t[0], p.t[1], p.t[2]);
    case Family::Tetrahedral:
      return tetrahedral(p.t[0], p.t[1], p.t[2]);
  }
  throw std::invalid_argument("unknown family");
}

inline Family parse_family(const std::string& name) {
  if (name == "2x4") return Family::Example2x4;
  if (name == "octahedral") return Family::Octahedral;
  if (name == "tetrahedral") return Family::Tetrahedral;
  throw std::invalid_argument("unknown family '" + name + "'");
}

namespace detail {

inline CMatrix random_gram(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix g(dim, dim);
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < dim; ++i) g(i, j) = cplx(normal(rng), normal(rng));
  }
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return (rho + rho.adjoint()) / 2.0;
}

}  // namespace detail

/// G G^dag / Tr with G a seeded complex Gaussian matrix.
inline DensityMatrix random_density(int dim_a, int dim_b, std::uint64_t seed) {
  if (dim_a < 1 || dim_b < 1 || dim_a * dim_b < 2) {
    throw InvalidDimension("random_density: dimension must be at least 2");
  }
  std::mt19937_64 rng(seed);
  return DensityMatrix::from_matrix(detail::random_gram(dim_a * dim_b, rng), dim_a, dim_b, 1e-9);
}

inline DensityMatrix random_density(int dim, std::uint64_t seed) {
  return random_density(dim, 1, seed);
}

/// Mixture of `terms` random product states with Dirichlet(1, ..., 1) weights,
/// returned together with the generating decomposition.
inline std::pair<DensityMatrix, SeparableDecomposition> random_separable(int n, int m, int terms,
                                                                         std::uint64_t seed) {
  if (n < 2 || m < 2) throw InvalidDimension("random_separable: local dimensions must be >= 2");
  if (terms < 1) throw PreconditionError("random_separable: need at least one term");
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  SeparableDecomposition dec;
  dec.dim_a = n;
  dec.dim_b = m;
  dec.weights.resize(terms);
  for (int i = 0; i < terms; ++i) dec.weights(i) = expo(rng);
  dec.weights /= dec.weights.sum();
  CMatrix rho = CMatrix::Zero(n * m, n * m);
  for (int i = 0; i < terms; ++i) {
    CMatrix a = detail::random_gram(n, rng);
    CMatrix b = detail::random_gram(m, rng);
    rho += dec.weights(i) * Eigen::kroneckerProduct(a, b).eval();
    dec.r_list.push_back(bloch_vector(a));
    dec.s_list.push_back(bloch_vector(b));
    dec.rho_a_list.push_back(std::move(a));
    dec.rho_b_list.push_back(std::move(b));
  }
  return {DensityMatrix::from_matrix(rho, n, m, 1e-9), std::move(dec)};
}

}  // namespace sepdec
