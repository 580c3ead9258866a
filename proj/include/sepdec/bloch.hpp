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
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "sepdec/errors.hpp"
#include "sepdec/su_basis.hpp"
#include "sepdec/types.hpp"

namespace sepdec {

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPositivityTol = 1e-10;
inline constexpr double kAsymmetryWarnTol = 1e-9;
inline constexpr double kOrthogonalityTol = 1e-10;

/// Process-wide cache of SU(N) bases; entries are never invalidated.
inline const HermitianBasis& cached_generators(int n) {
  static std::mutex mutex;
  static std::map<int, HermitianBasis> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, generators(n)).first;
  return it->second;
}

inline double hermitian_defect(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of a Hermitian matrix.
inline double min_eigenvalue(const CMatrix& op) {
  if (op.rows() != op.cols()) throw ShapeError("min_eigenvalue: matrix is not square");
  const double scale = std::max(1.0, op.cwiseAbs().maxCoeff());
  if (hermitian_defect(op) > 1e-9 * scale) {
    throw PreconditionError("min_eigenvalue: operator is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(op, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

/// Hermitian trace-one operator on C^N (x) C^M; not necessarily positive.
struct HermitianUnitTrace {
  CMatrix matrix;
  int dim_a = 0;
  int dim_b = 1;

  [[nodiscard]] int dim() const { return static_cast<int>(matrix.rows()); }
};

inline double min_eigenvalue(const HermitianUnitTrace& op) { return min_eigenvalue(op.matrix); }

/// Validated density matrix: Hermitian, unit trace, min eigenvalue >= -1e-10.
/// Single-system states use dim_b = 1.
class DensityMatrix {
 public:
  DensityMatrix() = default;

  /// Validates `m` as a state on C^dim_a (x) C^dim_b. The input is
  /// symmetrized as (m + m^dagger)/2; the pre-symmetrization defect is kept
  /// in ingest_asymmetry() so callers can warn when it exceeds 1e-9.
  /// `trace_tol` bounds |Tr m - 1| before the trace is normalized away.
  static DensityMatrix from_matrix(const CMatrix& m, int dim_a, int dim_b = 1,
                                   double trace_tol = kTraceTol) {
    if (dim_a < 1 || dim_b < 1 || m.rows() != m.cols() || m.rows() != dim_a * dim_b) {
      throw ShapeError("density matrix of size " + std::to_string(m.rows()) + "x" +
                       std::to_string(m.cols()) + " does not match dims " +
                       std::to_string(dim_a) + "x" + std::to_string(dim_b));
    }
    DensityMatrix out;
    out.asymmetry_ = hermitian_defect(m);
    CMatrix h = (m + m.adjoint()) / 2.0;
    const double tr = h.trace().real();
    if (std::abs(tr - 1.0) > trace_tol) {
      throw PreconditionError("trace is " + std::to_string(tr) + ", expected 1");
    }
    h /= tr;
    const double lo = min_eigenvalue(h);
    if (lo < -kPositivityTol) {
      throw PreconditionError("operator is not positive semidefinite (min eigenvalue " +
                              std::to_string(lo) + ")");
    }
    out.matrix_ = std::move(h);
    out.dim_a_ = dim_a;
    out.dim_b_ = dim_b;
    return out;
  }

  static DensityMatrix from_operator(const HermitianUnitTrace& op) {
    return from_matrix(op.matrix, op.dim_a, op.dim_b);
  }

  [[nodiscard]] const CMatrix& matrix() const { return matrix_; }
  [[nodiscard]] int dim() const { return static_cast<int>(matrix_.rows()); }
  [[nodiscard]] int dim_a() const { return dim_a_; }
  [[nodiscard]] int dim_b() const { return dim_b_; }
  [[nodiscard]] double ingest_asymmetry() const { return asymmetry_; }
  [[nodiscard]] HermitianUnitTrace as_operator() const { return {matrix_, dim_a_, dim_b_}; }

 private:
  CMatrix matrix_;
  int dim_a_ = 0;
  int dim_b_ = 1;
  double asymmetry_ = 0.0;
};

inline double min_eigenvalue(const DensityMatrix& rho) { return min_eigenvalue(rho.matrix()); }

/// Local Bloch vectors a, b and correlation matrix T of a bipartite operator:
///   rho = 1/(NM) 1(x)1 + 1/(2M) a.lambda (x) 1 + 1/(2N) 1 (x) b.sigma
///         + 1/4 sum T_{mu nu} lambda_mu (x) sigma_nu.
struct BlochForm {
  int dim_a = 0;
  int dim_b = 0;
  RVector a;
  RVector b;
  RMatrix correlation;
};

namespace detail {

inline void check_bipartite(const CMatrix& m, int n, int mm, const char* where) {
  if (n < 2 || mm < 2) {
    throw InvalidDimension(std::string(where) + ": factor dimensions must be >= 2");
  }
  if (m.rows() != m.cols() || m.rows() != n * mm) {
    throw ShapeError(std::string(where) + ": matrix size " + std::to_string(m.rows()) +
                     " does not match " + std::to_string(n) + "x" + std::to_string(mm));
  }
}

/// Tr[A B] without forming the product.
inline cplx trace_product(const CMatrix& a, const CMatrix& b) {
  return (a.array() * b.transpose().array()).sum();
}

}  // namespace detail

/// Bloch vector r of a single-system operator, r_mu = Tr[rho lambda_mu].
inline RVector bloch_vector(const CMatrix& rho) {
  const int n = static_cast<int>(rho.rows());
  const auto& basis = cached_generators(n);
  RVector r(basis.size());
  for (int mu = 0; mu < basis.size(); ++mu) r(mu) = detail::trace_product(rho, basis[mu]).real();
  return r;
}

/// 1/N + (1/2) r.lambda.
inline CMatrix local_operator(const RVector& r, int n) {
  const auto& basis = cached_generators(n);
  if (r.size() != basis.size()) {
    throw ShapeError("local_operator: Bloch vector length " + std::to_string(r.size()) +
                     " does not match SU(" + std::to_string(n) + ")");
  }
  CMatrix out = CMatrix::Identity(n, n) / static_cast<double>(n);
  for (int mu = 0; mu < basis.size(); ++mu) {
    if (r(mu) != 0.0) out += 0.5 * r(mu) * basis[mu];
  }
  return out;
}

inline BlochForm to_bloch(const CMatrix& rho, int n, int m) {
  detail::check_bipartite(rho, n, m, "to_bloch");
  const auto& la = cached_generators(n);
  const auto& sb = cached_generators(m);

  BlochForm out;
  out.dim_a = n;
  out.dim_b = m;
  out.a = RVector::Zero(la.size());
  out.b = RVector::Zero(sb.size());
  out.correlation = RMatrix::Zero(la.size(), sb.size());

  // k_nu(i,j) = Tr[rho_ij sigma_nu] over the M x M blocks rho_ij; then
  // Tr[rho (lambda_mu (x) sigma_nu)] = Tr[k_nu lambda_mu].
  CMatrix k(n, n);
  CMatrix rho_a = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) rho_a(i, j) = rho.block(i * m, j * m, m, m).trace();
  }
  CMatrix rho_b = CMatrix::Zero(m, m);
  for (int i = 0; i < n; ++i) rho_b += rho.block(i * m, i * m, m, m);

  for (int mu = 0; mu < la.size(); ++mu) out.a(mu) = detail::trace_product(rho_a, la[mu]).real();
  for (int nu = 0; nu < sb.size(); ++nu) out.b(nu) = detail::trace_product(rho_b, sb[nu]).real();

  for (int nu = 0; nu < sb.size(); ++nu) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        k(i, j) = detail::trace_product(rho.block(i * m, j * m, m, m), sb[nu]);
      }
    }
    for (int mu = 0; mu < la.size(); ++mu) {
      out.correlation(mu, nu) = detail::trace_product(k, la[mu]).real();
    }
  }
  return out;
}

inline BlochForm to_bloch(const DensityMatrix& rho, int n, int m) {
  return to_bloch(rho.matrix(), n, m);
}

inline HermitianUnitTrace from_bloch(const BlochForm& bf) {
  const int n = bf.dim_a;
  const int m = bf.dim_b;
  if (n < 2 || m < 2) throw InvalidDimension("from_bloch: factor dimensions must be >= 2");
  const auto& la = cached_generators(n);
  const auto& sb = cached_generators(m);
  if (bf.a.size() != la.size() || bf.b.size() != sb.size() ||
      bf.correlation.rows() != la.size() || bf.correlation.cols() != sb.size()) {
    throw ShapeError("from_bloch: Bloch data inconsistent with dims " + std::to_string(n) + "x" +
                     std::to_string(m));
  }
  const CMatrix id_a = CMatrix::Identity(n, n);
  const CMatrix id_b = CMatrix::Identity(m, m);

  CMatrix out = CMatrix::Identity(n * m, n * m) / static_cast<double>(n * m);
  CMatrix a_op = CMatrix::Zero(n, n);
  for (int mu = 0; mu < la.size(); ++mu) a_op += bf.a(mu) * la[mu];
  CMatrix b_op = CMatrix::Zero(m, m);
  for (int nu = 0; nu < sb.size(); ++nu) b_op += bf.b(nu) * sb[nu];
  out += Eigen::kroneckerProduct(a_op, id_b).eval() / (2.0 * m);
  out += Eigen::kroneckerProduct(id_a, b_op).eval() / (2.0 * n);

  // sum_mu lambda_mu (x) (sum_nu T_{mu nu} sigma_nu)
  for (int mu = 0; mu < la.size(); ++mu) {
    CMatrix row_op = CMatrix::Zero(m, m);
    bool any = false;
    for (int nu = 0; nu < sb.size(); ++nu) {
      const double t = bf.correlation(mu, nu);
      if (t != 0.0) {
        row_op += t * sb[nu];
        any = true;
      }
    }
    if (any) out += 0.25 * Eigen::kroneckerProduct(la[mu], row_op).eval();
  }
  return {out, n, m};
}

/// Tr_B.
inline CMatrix partial_trace_b(const CMatrix& rho, int n, int m) {
  detail::check_bipartite(rho, n, m, "reduce_a");
  CMatrix out(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) out(i, j) = rho.block(i * m, j * m, m, m).trace();
  }
  return out;
}

/// Tr_A.
inline CMatrix partial_trace_a(const CMatrix& rho, int n, int m) {
  detail::check_bipartite(rho, n, m, "reduce_b");
  CMatrix out = CMatrix::Zero(m, m);
  for (int i = 0; i < n; ++i) out += rho.block(i * m, i * m, m, m);
  return out;
}

inline DensityMatrix reduce_a(const DensityMatrix& rho, int n, int m) {
  return DensityMatrix::from_matrix(partial_trace_b(rho.matrix(), n, m), n, 1, 1e-10);
}

inline DensityMatrix reduce_b(const DensityMatrix& rho, int n, int m) {
  return DensityMatrix::from_matrix(partial_trace_a(rho.matrix(), n, m), m, 1, 1e-10);
}

/// Transpose on factor B.
inline CMatrix partial_transpose_b(const CMatrix& rho, int n, int m) {
  detail::check_bipartite(rho, n, m, "partial_transpose_b");
  CMatrix out(n * m, n * m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out.block(i * m, j * m, m, m) = rho.block(i * m, j * m, m, m).transpose();
    }
  }
  return out;
}

inline double orthogonality_defect(const RMatrix& o) {
  if (o.rows() != o.cols()) return std::numeric_limits<double>::infinity();
  return (o * o.transpose() - RMatrix::Identity(o.rows(), o.rows())).cwiseAbs().maxCoeff();
}

/// a' = O_A a, b' = O_B b, T' = O_A T O_B^T.
inline BlochForm apply_local_orthogonal(const BlochForm& bf, const RMatrix& o_a,
                                        const RMatrix& o_b) {
  if (o_a.rows() != bf.correlation.rows() || o_b.rows() != bf.correlation.cols()) {
    throw ShapeError("apply_local_orthogonal: map sizes do not match the Bloch data");
  }
  if (orthogonality_defect(o_a) > kOrthogonalityTol) {
    throw PreconditionError("apply_local_orthogonal: O_A is not orthogonal");
  }
  if (orthogonality_defect(o_b) > kOrthogonalityTol) {
    throw PreconditionError("apply_local_orthogonal: O_B is not orthogonal");
  }
  BlochForm out = bf;
  out.a = o_a * bf.a;
  out.b = o_b * bf.b;
  out.correlation = o_a * bf.correlation * o_b.transpose();
  return out;
}

/// Superoperator X with vectorize(S(rho)) = X vectorize(rho), where S maps
/// 1/N + r.lambda/2 to Tr[rho]/N + (O r).lambda/2.
inline CMatrix superoperator_from_orthogonal(const RMatrix& o, int n) {
  const auto& basis = cached_generators(n);
  if (o.rows() != basis.size() || o.cols() != basis.size()) {
    throw ShapeError("superoperator_from_orthogonal: map size does not match SU(N)");
  }
  const CVector vid = vectorize(CMatrix::Identity(n, n));
  CMatrix x = vid * vid.transpose() / static_cast<double>(n);
  for (int mu = 0; mu < basis.size(); ++mu) {
    const CVector out_mu = vectorize(basis[mu]);
    for (int nu = 0; nu < basis.size(); ++nu) {
      if (o(mu, nu) == 0.0) continue;
      // r_nu = Tr[rho lambda_nu] = vectorize(lambda_nu^T) . vectorize(rho)
      const CVector in_nu = vectorize(basis[nu].transpose());
      x += 0.5 * o(mu, nu) * out_mu * in_nu.transpose();
    }
  }
  return x;
}

/// (S_A (x) S_B)(rho) = R^-1[ W( (X_A (x) X_B) V[R(rho)] ) ].
inline CMatrix apply_local_maps(const CMatrix& rho, const CMatrix& x_a, const CMatrix& x_b, int n,
                                int m) {
  detail::check_bipartite(rho, n, m, "apply_local_maps");
  if (x_a.rows() != n * n || x_a.cols() != n * n || x_b.rows() != m * m ||
      x_b.cols() != m * m) {
    throw ShapeError("apply_local_maps: superoperator sizes do not match the factors");
  }
  const CMatrix r = realign(rho, n, m);  // (m^2) x (n^2)
  const CVector v = vectorize(r);        // v = sum vec(A-part) (x) vec(B-part)
  const CVector mapped = Eigen::kroneckerProduct(x_a, x_b).eval() * v;
  return realign_inverse(wrap(mapped, m * m, n * n), n, m);
}

/// |r|^2 = 2 (Tr[rho^2] - 1/N).
inline double purity_bloch_norm2(const CMatrix& rho) {
  const double purity = detail::trace_product(rho, rho).real();
  return 2.0 * (purity - 1.0 / static_cast<double>(rho.rows()));
}

}  // namespace sepdec
