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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sepdec/bloch.hpp"
#include "sepdec/errors.hpp"
#include "sepdec/verdict.hpp"

namespace sepdec {

inline constexpr double kRankTol = 1e-9;
inline constexpr double kLeakTol = 1e-8;

/// Local ranks and the unitaries that sort each marginal's spectrum in
/// descending order: U_A rho_A U_A^dag = diag(lambda_1 >= ... >= lambda_N).
struct LocalRankReport {
  int dim_a = 0;
  int dim_b = 0;
  int n = 0;
  int m = 0;
  CMatrix u_a;
  CMatrix u_b;
  RVector spectrum_a;
  RVector spectrum_b;
  /// Largest out-of-range correlation of the rotated state that is not
  /// accounted for by its support block (see local_ranks).
  double leak = 0.0;
};

namespace detail {

/// Unitary whose rows are eigenvectors of `h`, eigenvalues descending.
inline std::pair<CMatrix, RVector> sorted_eigenbasis(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  const int n = static_cast<int>(h.rows());
  CMatrix u(n, n);
  RVector w(n);
  for (int k = 0; k < n; ++k) {
    u.row(k) = solver.eigenvectors().col(n - 1 - k).adjoint();
    w(k) = solver.eigenvalues()(n - 1 - k);
  }
  return {u, w};
}

inline CMatrix support_projector(int dim, int rank) {
  CMatrix p = CMatrix::Zero(dim, dim);
  for (int k = 0; k < rank; ++k) p(k, k) = 1.0;
  return p;
}

inline CMatrix inverse_sqrt(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  const RVector w = solver.eigenvalues().cwiseSqrt().cwiseInverse();
  return solver.eigenvectors() * w.asDiagonal() * solver.eigenvectors().adjoint();
}

}  // namespace detail

/// Local ranks with rank threshold `rank_tol`.
///
/// The state is rotated to rho' = (U_A (x) U_B) rho (U_A (x) U_B)^dag. For a
/// separable state the product terms live on span{first n} (x) span{first m},
/// so every correlation T'_{mu nu} with mu >= n^2-1 or nu >= m^2-1 must equal
/// the value it takes on P rho' P (P the support projector). `leak` is the
/// largest deviation from those values.
inline LocalRankReport local_ranks(const DensityMatrix& rho, int n_dim, int m_dim,
                                   double rank_tol = kRankTol) {
  const CMatrix& mat = rho.matrix();
  detail::check_bipartite(mat, n_dim, m_dim, "local_ranks");
  LocalRankReport rep;
  rep.dim_a = n_dim;
  rep.dim_b = m_dim;
  std::tie(rep.u_a, rep.spectrum_a) = detail::sorted_eigenbasis(partial_trace_b(mat, n_dim, m_dim));
  std::tie(rep.u_b, rep.spectrum_b) = detail::sorted_eigenbasis(partial_trace_a(mat, n_dim, m_dim));
  rep.n = static_cast<int>((rep.spectrum_a.array() > rank_tol).count());
  rep.m = static_cast<int>((rep.spectrum_b.array() > rank_tol).count());

  if (rep.n == n_dim && rep.m == m_dim) return rep;

  const CMatrix u = Eigen::kroneckerProduct(rep.u_a, rep.u_b).eval();
  const CMatrix rotated = u * mat * u.adjoint();
  const CMatrix p = Eigen::kroneckerProduct(detail::support_projector(n_dim, rep.n),
                                            detail::support_projector(m_dim, rep.m))
                        .eval();
  const RMatrix t_full = to_bloch(rotated, n_dim, m_dim).correlation;
  const RMatrix t_block = to_bloch((p * rotated * p).eval(), n_dim, m_dim).correlation;
  const int first_a = rep.n * rep.n - 1;
  const int first_b = rep.m * rep.m - 1;
  double leak = 0.0;
  for (int mu = 0; mu < t_full.rows(); ++mu) {
    for (int nu = 0; nu < t_full.cols(); ++nu) {
      if (mu >= first_a || nu >= first_b) {
        leak = std::max(leak, std::abs(t_full(mu, nu) - t_block(mu, nu)));
      }
    }
  }
  rep.leak = leak;
  return rep;
}

/// Entangled when the rotated state carries correlations outside its local
/// supports.
inline Verdict observation1_test(const LocalRankReport& report, double tol = kLeakTol) {
  if (report.leak > tol) {
    return Verdict::entangled("observation1",
                              "correlations outside the local supports (ranks " +
                                  std::to_string(report.n) + "," + std::to_string(report.m) + ")",
                              report.leak, tol);
  }
  if (report.n == report.dim_a && report.m == report.dim_b) {
    return Verdict::inconclusive("observation1", "full local ranks");
  }
  return Verdict::inconclusive("observation1", "no correlations outside the local supports");
}

/// State compressed to its n x m local supports, with the isometries that
/// embed it back: rho = (V_A (x) V_B) reduced (V_A (x) V_B)^dag.
struct SupportReduction {
  DensityMatrix state;
  CMatrix iso_a;  // N x n
  CMatrix iso_b;  // M x m
};

inline SupportReduction reduce_local_support(const DensityMatrix& rho,
                                             const LocalRankReport& report,
                                             double tol = kLeakTol) {
  if (report.leak > tol) {
    throw InvalidReduction("reduce_local_support: state has correlations outside its supports");
  }
  const int n_dim = report.dim_a;
  const int m_dim = report.dim_b;
  detail::check_bipartite(rho.matrix(), n_dim, m_dim, "reduce_local_support");
  SupportReduction out;
  out.iso_a = report.u_a.adjoint().leftCols(report.n);
  out.iso_b = report.u_b.adjoint().leftCols(report.m);
  const CMatrix v = Eigen::kroneckerProduct(out.iso_a, out.iso_b).eval();
  const CMatrix compressed = v.adjoint() * rho.matrix() * v;
  out.state = DensityMatrix::from_matrix(compressed, report.n, report.m, 1e-9);
  return out;
}

/// Locally filtered state with maximally mixed marginals:
/// state = (F_A (x) F_B) rho (F_A (x) F_B)^dag / Tr[...].
struct NormalForm {
  DensityMatrix state;
  CMatrix f_a;
  CMatrix f_b;
  int iterations = 0;
};

/// Alternating local filtering rho <- (X (x) 1) rho (X (x) 1)^dag with
/// X = (N rho_A)^{-1/2}, then the same on B, until |a|, |b| < tol.
inline NormalForm filter_to_normal_form(const DensityMatrix& rho, int n_dim, int m_dim,
                                        double tol = 1e-10, int max_iter = 1000) {
  detail::check_bipartite(rho.matrix(), n_dim, m_dim, "filter_to_normal_form");
  const LocalRankReport rep = local_ranks(rho, n_dim, m_dim);
  if (rep.n < n_dim || rep.m < m_dim) {
    throw PreconditionError("filter_to_normal_form: local ranks (" + std::to_string(rep.n) + "," +
                            std::to_string(rep.m) + ") are not full");
  }

  CMatrix cur = rho.matrix();
  CMatrix f_a = CMatrix::Identity(n_dim, n_dim);
  CMatrix f_b = CMatrix::Identity(m_dim, m_dim);
  const CMatrix id_a = f_a;
  const CMatrix id_b = f_b;
  double a_norm = 0.0;
  double b_norm = 0.0;
  for (int it = 0; it <= max_iter; ++it) {
    const CMatrix rho_a = partial_trace_b(cur, n_dim, m_dim);
    const CMatrix rho_b = partial_trace_a(cur, n_dim, m_dim);
    a_norm = bloch_vector(rho_a).norm();
    b_norm = bloch_vector(rho_b).norm();
    if (a_norm < tol && b_norm < tol) {
      NormalForm out;
      out.state = DensityMatrix::from_matrix(cur, n_dim, m_dim, 1e-9);
      out.f_a = f_a;
      out.f_b = f_b;
      out.iterations = it;
      return out;
    }
    if (it == max_iter) break;

    const CMatrix x_a = detail::inverse_sqrt(static_cast<double>(n_dim) * rho_a);
    const CMatrix ka = Eigen::kroneckerProduct(x_a, id_b).eval();
    cur = ka * cur * ka.adjoint();
    cur /= cur.trace().real();
    f_a = x_a * f_a;

    const CMatrix x_b =
        detail::inverse_sqrt(static_cast<double>(m_dim) * partial_trace_a(cur, n_dim, m_dim));
    const CMatrix kb = Eigen::kroneckerProduct(id_a, x_b).eval();
    cur = kb * cur * kb.adjoint();
    cur = (cur + cur.adjoint()) / 2.0;
    cur /= cur.trace().real();
    f_b = x_b * f_b;
  }
  throw ConvergenceError("filter_to_normal_form: no convergence after " +
                             std::to_string(max_iter) + " iterations",
                         a_norm, b_norm);
}

}  // namespace sepdec
