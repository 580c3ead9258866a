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

#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

#include "sepdec/bloch.hpp"
#include "sepdec/criteria.hpp"
#include "sepdec/errors.hpp"
#include "sepdec/normal_form.hpp"
#include "sepdec/optimize.hpp"
#include "sepdec/verdict.hpp"

namespace sepdec {

/// Number of terms used for a correlation matrix of rank l: the smallest
/// power of two that is at least l + 1, and never below 2.
inline int sign_matrix_size(int l) {
  int size = 2;
  while (size < l + 1) size *= 2;
  return size;
}

/// Normalized Sylvester-Hadamard matrix with the constant row moved last.
/// Rows 0..L-2 are the non-constant Sylvester rows in natural order.
inline RMatrix hadamard_sign_matrix(int size) {
  if (size < 1 || (size & (size - 1)) != 0) {
    throw PreconditionError("hadamard_sign_matrix: " + std::to_string(size) +
                            " is not a power of 2");
  }
  RMatrix h(size, size);
  const double scale = 1.0 / std::sqrt(static_cast<double>(size));
  for (int row = 0; row < size; ++row) {
    const int src = (row + 1) % size;
    for (int col = 0; col < size; ++col) {
      h(row, col) = (std::popcount(static_cast<unsigned>(src & col)) % 2 == 0) ? scale : -scale;
    }
  }
  return h;
}

/// T = M_rp M_sp^T with M_rp = U diag(scales) D H_l, M_sp = V diag(tau/scales) D H_l,
/// where H_l holds the first l rows of hadamard_sign_matrix(L) and D = diag(row_signs).
struct Factorization {
  RMatrix correlation;
  RMatrix m_rp;    // (N^2-1) x L
  RMatrix m_sp;    // (M^2-1) x L
  RVector scales;  // alpha per singular direction, in the order of tau
  RVector tau;
  RVector row_signs;
  RVector alpha;  // singular values of M_rp, descending, length L
  RVector beta;   // singular values of M_sp, descending, length L
  RMatrix q1;     // M_rp = X diag(alpha) q1
  RMatrix q2;     // M_sp = Y diag(beta) q2
  int size = 0;   // L

  [[nodiscard]] int rank() const { return static_cast<int>(tau.size()); }
};

namespace detail {

inline RMatrix ordered_rows(const RMatrix& rows_l, const RMatrix& h, const RVector& key) {
  const int l = static_cast<int>(rows_l.rows());
  const int size = static_cast<int>(h.rows());
  std::vector<int> order(l);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return key(i) > key(j); });
  RMatrix q(size, size);
  for (int k = 0; k < l; ++k) q.row(k) = rows_l.row(order[k]);
  for (int k = l; k < size; ++k) q.row(k) = h.row(k);
  return q;
}

inline RVector padded_descending(const RVector& v, int size) {
  std::vector<double> vals(v.data(), v.data() + v.size());
  std::sort(vals.begin(), vals.end(), std::greater<>());
  RVector out = RVector::Zero(size);
  for (std::size_t k = 0; k < vals.size(); ++k) out(static_cast<Eigen::Index>(k)) = vals[k];
  return out;
}

inline int numeric_rank(const RMatrix& m, double tol = 1e-10) {
  if (m.size() == 0) return 0;
  const RVector sv = Eigen::JacobiSVD<RMatrix>(m).singularValues();
  return static_cast<int>((sv.array() > tol).count());
}

}  // namespace detail

inline Factorization factor_correlation(const RMatrix& t, const CorrelationSubspaces& subs,
                                        const RVector& scales,
                                        std::optional<RVector> row_signs = std::nullopt) {
  const int l = subs.rank();
  if (scales.size() != l) {
    throw PreconditionError("factor_correlation: expected " + std::to_string(l) +
                            " scales, got " + std::to_string(scales.size()));
  }
  if (l > 0 && !(scales.array() > 0.0).all()) {
    throw PreconditionError("factor_correlation: scales must be positive");
  }
  RVector signs = row_signs.value_or(RVector::Ones(l));
  if (signs.size() != l || !(signs.array().abs() == 1.0).all()) {
    throw PreconditionError("factor_correlation: row signs must be l entries of +-1");
  }

  Factorization f;
  f.correlation = t;
  f.size = sign_matrix_size(l);
  f.tau = subs.tau;
  f.scales = scales;
  f.row_signs = signs;
  const RMatrix h = hadamard_sign_matrix(f.size);
  const RMatrix rows = signs.asDiagonal() * h.topRows(l);
  const RVector beta_dir = l > 0 ? RVector(subs.tau.cwiseQuotient(scales)) : RVector();
  f.m_rp = subs.left * scales.asDiagonal() * rows;
  f.m_sp = subs.right * beta_dir.asDiagonal() * rows;
  if (l == 0) {
    f.m_rp = RMatrix::Zero(t.rows(), f.size);
    f.m_sp = RMatrix::Zero(t.cols(), f.size);
  }
  f.alpha = detail::padded_descending(scales, f.size);
  f.beta = detail::padded_descending(beta_dir, f.size);
  f.q1 = detail::ordered_rows(rows, h, scales);
  f.q2 = detail::ordered_rows(rows, h, beta_dir);
  return f;
}

inline Factorization factor_correlation(const RMatrix& t, const RVector& scales,
                                        std::optional<RVector> row_signs = std::nullopt) {
  return factor_correlation(t, correlation_support_subspaces(t), scales, std::move(row_signs));
}

/// Ranks n, m of M_rp, M_sp and l of T satisfy
/// n + m - L <= l <= min(n, m) <= max(n, m) <= L.
inline bool rank_chain_holds(const Factorization& f) {
  const int n = detail::numeric_rank(f.m_rp);
  const int m = detail::numeric_rank(f.m_sp);
  const int l = detail::numeric_rank(f.correlation);
  return n + m - f.size <= l && l <= std::min(n, m) && std::max(n, m) <= f.size;
}

/// Equal-weight product decomposition realized from the columns of M_rp, M_sp.
/// Positivity of the local states is not checked here.
inline SeparableDecomposition build_decomposition(const Factorization& f, int n, int m) {
  if (f.m_rp.rows() != n * n - 1 || f.m_sp.rows() != m * m - 1) {
    throw ShapeError("build_decomposition: factorization does not match dims " +
                     std::to_string(n) + "x" + std::to_string(m));
  }
  SeparableDecomposition dec;
  dec.dim_a = n;
  dec.dim_b = m;
  dec.weights = RVector::Constant(f.size, 1.0 / f.size);
  const double root = std::sqrt(static_cast<double>(f.size));
  for (int i = 0; i < f.size; ++i) {
    RVector r = root * f.m_rp.col(i);
    RVector s = root * f.m_sp.col(i);
    dec.rho_a_list.push_back(local_operator(r, n));
    dec.rho_b_list.push_back(local_operator(s, m));
    dec.r_list.push_back(std::move(r));
    dec.s_list.push_back(std::move(s));
  }
  return dec;
}

inline CMatrix reconstruct(const SeparableDecomposition& dec) {
  const int dim = dec.dim_a * dec.dim_b;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (int i = 0; i < dec.terms(); ++i) {
    out += dec.weights(i) *
           Eigen::kroneckerProduct(dec.rho_a_list[static_cast<std::size_t>(i)],
                                   dec.rho_b_list[static_cast<std::size_t>(i)])
               .eval();
  }
  return out;
}

struct ValidationReport {
  bool psd_ok = false;
  bool weights_ok = false;
  bool shape_ok = false;
  double reconstruction_error = std::numeric_limits<double>::infinity();
  double min_local_eigenvalue = -std::numeric_limits<double>::infinity();
  double weight_sum = 0.0;
  double tol = 1e-9;

  [[nodiscard]] bool ok() const {
    return shape_ok && psd_ok && weights_ok && reconstruction_error <= tol;
  }
};

inline ValidationReport validate_decomposition(const CMatrix& rho,
                                               const SeparableDecomposition& dec,
                                               double tol = 1e-9) {
  ValidationReport rep;
  rep.tol = tol;
  const auto terms = static_cast<std::size_t>(dec.terms());
  rep.shape_ok = dec.dim_a >= 1 && dec.dim_b >= 1 && rho.rows() == dec.dim_a * dec.dim_b &&
                 rho.cols() == rho.rows() && dec.rho_a_list.size() == terms &&
                 dec.rho_b_list.size() == terms && terms > 0;
  if (rep.shape_ok) {
    for (std::size_t i = 0; i < terms; ++i) {
      if (dec.rho_a_list[i].rows() != dec.dim_a || dec.rho_a_list[i].cols() != dec.dim_a ||
          dec.rho_b_list[i].rows() != dec.dim_b || dec.rho_b_list[i].cols() != dec.dim_b) {
        rep.shape_ok = false;
      }
    }
  }
  if (!rep.shape_ok) return rep;

  rep.weight_sum = dec.weights.sum();
  rep.weights_ok = (dec.weights.array() > 0.0).all() && std::abs(rep.weight_sum - 1.0) <= 1e-9;
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < terms; ++i) {
    lo = std::min(lo, min_eigenvalue(dec.rho_a_list[i]));
    lo = std::min(lo, min_eigenvalue(dec.rho_b_list[i]));
  }
  rep.min_local_eigenvalue = lo;
  rep.psd_ok = lo >= -kPositivityTol;
  rep.reconstruction_error = (rho - reconstruct(dec)).norm();
  return rep;
}

struct Quantumness {
  double e_a = 0.0;
  double e_b = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
};

/// Weighted mean squared Bloch norms of the local states and their variances.
inline Quantumness quantumness(const SeparableDecomposition& dec) {
  Quantumness q;
  if (dec.terms() == 0) return q;
  RVector mean_r = RVector::Zero(dec.r_list.front().size());
  RVector mean_s = RVector::Zero(dec.s_list.front().size());
  for (int i = 0; i < dec.terms(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    q.e_a += dec.weights(i) * dec.r_list[k].squaredNorm();
    q.e_b += dec.weights(i) * dec.s_list[k].squaredNorm();
    mean_r += dec.weights(i) * dec.r_list[k];
    mean_s += dec.weights(i) * dec.s_list[k];
  }
  q.var_a = q.e_a - mean_r.squaredNorm();
  q.var_b = q.e_b - mean_s.squaredNorm();
  return q;
}

/// Entrywise square of Q1 Q2^T.
inline RMatrix orthostochastic_matrix(const Factorization& f) {
  if (f.q1.size() == 0 || f.q2.size() == 0) {
    throw PreconditionError("orthostochastic_matrix: factorization has no Q matrices");
  }
  return (f.q1 * f.q2.transpose()).array().square().matrix();
}

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// ||T||_2^2 against alpha2^T Q beta2, with alpha2, beta2 the squared
/// singular values of M_rp and M_sp.
inline IdentityCheck orthostochastic_identity(const Factorization& f) {
  const RMatrix q = orthostochastic_matrix(f);
  IdentityCheck out;
  out.lhs = f.correlation.squaredNorm();
  out.rhs = f.alpha.array().square().matrix().dot(q * f.beta.array().square().matrix());
  return out;
}

/// Per-direction ensemble averages E_mu = sum_i p_i (u_mu . r_i)^2 of a
/// decomposition against orthonormal directions (columns of `dirs`).
inline RVector projected_moments(const std::vector<RVector>& bloch, const RVector& weights,
                                 const RMatrix& dirs) {
  RVector e = RVector::Zero(dirs.cols());
  for (std::size_t i = 0; i < bloch.size(); ++i) {
    const RVector proj = dirs.transpose() * bloch[i];
    e += weights(static_cast<Eigen::Index>(i)) * proj.array().square().matrix();
  }
  return e;
}

// ---------------------------------------------------------------------------
// Scale-split search

struct SearchOptions {
  std::uint64_t seed = 0;
  int budget = 20000;
  /// Standard deviation of the random log-scale perturbations.
  double spread = 0.7;
};

struct SearchResult {
  bool success = false;
  RVector scales;
  RVector row_signs;
  double best_score = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
  CorrelationSubspaces subspaces;
};

namespace detail {

/// Sign diagonals giving distinct column sets of D H_l.
inline std::vector<RVector> sign_variants(int l) {
  const int size = sign_matrix_size(l);
  const RMatrix h = hadamard_sign_matrix(size).topRows(l);
  std::vector<RVector> out;
  std::set<std::vector<std::vector<int>>> seen;
  for (int mask = 0; mask < (1 << l); ++mask) {
    RVector d(l);
    for (int k = 0; k < l; ++k) d(k) = (mask >> k) & 1 ? -1.0 : 1.0;
    std::vector<std::vector<int>> cols;
    for (int c = 0; c < size; ++c) {
      std::vector<int> col(static_cast<std::size_t>(l));
      for (int k = 0; k < l; ++k) col[static_cast<std::size_t>(k)] = d(k) * h(k, c) > 0 ? 1 : -1;
      cols.push_back(std::move(col));
    }
    std::sort(cols.begin(), cols.end());
    if (seen.insert(cols).second) out.push_back(d);
  }
  return out;
}

/// Minimum local eigenvalue over the terms produced by given scales and signs,
/// evaluated on the l-dimensional projected generators.
class SplitObjective {
 public:
  SplitObjective(const CorrelationSubspaces& subs, int n, int m)
      : n_(n), m_(m), tau_(subs.tau), l_(subs.rank()) {
    ops_a_ = project(subs.left, n);
    ops_b_ = project(subs.right, m);
    size_ = sign_matrix_size(l_);
    signs_ = hadamard_sign_matrix(size_).topRows(l_) * std::sqrt(static_cast<double>(size_));
  }

  double operator()(const RVector& log_scales, const RVector& row_signs) const {
    ++evaluations;
    const RVector alpha = log_scales.array().exp().matrix();
    const RVector beta = tau_.cwiseQuotient(alpha);
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size_; ++i) {
      lo = std::min(lo, local_min(ops_a_, n_, alpha, row_signs, i));
      lo = std::min(lo, local_min(ops_b_, m_, beta, row_signs, i));
    }
    return lo;
  }

  mutable int evaluations = 0;

 private:
  static std::vector<CMatrix> project(const RMatrix& dirs, int n) {
    const auto& basis = cached_generators(n);
    std::vector<CMatrix> ops;
    for (int mu = 0; mu < dirs.cols(); ++mu) {
      CMatrix op = CMatrix::Zero(n, n);
      for (int k = 0; k < basis.size(); ++k) {
        if (dirs(k, mu) != 0.0) op += dirs(k, mu) * basis[k];
      }
      ops.push_back(op);
    }
    return ops;
  }

  double local_min(const std::vector<CMatrix>& ops, int n, const RVector& scale,
                   const RVector& row_signs, int col) const {
    CMatrix rho = CMatrix::Identity(n, n) / static_cast<double>(n);
    for (int mu = 0; mu < l_; ++mu) {
      rho += (0.5 * scale(mu) * row_signs(mu) * signs_(mu, col)) * ops[static_cast<std::size_t>(mu)];
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }

  int n_;
  int m_;
  RVector tau_;
  int l_;
  int size_ = 2;
  std::vector<CMatrix> ops_a_;
  std::vector<CMatrix> ops_b_;
  RMatrix signs_;
};

}  // namespace detail

/// Searches positive per-direction scales alpha (beta = tau / alpha) for which
/// every term of the equal-weight Hadamard decomposition is a valid state.
/// Starts from the balanced point alpha = sqrt(tau), then seeded random
/// log-perturbations; each start runs log-space coordinate descent followed
/// by a simplex polish. The score is the most negative local eigenvalue.
inline SearchResult scale_split_search(const RMatrix& t, int n, int m,
                                       const SearchOptions& opt = {}) {
  if (t.rows() != n * n - 1 || t.cols() != m * m - 1) {
    throw ShapeError("scale_split_search: correlation matrix does not match dims");
  }
  SearchResult res;
  res.subspaces = correlation_support_subspaces(t);
  const int l = res.subspaces.rank();
  if (l > 3) {
    throw UnsupportedRank("scale_split_search: correlation rank " + std::to_string(l) +
                              " exceeds 3",
                          l);
  }
  if (l == 0) {
    res.success = true;
    res.scales = RVector();
    res.row_signs = RVector();
    res.best_score = 1.0 / std::max(n, m);
    return res;
  }

  const detail::SplitObjective objective(res.subspaces, n, m);
  const std::vector<RVector> variants = detail::sign_variants(l);
  const RVector balanced = 0.5 * res.subspaces.tau.array().log().matrix();
  const double target = -kPositivityTol;

  RVector best_x = balanced;
  RVector best_signs = variants.front();
  auto remaining = [&] { return opt.budget - objective.evaluations; };
  auto record = [&](const RVector& x, const RVector& signs, double score) {
    if (score > res.best_score) {
      res.best_score = score;
      best_x = x;
      best_signs = signs;
    }
  };

  for (int start = 0; remaining() > 0 && !(res.best_score >= target); ++start) {
    RVector x0 = balanced;
    if (start > 0) {
      auto rng = detail::restart_rng(opt.seed, start);
      x0 += opt.spread * detail::gaussian_vector(rng, l);
    }
    for (const RVector& signs : variants) {
      if (remaining() <= 0 || res.best_score >= target) break;
      RVector x = x0;
      double fx = objective(x, signs);
      record(x, signs, fx);

      double step = 0.25;
      while (step > 1e-7 && remaining() > 0 && fx < target) {
        bool improved = false;
        for (int k = 0; k < l && remaining() > 0; ++k) {
          for (double dir : {1.0, -1.0}) {
            RVector trial = x;
            trial(k) += dir * step;
            const double ft = objective(trial, signs);
            if (ft > fx) {
              x = trial;
              fx = ft;
              improved = true;
              break;
            }
          }
        }
        record(x, signs, fx);
        if (!improved) step *= 0.5;
      }
      if (fx >= target || remaining() <= 0) continue;

      NelderMeadOptions nm;
      nm.max_iterations = 1000;
      nm.ftol = 1e-14;
      nm.initial_step = 0.05;
      nm.max_evaluations = std::min(remaining(), 3000);
      // Capped at the target so the simplex stops once every vertex is feasible.
      auto neg = [&](const RVector& y) { return -std::min(objective(y, signs), 0.0); };
      const NelderMeadResult polished = nelder_mead(neg, x, nm);
      record(polished.x, signs, objective(polished.x, signs));
    }
  }

  res.evaluations = objective.evaluations;
  res.scales = best_x.array().exp().matrix();
  res.row_signs = best_signs;
  res.success = res.best_score >= target;
  return res;
}

// ---------------------------------------------------------------------------
// Full pipeline for arbitrary states

enum class DecomposeStatus { Success, Failure };

struct DecomposeOutcome {
  DecomposeStatus status = DecomposeStatus::Failure;
  std::string message;
  std::shared_ptr<const SeparableDecomposition> decomposition;
  std::optional<Factorization> factorization;  // of the normal-form correlation matrix
  SearchResult search;
  ValidationReport validation;

  [[nodiscard]] bool ok() const { return status == DecomposeStatus::Success; }
};

namespace detail {

/// Maps each term through rho_i -> G rho_i G^dag (G_A, G_B) and rescales the
/// weights so the result is again a normalized decomposition.
inline SeparableDecomposition transform_terms(const SeparableDecomposition& dec,
                                              const CMatrix& g_a, const CMatrix& g_b) {
  SeparableDecomposition out;
  out.dim_a = static_cast<int>(g_a.rows());
  out.dim_b = static_cast<int>(g_b.rows());
  std::vector<double> w;
  for (int i = 0; i < dec.terms(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    CMatrix a = g_a * dec.rho_a_list[k] * g_a.adjoint();
    CMatrix b = g_b * dec.rho_b_list[k] * g_b.adjoint();
    a = (a + a.adjoint()).eval() / 2.0;
    b = (b + b.adjoint()).eval() / 2.0;
    const double ta = a.trace().real();
    const double tb = b.trace().real();
    w.push_back(dec.weights(i) * ta * tb);
    a /= ta;
    b /= tb;
    out.r_list.push_back(bloch_vector(a));
    out.s_list.push_back(bloch_vector(b));
    out.rho_a_list.push_back(std::move(a));
    out.rho_b_list.push_back(std::move(b));
  }
  out.weights = Eigen::Map<RVector>(w.data(), static_cast<Eigen::Index>(w.size()));
  out.weights /= out.weights.sum();
  return out;
}

}  // namespace detail

/// Screens local supports, filters to normal form, runs the scale-split
/// search on the normal-form correlation matrix and maps the resulting
/// decomposition back to `rho`. Throws UnsupportedRank for rank > 3.
inline DecomposeOutcome decompose_state(const DensityMatrix& rho, int n, int m,
                                        const SearchOptions& opt = {},
                                        double tol = 1e-9) {
  detail::check_bipartite(rho.matrix(), n, m, "decompose_state");
  DecomposeOutcome out;
  const LocalRankReport rep = local_ranks(rho, n, m);
  if (rep.leak > kLeakTol) {
    out.message = "state has correlations outside its local supports";
    return out;
  }

  DensityMatrix work = rho;
  CMatrix iso_a = CMatrix::Identity(n, n);
  CMatrix iso_b = CMatrix::Identity(m, m);
  if (rep.n < n || rep.m < m) {
    SupportReduction red = reduce_local_support(rho, rep);
    work = red.state;
    iso_a = red.iso_a;
    iso_b = red.iso_b;
  }
  const int wn = rep.n;
  const int wm = rep.m;

  SeparableDecomposition local;
  if (wn == 1 || wm == 1) {
    // One factor is pure: the state is a product.
    local.dim_a = wn;
    local.dim_b = wm;
    local.weights = RVector::Ones(1);
    local.rho_a_list.push_back(wn == 1 ? CMatrix::Ones(1, 1) : work.matrix());
    local.rho_b_list.push_back(wn == 1 ? work.matrix() : CMatrix::Ones(1, 1));
    local.r_list.push_back(RVector());
    local.s_list.push_back(RVector());
    out.search.success = true;
  } else {
    NormalForm nf;
    try {
      nf = filter_to_normal_form(work, wn, wm, 1e-13);
    } catch (const ConvergenceError& e) {
      out.message = e.what();
      return out;
    }
    const BlochForm bf = to_bloch(nf.state, wn, wm);
    out.search = scale_split_search(bf.correlation, wn, wm, opt);
    if (!out.search.success) {
      out.message = "no feasible scale split found";
      return out;
    }
    out.factorization = factor_correlation(bf.correlation, out.search.subspaces,
                                           out.search.scales, out.search.row_signs);
    local = build_decomposition(*out.factorization, wn, wm);
    local = detail::transform_terms(local, nf.f_a.inverse(), nf.f_b.inverse());
  }

  SeparableDecomposition full = detail::transform_terms(local, iso_a, iso_b);
  out.validation = validate_decomposition(rho.matrix(), full, tol);
  out.decomposition = std::make_shared<const SeparableDecomposition>(std::move(full));
  if (out.validation.ok()) {
    out.status = DecomposeStatus::Success;
    out.message = "decomposition validated";
  } else {
    out.message = "constructed decomposition failed validation";
  }
  return out;
}

}  // namespace sepdec
