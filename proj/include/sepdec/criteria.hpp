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
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sepdec/bloch.hpp"
#include "sepdec/errors.hpp"
#include "sepdec/optimize.hpp"
#include "sepdec/verdict.hpp"

namespace sepdec {

// ---------------------------------------------------------------------------
// Norms and canonical SVD of the correlation matrix

inline RVector singular_values(const RMatrix& t) {
  if (t.size() == 0) return RVector();
  return Eigen::JacobiSVD<RMatrix>(t).singularValues();
}

/// Sum of singular values.
inline double kyfan_norm(const RMatrix& t) { return singular_values(t).sum(); }

/// Nonzero part of the SVD T = sum_mu tau_mu u_mu v_mu^T.
struct CorrelationSubspaces {
  RMatrix left;   // (N^2-1) x l, columns u_mu
  RMatrix right;  // (M^2-1) x l, columns v_mu
  RVector tau;    // descending

  [[nodiscard]] int rank() const { return static_cast<int>(tau.size()); }
};

namespace detail {

inline bool lex_greater(const RVector& x, const RVector& y, double tol) {
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (x(k) > y(k) + tol) return true;
    if (x(k) < y(k) - tol) return false;
  }
  return false;
}

/// Orthonormal basis of span(cols of `basis`) built from projected unit
/// vectors, so that coordinate-aligned subspaces yield coordinate vectors.
inline RMatrix axis_aligned_basis(const RMatrix& basis) {
  const int dim = static_cast<int>(basis.rows());
  const int k = static_cast<int>(basis.cols());
  const RMatrix proj = basis * basis.transpose();
  std::vector<int> order(dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return proj(i, i) > proj(j, j) + 1e-12; });
  RMatrix out(dim, k);
  int found = 0;
  for (int j : order) {
    if (found == k) break;
    RVector w = proj.col(j);
    for (int c = 0; c < found; ++c) w -= out.col(c).dot(w) * out.col(c);
    for (int c = 0; c < found; ++c) w -= out.col(c).dot(w) * out.col(c);
    const double nrm = w.norm();
    if (nrm > 1e-6) out.col(found++) = w / nrm;
  }
  return out;
}

}  // namespace detail

/// SVD of T restricted to singular values above `tol`, made reproducible:
/// within a degenerate cluster the left basis is chosen axis-aligned where
/// possible, each u_mu has its first nonzero component positive, and ties in
/// tau are ordered by descending lexicographic order of u_mu.
inline CorrelationSubspaces correlation_support_subspaces(const RMatrix& t, double tol = 1e-10) {
  CorrelationSubspaces out;
  if (t.size() == 0) {
    out.left = RMatrix(t.rows(), 0);
    out.right = RMatrix(t.cols(), 0);
    return out;
  }
  Eigen::JacobiSVD<RMatrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  int l = 0;
  while (l < sv.size() && sv(l) > tol) ++l;

  const double cluster_tol = 1e-12 * std::max(1.0, l > 0 ? sv(0) : 0.0);
  std::vector<RVector> us;
  std::vector<RVector> vs;
  std::vector<double> taus;
  for (int start = 0; start < l;) {
    int stop = start + 1;
    while (stop < l && sv(stop - 1) - sv(stop) <= cluster_tol) ++stop;
    const RMatrix basis = svd.matrixU().middleCols(start, stop - start);
    const RMatrix aligned =
        stop - start > 1 ? detail::axis_aligned_basis(basis) : RMatrix(basis);
    for (int c = 0; c < aligned.cols(); ++c) {
      RVector u = aligned.col(c);
      RVector v = t.transpose() * u;
      const double s = v.norm();
      v /= s;
      for (Eigen::Index k = 0; k < u.size(); ++k) {
        if (std::abs(u(k)) > 1e-12) {
          if (u(k) < 0) {
            u = -u;
            v = -v;
          }
          break;
        }
      }
      us.push_back(u);
      vs.push_back(v);
      taus.push_back(s);
    }
    start = stop;
  }

  std::vector<int> order(taus.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    if (std::abs(taus[i] - taus[j]) > cluster_tol) return taus[i] > taus[j];
    return detail::lex_greater(us[i], us[j], 1e-12);
  });
  out.left.resize(t.rows(), l);
  out.right.resize(t.cols(), l);
  out.tau.resize(l);
  for (int c = 0; c < l; ++c) {
    out.left.col(c) = us[order[c]];
    out.right.col(c) = vs[order[c]];
    out.tau(c) = taus[order[c]];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bloch-norm bounds for normal-form states

inline Verdict bloch_norm_tests(const BlochForm& bf, double normal_tol = 1e-8) {
  if (bf.a.norm() >= normal_tol || bf.b.norm() >= normal_tol) {
    throw PreconditionError("bloch_norm_tests: state is not in normal form");
  }
  const double n = bf.dim_a;
  const double m = bf.dim_b;
  const double kf = kyfan_norm(bf.correlation);
  const double kf2 = kf * kf;
  const double upper = 4.0 * (n - 1.0) * (m - 1.0) / (n * m);
  const double lower = 4.0 / (n * m * (n - 1.0) * (m - 1.0));
  if (kf2 > upper + kViolationMargin) {
    return Verdict::entangled("norms", "||T||_KF^2 exceeds 4(N-1)(M-1)/(NM)", kf2, upper);
  }
  if (kf2 <= lower) {
    return Verdict::separable("norms", "||T||_KF^2 <= 4/(NM(N-1)(M-1))");
  }
  return Verdict::inconclusive("norms", "||T||_KF^2 between the separable and entangled bounds");
}

// ---------------------------------------------------------------------------
// PPT

inline Verdict ppt_test(const DensityMatrix& rho, int n, int m) {
  const double lo = min_eigenvalue(partial_transpose_b(rho.matrix(), n, m));
  if (lo < -kPositivityTol) {
    return Verdict::entangled("ppt", "partial transpose has a negative eigenvalue", -lo, 0.0);
  }
  const bool sufficient = (n == 2 && m == 2) || (n == 2 && m == 3) || (n == 3 && m == 2);
  if (sufficient) {
    return Verdict::separable("ppt", "positive partial transpose in dimension " +
                                         std::to_string(n) + "x" + std::to_string(m));
  }
  return Verdict::inconclusive("ppt", "positive partial transpose");
}

// ---------------------------------------------------------------------------
// Subspace bounds on E_mu = sum_i p_i (u_mu . r_i)^2

enum class BoundProvenance { Tabulated, Analytic, DerivedOracle };

inline const char* to_string(BoundProvenance p) {
  switch (p) {
    case BoundProvenance::Tabulated:
      return "tabulated";
    case BoundProvenance::Analytic:
      return "analytic";
    case BoundProvenance::DerivedOracle:
      return "derived-oracle";
  }
  return "?";
}

/// Upper bounds on sum_mu E_mu and prod_mu E_mu over all ensembles of
/// states of one party, for the subspace spanned by `directions`.
struct SubspaceBounds {
  RMatrix directions;  // (N^2-1) x l, orthonormal columns
  double sum_bound = 0.0;
  double product_bound = 0.0;
  BoundProvenance sum_provenance = BoundProvenance::DerivedOracle;
  BoundProvenance product_provenance = BoundProvenance::DerivedOracle;
};

struct OracleOptions {
  std::uint64_t seed = 0;
  int restarts = 200;
  /// Product oracle only; <= 0 selects l (l + 1).
  int atoms = 0;
  /// Product oracle only: alternating weight/atom refinement rounds.
  int rounds = 30;
};

namespace detail {

inline void check_directions(const RMatrix& dirs, int n) {
  if (dirs.rows() != n * n - 1) {
    throw ShapeError("directions must have N^2-1 = " + std::to_string(n * n - 1) + " rows");
  }
  const RMatrix gram = dirs.transpose() * dirs;
  if ((gram - RMatrix::Identity(dirs.cols(), dirs.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw PreconditionError("directions are not orthonormal");
  }
}

/// Evaluates g_mu(psi) = <psi|Lambda_mu|psi>^2, Lambda_mu = sum_k u_{k mu} lambda_k,
/// for psi parameterized by 2N reals (real parts then imaginary parts).
class ProjectedBloch {
 public:
  ProjectedBloch(const RMatrix& dirs, int n) : n_(n) {
    const auto& basis = cached_generators(n);
    for (int mu = 0; mu < dirs.cols(); ++mu) {
      CMatrix op = CMatrix::Zero(n, n);
      for (int k = 0; k < basis.size(); ++k) {
        if (dirs(k, mu) != 0.0) op += dirs(k, mu) * basis[k];
      }
      ops_.push_back(op);
    }
    psi_.resize(n);
  }

  [[nodiscard]] int directions() const { return static_cast<int>(ops_.size()); }
  [[nodiscard]] int parameters() const { return 2 * n_; }

  /// Writes g(psi) into `out` (size l). Returns false for a null vector.
  bool eval(const RVector& x, double* out) const {
    double norm2 = 0.0;
    for (int k = 0; k < n_; ++k) {
      psi_(k) = cplx(x(k), x(n_ + k));
      norm2 += std::norm(psi_(k));
    }
    if (!(norm2 > 1e-300)) return false;
    for (std::size_t mu = 0; mu < ops_.size(); ++mu) {
      const double proj = psi_.dot(ops_[mu] * psi_).real() / norm2;
      out[mu] = proj * proj;
    }
    return true;
  }

 private:
  int n_;
  std::vector<CMatrix> ops_;
  mutable CVector psi_;
};

inline std::mt19937_64 restart_rng(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(restart),
                    0x5e9dec0du};
  return std::mt19937_64(seq);
}

inline RVector gaussian_vector(std::mt19937_64& rng, int size) {
  std::normal_distribution<double> normal(0.0, 1.0);
  RVector x(size);
  for (int k = 0; k < size; ++k) x(k) = normal(rng);
  return x;
}

}  // namespace detail

/// Best-found max over pure states psi of sum_mu (u_mu . r(psi))^2. By
/// convexity of the objective this also bounds every ensemble average.
inline double sum_bound_oracle(const RMatrix& dirs, int n, const OracleOptions& opt = {}) {
  detail::check_directions(dirs, n);
  const detail::ProjectedBloch g(dirs, n);
  const int l = g.directions();
  if (l == 0) return 0.0;
  std::vector<double> buf(l);
  auto neg_sum = [&](const RVector& x) {
    if (!g.eval(x, buf.data())) return 0.0;
    double s = 0.0;
    for (double v : buf) s += v;
    return -s;
  };
  NelderMeadOptions nm;
  nm.max_iterations = 500;
  nm.ftol = 1e-12;
  double best = 0.0;
  for (int r = 0; r < opt.restarts; ++r) {
    auto rng = detail::restart_rng(opt.seed, r);
    RVector x = detail::gaussian_vector(rng, g.parameters());
    x.normalize();
    NelderMeadResult res = nelder_mead(neg_sum, x, nm);
    // Second pass from a fresh simplex around the first optimum.
    nm.initial_step = 0.05;
    res = nelder_mead(neg_sum, res.x, nm);
    nm.initial_step = 0.5;
    best = std::max(best, -res.value);
  }
  return best;
}

/// Best-found max over ensembles {p_i, psi_i} (at most `atoms` members) of
/// prod_mu sum_i p_i (u_mu . r(psi_i))^2. Each restart alternates
/// multiplicative (EM) weight updates with simplex refinement of individual
/// atoms, and replaces the lightest atom by the pure state maximizing the
/// linearized objective.
inline double product_bound_oracle(const RMatrix& dirs, int n, const OracleOptions& opt = {}) {
  detail::check_directions(dirs, n);
  const detail::ProjectedBloch g(dirs, n);
  const int l = g.directions();
  if (l == 0) return 0.0;
  const int atoms = opt.atoms > 0 ? opt.atoms : l * (l + 1);
  if (atoms < l) throw PreconditionError("product_bound_oracle: need at least l atoms");
  const int params = g.parameters();

  NelderMeadOptions nm;
  nm.max_iterations = 200;
  nm.ftol = 1e-12;
  nm.initial_step = 0.3;

  double best = 0.0;
  std::vector<double> buf(l);
  for (int r = 0; r < opt.restarts; ++r) {
    auto rng = detail::restart_rng(opt.seed, r);
    std::vector<RVector> xs(atoms);
    RMatrix gmat(atoms, l);
    for (int i = 0; i < atoms; ++i) {
      xs[i] = detail::gaussian_vector(rng, params);
      if (!g.eval(xs[i], buf.data())) xs[i](0) = 1.0, g.eval(xs[i], buf.data());
      for (int mu = 0; mu < l; ++mu) gmat(i, mu) = buf[mu];
    }
    RVector p = RVector::Constant(atoms, 1.0 / atoms);

    auto log_objective = [&](const RVector& e) {
      double s = 0.0;
      for (int mu = 0; mu < l; ++mu) {
        if (!(e(mu) > 0.0)) return -std::numeric_limits<double>::infinity();
        s += std::log(e(mu));
      }
      return s;
    };

    for (int round = 0; round < opt.rounds; ++round) {
      // EM updates, monotone in sum_mu log E_mu.
      for (int it = 0; it < 50; ++it) {
        const RVector e = gmat.transpose() * p;
        if ((e.array() <= 0.0).any()) break;
        const RVector score = gmat * e.cwiseInverse();
        p = p.cwiseProduct(score) / static_cast<double>(l);
        p /= p.sum();
      }

      // Refine each atom against the exact objective.
      RVector e = gmat.transpose() * p;
      for (int i = 0; i < atoms; ++i) {
        if (p(i) < 1e-10) continue;
        const RVector rest = e - p(i) * gmat.row(i).transpose();
        auto neg = [&](const RVector& x) {
          if (!g.eval(x, buf.data())) return std::numeric_limits<double>::infinity();
          RVector trial = rest;
          for (int mu = 0; mu < l; ++mu) trial(mu) += p(i) * buf[mu];
          return -log_objective(trial);
        };
        const double before = -log_objective(e);
        const NelderMeadResult res = nelder_mead(neg, xs[i], nm);
        if (res.value < before) {
          xs[i] = res.x;
          g.eval(xs[i], buf.data());
          for (int mu = 0; mu < l; ++mu) gmat(i, mu) = buf[mu];
          e = gmat.transpose() * p;
        }
      }

      // Replace the lightest atom by the best vertex for the linearization.
      if ((e.array() > 0.0).all()) {
        Eigen::Index lightest = 0;
        p.minCoeff(&lightest);
        const RVector w = e.cwiseInverse();
        auto neg_lin = [&](const RVector& x) {
          if (!g.eval(x, buf.data())) return 0.0;
          double s = 0.0;
          for (int mu = 0; mu < l; ++mu) s += w(mu) * buf[mu];
          return -s;
        };
        NelderMeadResult cand = nelder_mead(neg_lin, detail::gaussian_vector(rng, params), nm);
        for (int k = 0; k < 2; ++k) {
          NelderMeadResult alt = nelder_mead(neg_lin, detail::gaussian_vector(rng, params), nm);
          if (alt.value < cand.value) cand = alt;
        }
        xs[lightest] = cand.x;
        g.eval(cand.x, buf.data());
        for (int mu = 0; mu < l; ++mu) gmat(lightest, mu) = buf[mu];
      }
    }
    for (int it = 0; it < 200; ++it) {
      const RVector e = gmat.transpose() * p;
      if ((e.array() <= 0.0).any()) break;
      p = p.cwiseProduct(gmat * e.cwiseInverse()) / static_cast<double>(l);
      p /= p.sum();
    }
    const RVector e = gmat.transpose() * p;
    best = std::max(best, e.prod());
  }
  return best;
}

namespace detail {

struct TabulatedBound {
  int n;
  std::vector<int> indices;  // 1-based generator indices spanning the subspace
  std::optional<double> sum_bound;
  std::optional<double> product_bound;
};

/// Bounds stated in closed form for the worked examples: the full qubit
/// space, span{lambda_1, lambda_3, lambda_13} of SU(4) and
/// span{lambda_1, lambda_2, lambda_3} of SU(3).
inline const std::vector<TabulatedBound>& tabulated_bounds() {
  static const std::vector<TabulatedBound> table = {
      {2, {1, 2, 3}, 1.0, 1.0 / 27.0},
      {4, {1, 3, 13}, 1.0, (2.0 / 27.0) * (2.0 / 27.0)},
      {3, {1, 2, 3}, 4.0 / 9.0, std::nullopt},
  };
  return table;
}

inline bool same_span(const RMatrix& dirs, const std::vector<int>& indices) {
  if (dirs.cols() != static_cast<Eigen::Index>(indices.size())) return false;
  RMatrix basis = RMatrix::Zero(dirs.rows(), dirs.cols());
  for (std::size_t c = 0; c < indices.size(); ++c) {
    if (indices[c] < 1 || indices[c] > dirs.rows()) return false;
    basis(indices[c] - 1, static_cast<Eigen::Index>(c)) = 1.0;
  }
  const RMatrix diff = dirs * dirs.transpose() - basis * basis.transpose();
  return diff.cwiseAbs().maxCoeff() < 1e-8;
}

}  // namespace detail

/// Bounds for the subspace spanned by `dirs`: closed-form values where
/// available (worked-example table; the whole Bloch space, where the maximum
/// of |r|^2 is 2(N-1)/N and the isotropic ensemble maximizes the product),
/// numerical oracles otherwise.
inline SubspaceBounds subspace_bounds(const RMatrix& dirs, int n, const OracleOptions& opt = {},
                                      const OracleOptions& product_opt = {0, 20, 0, 30}) {
  detail::check_directions(dirs, n);
  SubspaceBounds out;
  out.directions = dirs;
  const int l = static_cast<int>(dirs.cols());
  std::optional<double> sum;
  std::optional<double> prod;
  for (const auto& entry : detail::tabulated_bounds()) {
    if (entry.n == n && detail::same_span(dirs, entry.indices)) {
      if (entry.sum_bound) {
        sum = entry.sum_bound;
        out.sum_provenance = BoundProvenance::Tabulated;
      }
      if (entry.product_bound) {
        prod = entry.product_bound;
        out.product_provenance = BoundProvenance::Tabulated;
      }
    }
  }
  if (l == n * n - 1) {
    const double total = 2.0 * (n - 1.0) / n;
    if (!sum) {
      sum = total;
      out.sum_provenance = BoundProvenance::Analytic;
    }
    if (!prod) {
      prod = std::pow(total / l, l);
      out.product_provenance = BoundProvenance::Analytic;
    }
  }
  if (!sum) sum = sum_bound_oracle(dirs, n, opt);
  if (!prod) {
    OracleOptions po = product_opt;
    po.seed = opt.seed;
    prod = product_bound_oracle(dirs, n, po);
  }
  out.sum_bound = *sum;
  out.product_bound = *prod;
  return out;
}

// ---------------------------------------------------------------------------
// Magnitude bounds

inline Verdict corollary2_test(const RMatrix& t, const SubspaceBounds& bounds_a,
                               const SubspaceBounds& bounds_b) {
  const CorrelationSubspaces subs = correlation_support_subspaces(t);
  const int l = subs.rank();
  if (l == 0) return Verdict::inconclusive("corollary2", "zero correlation matrix");

  auto matches = [](const RMatrix& given, const RMatrix& expected) {
    if (given.rows() != expected.rows() || given.cols() != expected.cols()) return false;
    const RMatrix diff = given * given.transpose() - expected * expected.transpose();
    return diff.cwiseAbs().maxCoeff() < 1e-8;
  };
  if (!matches(bounds_a.directions, subs.left) || !matches(bounds_b.directions, subs.right)) {
    throw PreconditionError("corollary2_test: bounds do not match the correlation subspaces");
  }

  auto provenance = [](BoundProvenance a, BoundProvenance b) {
    return std::string(" [") + to_string(a) + ", " + to_string(b) + "]";
  };
  const double kf = subs.tau.sum();
  const double sum_rhs = bounds_a.sum_bound * bounds_b.sum_bound;
  if (kf * kf > sum_rhs + kViolationMargin) {
    return Verdict::entangled(
        "corollary2",
        "||T||_KF^2 exceeds the product of subspace sum bounds" +
            provenance(bounds_a.sum_provenance, bounds_b.sum_provenance),
        kf * kf, sum_rhs);
  }
  const double prod = subs.tau.array().square().prod();
  const double prod_rhs = bounds_a.product_bound * bounds_b.product_bound;
  if (prod > prod_rhs + kViolationMargin) {
    return Verdict::entangled(
        "corollary2",
        "prod tau^2 exceeds the product of subspace product bounds" +
            provenance(bounds_a.product_provenance, bounds_b.product_provenance),
        prod, prod_rhs);
  }
  return Verdict::inconclusive("corollary2", "both magnitude bounds satisfied");
}

// ---------------------------------------------------------------------------
// Symmetry maps

/// Diagonal +-1 map flipping the given (1-based) Bloch components of SU(N).
inline RMatrix partial_inversion_map(const std::vector<int>& indices, int n) {
  const int dim = n * n - 1;
  RMatrix o = RMatrix::Identity(dim, dim);
  for (int idx : indices) {
    if (idx < 1 || idx > dim) {
      throw ShapeError("partial_inversion_map: index " + std::to_string(idx) +
                       " outside 1.." + std::to_string(dim));
    }
    o(idx - 1, idx - 1) = -1.0;
  }
  return o;
}

/// Applies O_A (x) O_B to the Bloch data and tests positivity. The caller
/// asserts that the maps are positive on the relevant single-party states.
inline Verdict symmetry_map_test(const DensityMatrix& rho, int n, int m, const RMatrix& o_a,
                                 const RMatrix& o_b) {
  const BlochForm mapped = apply_local_orthogonal(to_bloch(rho, n, m), o_a, o_b);
  const double lo = min_eigenvalue(from_bloch(mapped));
  if (lo < -kPositivityTol) {
    return Verdict::entangled("symmetry", "locally mapped operator has a negative eigenvalue",
                              -lo, 0.0);
  }
  return Verdict::inconclusive("symmetry", "locally mapped operator is positive");
}

/// True when inverting lambda_1..lambda_3 of a qutrit factor acts on this
/// state exactly like rho -> W rho^T W^dag with W = sigma_y (+) 1, a positive
/// map: the state has no Bloch or correlation weight on lambda_4..lambda_7 of
/// that factor.
inline bool qutrit_inversion_is_sound(const BlochForm& bf, bool on_a, double tol = 1e-12) {
  const int dim = on_a ? bf.dim_a : bf.dim_b;
  if (dim != 3) return false;
  for (int k = 3; k < 7; ++k) {
    const double local = on_a ? bf.a(k) : bf.b(k);
    const double corr = on_a ? bf.correlation.row(k).cwiseAbs().maxCoeff()
                             : bf.correlation.col(k).cwiseAbs().maxCoeff();
    if (std::abs(local) > tol || corr > tol) return false;
  }
  return true;
}

}  // namespace sepdec
