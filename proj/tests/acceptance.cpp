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


// Acceptance suite: one PASS/FAIL line per criterion, sub-checks indented.
// Exit status is the number of failing criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sepdec/bloch.hpp"
#include "sepdec/criteria.hpp"
#include "sepdec/decomposer.hpp"
#include "sepdec/normal_form.hpp"
#include "sepdec/states.hpp"
#include "sepdec/su_basis.hpp"

using namespace sepdec;

namespace {

struct Check {
  std::string label;
  bool ok;
  std::string detail;
};

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)) {}

  void check(const std::string& label, bool ok, const std::string& detail = {}) {
    checks_.push_back({label, ok, detail});
  }

  [[nodiscard]] bool ok() const {
    for (const Check& c : checks_) {
      if (!c.ok) return false;
    }
    return !checks_.empty();
  }

  void print(double seconds) const {
    std::printf("%s  %s  (%.1fs)\n", ok() ? "PASS" : "FAIL", title_.c_str(), seconds);
    for (const Check& c : checks_) {
      std::printf("        [%s] %s%s%s\n", c.ok ? "ok" : "FAILED", c.label.c_str(),
                  c.detail.empty() ? "" : ": ", c.detail.c_str());
    }
    std::fflush(stdout);
  }

 private:
  std::string title_;
  std::vector<Check> checks_;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

RMatrix coordinate_dirs(int n, std::initializer_list<int> one_based) {
  RMatrix d = RMatrix::Zero(n * n - 1, static_cast<Eigen::Index>(one_based.size()));
  int c = 0;
  for (int k : one_based) d(k - 1, c++) = 1.0;
  return d;
}

/// Factorizations produced while running criteria 4-6, checked by criterion 8.
std::vector<Factorization> g_factorizations;

struct Built {
  bool found = false;
  SeparableDecomposition dec;
  ValidationReport report;
};

Built decompose_normal(const HermitianUnitTrace& op, std::uint64_t seed = 0) {
  Built out;
  const BlochForm bf = to_bloch(op.matrix, op.dim_a, op.dim_b);
  SearchOptions opt;
  opt.seed = seed;
  const SearchResult res = scale_split_search(bf.correlation, op.dim_a, op.dim_b, opt);
  if (!res.success) return out;
  Factorization f = factor_correlation(bf.correlation, res.subspaces, res.scales, res.row_signs);
  out.dec = build_decomposition(f, op.dim_a, op.dim_b);
  out.report = validate_decomposition(op.matrix, out.dec);
  out.found = true;
  g_factorizations.push_back(std::move(f));
  return out;
}

// ---------------------------------------------------------------------------

void criterion1(Criterion& c) {
  double worst = 0.0;
  for (int n = 2; n <= 6; ++n) {
    const HermitianBasis b = generators(n);
    for (int mu = 0; mu < b.size(); ++mu) {
      for (int nu = 0; nu < b.size(); ++nu) {
        worst = std::max(worst, std::abs((b[mu] * b[nu]).trace() - (mu == nu ? 2.0 : 0.0)));
      }
    }
  }
  c.check("max |Tr[l_mu l_nu] - 2 delta|, N = 2..6", worst < 1e-12, fmt("%.2e < 1e-12", worst));

  const cplx i(0.0, 1.0);
  std::vector<CMatrix> pauli(3, CMatrix::Zero(2, 2));
  pauli[0] << 0, 1, 1, 0;
  pauli[1] << 0, -i, i, 0;
  pauli[2] << 1, 0, 0, -1;
  bool pauli_ok = true;
  const HermitianBasis b2 = generators(2);
  for (int k = 0; k < 3; ++k) pauli_ok &= (b2[k] - pauli[static_cast<std::size_t>(k)]).norm() == 0.0;
  c.check("generators(2) equal the Pauli matrices", pauli_ok);

  std::vector<CMatrix> gm(8, CMatrix::Zero(3, 3));
  gm[0] << 0, 1, 0, 1, 0, 0, 0, 0, 0;
  gm[1] << 0, -i, 0, i, 0, 0, 0, 0, 0;
  gm[2] << 1, 0, 0, 0, -1, 0, 0, 0, 0;
  gm[3] << 0, 0, 1, 0, 0, 0, 1, 0, 0;
  gm[4] << 0, 0, -i, 0, 0, 0, i, 0, 0;
  gm[5] << 0, 0, 0, 0, 0, 1, 0, 1, 0;
  gm[6] << 0, 0, 0, 0, 0, -i, 0, i, 0;
  const double s = 1.0 / std::sqrt(3.0);
  gm[7] << s, 0, 0, 0, s, 0, 0, 0, -2 * s;
  double gm_err = 0.0;
  const HermitianBasis b3 = generators(3);
  for (int k = 0; k < 8; ++k) gm_err = std::max(gm_err, (b3[k] - gm[static_cast<std::size_t>(k)]).cwiseAbs().maxCoeff());
  c.check("generators(3) equal the Gell-Mann matrices", gm_err < 1e-15, fmt("max entry error %.1e", gm_err));
}

void criterion2(Criterion& c) {
  const std::pair<int, int> dims[] = {{2, 2}, {2, 3}, {2, 4}, {3, 3}};
  for (const auto& [n, m] : dims) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const DensityMatrix rho = random_density(n, m, 10000 + 100 * static_cast<std::uint64_t>(n * 10 + m) + k);
      worst = std::max(worst, (from_bloch(to_bloch(rho, n, m)).matrix - rho.matrix()).norm());
    }
    c.check(std::to_string(n) + "x" + std::to_string(m) + " round trip, 100 states", worst < 1e-10,
            fmt("max error %.2e < 1e-10", worst));
  }
}

void criterion3(Criterion& c) {
  bool ppt_ok = true;
  int physical = 0;
  for (int k = -50; k <= 50; ++k) {
    const double t = 0.005 * k;
    const HermitianUnitTrace op = example_2x4(t, t, t);
    if (min_eigenvalue(op) < -1e-10) continue;
    ++physical;
    ppt_ok &= ppt_test(DensityMatrix::from_operator(op), 2, 4).is_inconclusive();
  }
  c.check("ppt Inconclusive on every physical equal-t point", ppt_ok && physical == 101,
          std::to_string(physical) + " points in [-0.25, 0.25]");

  const RMatrix t0 = to_bloch(example_2x4(0.25, 0.25, 0.25).matrix, 2, 4).correlation;
  const CorrelationSubspaces subs = correlation_support_subspaces(t0);
  const SubspaceBounds ba = subspace_bounds(subs.left, 2);
  const SubspaceBounds bb = subspace_bounds(subs.right, 4);
  const bool tabulated =
      ba.sum_provenance == BoundProvenance::Tabulated && bb.sum_provenance == BoundProvenance::Tabulated &&
      ba.product_provenance == BoundProvenance::Tabulated &&
      bb.product_provenance == BoundProvenance::Tabulated;
  c.check("bounds 1, 1, 1/27, (2/27)^2 are the tabulated values",
          tabulated && ba.sum_bound == 1.0 && bb.sum_bound == 1.0 &&
              std::abs(ba.product_bound - 1.0 / 27.0) < 1e-15 &&
              std::abs(bb.product_bound - 4.0 / 729.0) < 1e-15);

  auto verdict = [&](double t) {
    const RMatrix tm = to_bloch(example_2x4(t, t, t).matrix, 2, 4).correlation;
    return corollary2_test(tm, ba, bb);
  };
  c.check("t = 0.25 Entangled", verdict(0.25).is_entangled());
  c.check("t = 0.24 Inconclusive", verdict(0.24).is_inconclusive());
  double lo = 0.2;
  double hi = 0.25;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (verdict(mid).is_entangled() ? hi : lo) = mid;
  }
  c.check("verdict flip in [0.2415, 0.2435]", hi >= 0.2415 && hi <= 0.2435, fmt("flip at t = %.6f", hi));
}

void criterion4(Criterion& c) {
  const HermitianUnitTrace op = example_2x4(0.1, 0.2, 0.1);
  const Built b = decompose_normal(op);
  c.check("decomposition found", b.found);
  if (!b.found) return;
  c.check("4 terms", b.dec.terms() == 4, std::to_string(b.dec.terms()));
  c.check("weights all 1/4", (b.dec.weights.array() - 0.25).abs().maxCoeff() < 1e-15);
  c.check("reconstruction error < 1e-9", b.report.reconstruction_error < 1e-9,
          fmt("%.2e", b.report.reconstruction_error));
  double lo = 1.0;
  int count = 0;
  for (int i = 0; i < b.dec.terms(); ++i) {
    lo = std::min(lo, min_eigenvalue(b.dec.rho_a_list[static_cast<std::size_t>(i)]));
    lo = std::min(lo, min_eigenvalue(b.dec.rho_b_list[static_cast<std::size_t>(i)]));
    count += 2;
  }
  c.check("all 8 local states PSD to -1e-10", count == 8 && lo >= -1e-10, fmt("min eigenvalue %.3e", lo));
}

void criterion5(Criterion& c) {
  const double ninth = 1.0 / 9.0;
  const Built a = decompose_normal(octahedral(ninth, ninth, ninth));
  const Quantumness qa = a.found ? quantumness(a.dec) : Quantumness{};
  c.check("t = 1/9 decomposes", a.found && a.report.ok(),
          a.found ? fmt("error %.2e", a.report.reconstruction_error) : "search failed");
  c.check("t = 1/9: E_A, E_B <= 4/9 + 1e-9", a.found && qa.e_a <= 4.0 / 9.0 + 1e-9 && qa.e_b <= 4.0 / 9.0 + 1e-9,
          fmt("E_A = %.12f, E_B = %.12f", qa.e_a, qa.e_b));

  const double edge = 4.0 / 27.0;
  const Built b = decompose_normal(octahedral(edge, edge, edge));
  const Quantumness qb = b.found ? quantumness(b.dec) : Quantumness{};
  c.check("t = 4/27 decomposes", b.found && b.report.ok(),
          b.found ? fmt("error %.2e, min local eigenvalue %.2e", b.report.reconstruction_error,
                        b.report.min_local_eigenvalue)
                  : "search failed");
  c.check("t = 4/27: |E_A - 4/9| < 1e-9", b.found && std::abs(qb.e_a - 4.0 / 9.0) < 1e-9,
          fmt("E_A = %.15f", qb.e_a));

  const HermitianUnitTrace ent = octahedral(-0.4, -0.4, -0.4);
  const double lo = min_eigenvalue(ent);
  c.check("t = -0.4 physical", lo >= -1e-10, fmt("min eigenvalue %.6f", lo));
  const DensityMatrix rho = DensityMatrix::from_operator(ent);
  c.check("t = -0.4: ppt Entangled", ppt_test(rho, 3, 3).is_entangled());
  const Verdict sym = symmetry_map_test(rho, 3, 3, partial_inversion_map({1, 2, 3}, 3),
                                        RMatrix::Identity(8, 8));
  c.check("t = -0.4: partial inversion Entangled", sym.is_entangled(),
          sym.violation ? fmt("min eigenvalue %.6f", -sym.violation->first) : "");
}

void criterion6(Criterion& c) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  int ok = 0;
  double worst_err = 0.0;
  double worst_radius = 0.0;
  std::string failures;
  for (int k = 0; k < 100; ++k) {
    RVector d(3);
    d << nd(rng), nd(rng), nd(rng);
    const double radius = 0.999 * (4.0 / 9.0) * std::cbrt(ud(rng));
    d *= radius / d.norm();
    const Built b = decompose_normal(tetrahedral(d(0), d(1), d(2)), static_cast<std::uint64_t>(k));
    if (b.found && b.report.ok() && b.report.reconstruction_error < 1e-9) {
      ++ok;
      worst_err = std::max(worst_err, b.report.reconstruction_error);
      worst_radius = std::max(worst_radius, radius);
    } else {
      failures += fmt(" r=%.4f", radius);
    }
  }
  c.check("100 random physical points decompose", ok == 100,
          std::to_string(ok) + "/100, max error " + fmt("%.2e", worst_err) + ", largest radius " +
              fmt("%.5f", worst_radius) + (failures.empty() ? "" : ", failed:" + failures));
}

void criterion7(Criterion& c) {
  OracleOptions sum_opt;
  sum_opt.seed = 1;
  OracleOptions prod_opt;
  prod_opt.seed = 1;
  prod_opt.restarts = 20;

  const double s4 = sum_bound_oracle(coordinate_dirs(4, {1, 13, 3}), 4, sum_opt);
  c.check("sum bound, span{l1, l13, l3} of SU(4) = 1 within 1e-3", std::abs(s4 - 1.0) < 1e-3,
          fmt("oracle %.9f", s4));

  const double p2 = product_bound_oracle(coordinate_dirs(2, {1, 2, 3}), 2, prod_opt);
  c.check("product bound, qubit space = 1/27 within 0.5%",
          std::abs(p2 - 1.0 / 27.0) <= 0.005 / 27.0, fmt("oracle %.9e vs %.9e", p2, 1.0 / 27.0));

  const double p4 = product_bound_oracle(coordinate_dirs(4, {1, 13, 3}), 4, prod_opt);
  const double p4_ref = (2.0 / 27.0) * (2.0 / 27.0);
  c.check("product bound, span{l1, l13, l3} of SU(4) = (2/27)^2 within 1%",
          std::abs(p4 - p4_ref) <= 0.01 * p4_ref, fmt("oracle %.9e vs %.9e", p4, p4_ref));

  const double s3 = sum_bound_oracle(coordinate_dirs(3, {1, 2, 3}), 3, sum_opt);
  c.check("sum bound, span{l1, l2, l3} of SU(3) = 4/9 within 1e-3", std::abs(s3 - 4.0 / 9.0) < 1e-3,
          fmt("oracle %.9f vs %.9f", s3, 4.0 / 9.0));
}

void criterion8(Criterion& c) {
  double worst_id = 0.0;
  double worst_ds = 0.0;
  for (const Factorization& f : g_factorizations) {
    const IdentityCheck id = orthostochastic_identity(f);
    worst_id = std::max(worst_id, std::abs(id.lhs - id.rhs));
    const RMatrix q = orthostochastic_matrix(f);
    worst_ds = std::max(worst_ds, (q.rowwise().sum().array() - 1.0).abs().maxCoeff());
    worst_ds = std::max(worst_ds, (q.colwise().sum().array() - 1.0).abs().maxCoeff());
  }
  const auto n = static_cast<double>(g_factorizations.size());
  c.check("factorizations collected from criteria 4-6", g_factorizations.size() >= 103,
          fmt("%.0f", n));
  c.check("| ||T||^2 - alpha^T Q beta | < 1e-9", worst_id < 1e-9, fmt("max %.2e", worst_id));
  c.check("Q doubly stochastic to 1e-10", worst_ds < 1e-10, fmt("max deviation %.2e", worst_ds));
}

void criterion9(Criterion& c) {
  CVector psi = CVector::Zero(6);
  psi(0) = 1.0 / std::sqrt(2.0);  // |00>
  psi(5) = 1.0 / std::sqrt(2.0);  // |12>
  const DensityMatrix pure = DensityMatrix::from_matrix(psi * psi.adjoint(), 2, 3);
  const LocalRankReport rep = local_ranks(pure, 2, 3);
  c.check("(|00> + |12>)/sqrt2 flagged Entangled by the local-rank test",
          observation1_test(rep).is_entangled(),
          "ranks (" + std::to_string(rep.n) + "," + std::to_string(rep.m) + "), leak " +
              fmt("%.2e", rep.leak));

  int flagged = 0;
  int total = 0;
  std::string which;
  for (int k = 0; k < 200; ++k) {
    const int d = k % 2 == 0 ? 2 : 3;
    const int terms = d * d + k % 5;
    const auto [rho, dec] = random_separable(d, d, terms, 50000 + static_cast<std::uint64_t>(k));
    std::vector<Verdict> vs;
    const LocalRankReport lr = local_ranks(rho, d, d);
    vs.push_back(observation1_test(lr));
    vs.push_back(ppt_test(rho, d, d));
    const NormalForm nf = filter_to_normal_form(rho, d, d);
    vs.push_back(bloch_norm_tests(to_bloch(nf.state, d, d)));
    const BlochForm bf = to_bloch(rho, d, d);
    const CorrelationSubspaces subs = correlation_support_subspaces(bf.correlation);
    OracleOptions fast;
    fast.restarts = 20;
    vs.push_back(corollary2_test(bf.correlation, subspace_bounds(subs.left, d, fast, {0, 4, 0, 10}),
                                 subspace_bounds(subs.right, d, fast, {0, 4, 0, 10})));
    for (const bool on_a : {true, false}) {
      if (qutrit_inversion_is_sound(bf, on_a)) {
        const int da = d * d - 1;
        vs.push_back(symmetry_map_test(
            rho, d, d, on_a ? partial_inversion_map({1, 2, 3}, d) : RMatrix(RMatrix::Identity(da, da)),
            on_a ? RMatrix(RMatrix::Identity(da, da)) : partial_inversion_map({1, 2, 3}, d)));
      }
    }
    ++total;
    for (const Verdict& v : vs) {
      if (v.is_entangled()) {
        ++flagged;
        which += " " + std::to_string(k) + ":" + v.criterion;
      }
    }
  }
  c.check("200 random separable states never flagged", flagged == 0 && total == 200,
          std::to_string(flagged) + " flags" + which);
}

void criterion10(Criterion& c) {
  double worst = 0.0;
  int max_iter = 0;
  int ok = 0;
  for (int k = 0; k < 50; ++k) {
    try {
      const DensityMatrix rho = random_density(3, 3, 70000 + static_cast<std::uint64_t>(k));
      const NormalForm nf = filter_to_normal_form(rho, 3, 3, 1e-10, 1000);
      const BlochForm bf = to_bloch(nf.state, 3, 3);
      worst = std::max({worst, bf.a.norm(), bf.b.norm()});
      max_iter = std::max(max_iter, nf.iterations);
      ++ok;
    } catch (const Error&) {
    }
  }
  c.check("50 random 3x3 states reach |a|,|b| < 1e-8 within 1000 iterations",
          ok == 50 && worst < 1e-8,
          std::to_string(ok) + "/50, max norm " + fmt("%.2e", worst) + ", max iterations " +
              std::to_string(max_iter));

  double change = 0.0;
  const HermitianUnitTrace fixed[] = {example_2x4(0.1, 0.2, 0.1), example_2x4(0.25, 0.25, 0.25),
                                      octahedral(0.1, 0.1, 0.1), octahedral(-0.4, -0.4, -0.4),
                                      tetrahedral(0.2, -0.1, 0.3)};
  for (const HermitianUnitTrace& op : fixed) {
    const NormalForm nf = filter_to_normal_form(DensityMatrix::from_operator(op), op.dim_a, op.dim_b);
    change = std::max(change, (nf.state.matrix() - op.matrix).norm());
  }
  c.check("2x4, octahedral and tetrahedral states are fixed points", change < 1e-9,
          fmt("max change %.2e", change));
}

void criterion11(Criterion& c) {
  auto isotropic = [](double p) {
    CVector phi = CVector::Zero(9);
    for (int k = 0; k < 3; ++k) phi(4 * k) = 1.0 / std::sqrt(3.0);
    return DensityMatrix::from_matrix(p * phi * phi.adjoint() + (1.0 - p) * CMatrix::Identity(9, 9) / 9.0, 3, 3);
  };
  const BlochForm strong = to_bloch(isotropic(0.2625), 3, 3);
  const double kf1 = kyfan_norm(strong.correlation);
  c.check("||T||_KF = 1.4 flagged Entangled",
          std::abs(kf1 - 1.4) < 1e-12 && bloch_norm_tests(strong).is_entangled(), fmt("KF %.12f", kf1));
  const BlochForm weak = to_bloch(isotropic(0.05625), 3, 3);
  const double kf2 = kyfan_norm(weak.correlation);
  c.check("||T||_KF = 0.3 marked SeparableProven",
          std::abs(kf2 - 0.3) < 1e-12 && bloch_norm_tests(weak).is_separable(), fmt("KF %.12f", kf2));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Criterion&)>>> criteria = {
      {"1  basis correctness", criterion1},
      {"2  Bloch round trip", criterion2},
      {"3  2x4 family thresholds", criterion3},
      {"4  2x4 family decomposition", criterion4},
      {"5  octahedral family", criterion5},
      {"6  tetrahedral family", criterion6},
      {"7  bound oracles vs tabulated values", criterion7},
      {"8  orthostochastic identity", criterion8},
      {"9  local-rank screening and false positives", criterion9},
      {"10 normal form", criterion10},
      {"11 known Bloch-norm bounds", criterion11},
  };
  int failed = 0;
  for (const auto& [title, body] : criteria) {
    Criterion c(title);
    const auto start = std::chrono::steady_clock::now();
    try {
      body(c);
    } catch (const std::exception& e) {
      c.check("unexpected exception", false, e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.print(secs);
    if (!c.ok()) ++failed;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed;
}
