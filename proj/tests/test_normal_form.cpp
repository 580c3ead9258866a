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


#include <catch_amalgamated.hpp>

#include "sepdec/normal_form.hpp"
#include "sepdec/states.hpp"
#include "test_util.hpp"

using namespace sepdec;
using testing::kron;
using testing::ket;
using testing::projector;

namespace {

CMatrix rank_two_qutrit(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  CMatrix g = CMatrix::Zero(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = cplx(nd(rng), nd(rng));
  CMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("local ranks of a full-rank state", "[normal_form]") {
  const DensityMatrix rho = random_density(3, 3, 1);
  const LocalRankReport rep = local_ranks(rho, 3, 3);
  CHECK(rep.n == 3);
  CHECK(rep.m == 3);
  CHECK(rep.leak == 0.0);
  const CMatrix rotated = rep.u_a * partial_trace_b(rho.matrix(), 3, 3) * rep.u_a.adjoint();
  CHECK((rotated - CMatrix(rotated.diagonal().asDiagonal())).norm() < 1e-10);
  for (int k = 0; k + 1 < 3; ++k) CHECK(rep.spectrum_a(k) >= rep.spectrum_a(k + 1));
  CHECK(observation1_test(rep).is_inconclusive());
}

TEST_CASE("pure product state has unit local ranks and no leak", "[normal_form]") {
  CVector a = ket(3, 0) + ket(3, 2);
  CVector b = ket(3, 1);
  const DensityMatrix rho = DensityMatrix::from_matrix(kron(projector(a), projector(b)), 3, 3);
  const LocalRankReport rep = local_ranks(rho, 3, 3);
  CHECK(rep.n == 1);
  CHECK(rep.m == 1);
  CHECK(rep.leak < 1e-10);
  CHECK(observation1_test(rep).is_inconclusive());
}

TEST_CASE("separable rank-deficient product is not flagged", "[normal_form]") {
  const CMatrix r1 = random_density(3, 5).matrix();
  const CMatrix r2 = rank_two_qutrit(6);
  const DensityMatrix rho = DensityMatrix::from_matrix(kron(r1, r2), 3, 3);
  const LocalRankReport rep = local_ranks(rho, 3, 3);
  CHECK(rep.n == 3);
  CHECK(rep.m == 2);
  CHECK(rep.leak < 1e-10);
  CHECK(observation1_test(rep).is_inconclusive());
}

TEST_CASE("positive states never carry correlations outside their supports", "[normal_form]") {
  // (|00> + |12>)/sqrt2: the rotated state lives on the support block, so
  // the out-of-support correlations are exactly those of the block.
  const CVector psi = (kron(ket(2, 0), ket(3, 0)) + kron(ket(2, 1), ket(3, 2))) / std::sqrt(2.0);
  const DensityMatrix rho = DensityMatrix::from_matrix(projector(psi), 2, 3);
  const LocalRankReport rep = local_ranks(rho, 2, 3);
  CHECK(rep.n == 2);
  CHECK(rep.m == 2);
  CHECK(rep.leak < 1e-10);
}

TEST_CASE("random separable states are never flagged", "[normal_form]") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 2 + static_cast<int>(seed % 2);
    const auto [rho, dec] = random_separable(n, 3, 1 + static_cast<int>(seed % 4), seed);
    CHECK_FALSE(observation1_test(local_ranks(rho, n, 3)).is_entangled());
  }
}

TEST_CASE("support reduction compresses a rank-deficient product", "[normal_form]") {
  const CMatrix r1 = rank_two_qutrit(7);
  const CMatrix r2 = rank_two_qutrit(8);
  const DensityMatrix rho = DensityMatrix::from_matrix(kron(r1, r2), 3, 3);
  const LocalRankReport rep = local_ranks(rho, 3, 3);
  REQUIRE(rep.n == 2);
  REQUIRE(rep.m == 2);
  const SupportReduction red = reduce_local_support(rho, rep);
  CHECK(red.state.dim() == 4);
  CHECK(red.state.matrix().trace().real() == Catch::Approx(1.0).margin(1e-12));
  const CMatrix expected = kron(red.iso_a.adjoint() * r1 * red.iso_a,
                                red.iso_b.adjoint() * r2 * red.iso_b);
  CHECK((red.state.matrix() - expected).norm() < 1e-12);
  const CMatrix v = kron(red.iso_a, red.iso_b);
  CHECK((v * red.state.matrix() * v.adjoint() - rho.matrix()).norm() < 1e-12);
}

TEST_CASE("support reduction preserves the nonzero spectrum", "[normal_form]") {
  // 2x3 state supported on span{|0>,|1>} of B.
  const DensityMatrix small = random_density(2, 2, 9);
  CMatrix embed = CMatrix::Zero(3, 2);
  embed(0, 0) = 1.0;
  embed(1, 1) = 1.0;
  const CMatrix v = kron(CMatrix::Identity(2, 2), embed);
  const DensityMatrix rho = DensityMatrix::from_matrix(v * small.matrix() * v.adjoint(), 2, 3);
  const LocalRankReport rep = local_ranks(rho, 2, 3);
  REQUIRE(rep.m == 2);
  const SupportReduction red = reduce_local_support(rho, rep);
  Eigen::SelfAdjointEigenSolver<CMatrix> before(rho.matrix());
  Eigen::SelfAdjointEigenSolver<CMatrix> after(red.state.matrix());
  const RVector top_before = before.eigenvalues().tail(4);
  CHECK((top_before - after.eigenvalues()).norm() < 1e-10);
}

TEST_CASE("full-rank reduction is the identity", "[normal_form]") {
  const DensityMatrix rho = random_density(2, 2, 10);
  const LocalRankReport rep = local_ranks(rho, 2, 2);
  const SupportReduction red = reduce_local_support(rho, rep);
  const CMatrix v = kron(red.iso_a, red.iso_b);
  CHECK((v * red.state.matrix() * v.adjoint() - rho.matrix()).norm() < 1e-12);
}

TEST_CASE("reduction refuses reports with leaked correlations", "[normal_form]") {
  const DensityMatrix rho = random_density(2, 2, 11);
  LocalRankReport rep = local_ranks(rho, 2, 2);
  rep.leak = 0.5;
  CHECK_THROWS_AS(reduce_local_support(rho, rep), InvalidReduction);
}

TEST_CASE("filtering reaches maximally mixed marginals", "[normal_form]") {
  const CMatrix r1 = random_density(3, 12).matrix();
  const CMatrix r2 = random_density(3, 13).matrix();
  const CMatrix mix = 0.9 * CMatrix::Identity(9, 9) / 9.0 + 0.1 * kron(r1, r2);
  const DensityMatrix rho = DensityMatrix::from_matrix(mix, 3, 3);
  const NormalForm nf = filter_to_normal_form(rho, 3, 3);
  const BlochForm bf = to_bloch(nf.state, 3, 3);
  CHECK(bf.a.norm() < 1e-8);
  CHECK(bf.b.norm() < 1e-8);
  CMatrix mapped = kron(nf.f_a, nf.f_b) * rho.matrix() * kron(nf.f_a, nf.f_b).adjoint();
  mapped /= mapped.trace().real();
  CHECK((mapped - nf.state.matrix()).norm() < 1e-12);
}

TEST_CASE("normal-form states are fixed points of filtering", "[normal_form]") {
  const DensityMatrix rho = DensityMatrix::from_operator(example_2x4(0.1, 0.2, 0.1));
  const NormalForm nf = filter_to_normal_form(rho, 2, 4);
  CHECK(nf.iterations == 0);
  CHECK((nf.state.matrix() - rho.matrix()).norm() < 1e-9);
  CHECK((nf.f_a - CMatrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("filtering rejects rank-deficient states", "[normal_form]") {
  const CMatrix pure = kron(projector(ket(2, 0)), projector(ket(2, 1)));
  const DensityMatrix rho = DensityMatrix::from_matrix(pure, 2, 2);
  CHECK_THROWS_AS(filter_to_normal_form(rho, 2, 2), PreconditionError);
}

TEST_CASE("filtering reports non-convergence", "[normal_form]") {
  // A nearly rank-deficient marginal needs more than one sweep.
  const CMatrix r1 = 0.98 * projector(ket(2, 0)) + 0.02 * projector(ket(2, 1));
  const CMatrix r2 = random_density(2, 14).matrix();
  CVector bell = (kron(ket(2, 0), ket(2, 0)) + kron(ket(2, 1), ket(2, 1))) / std::sqrt(2.0);
  const CMatrix mix = 0.7 * kron(r1, r2) + 0.3 * projector(bell);
  const DensityMatrix rho = DensityMatrix::from_matrix(mix, 2, 2);
  try {
    filter_to_normal_form(rho, 2, 2, 1e-14, 1);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_a_norm + e.last_b_norm > 1e-14);
  }
}
