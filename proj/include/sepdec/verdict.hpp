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

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sepdec/types.hpp"

namespace sepdec {

/// Explicit convex decomposition rho = sum_i p_i rho_i^A (x) rho_i^B, with
/// rho_i^A = 1/N + r_i.lambda/2 and rho_i^B = 1/M + s_i.sigma/2.
struct SeparableDecomposition {
  int dim_a = 0;
  int dim_b = 0;
  RVector weights;
  std::vector<RVector> r_list;
  std::vector<RVector> s_list;
  std::vector<CMatrix> rho_a_list;
  std::vector<CMatrix> rho_b_list;

  [[nodiscard]] int terms() const { return static_cast<int>(weights.size()); }
};

enum class VerdictKind { Entangled, SeparableProven, Inconclusive };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Entangled:
      return "Entangled";
    case VerdictKind::SeparableProven:
      return "SeparableProven";
    case VerdictKind::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

/// Minimum margin by which an entanglement witness must be violated.
inline constexpr double kViolationMargin = 1e-10;

/// Outcome of one criterion. An Entangled verdict carries the violated
/// inequality as (lhs, rhs): separability requires lhs <= rhs.
struct Verdict {
  VerdictKind kind = VerdictKind::Inconclusive;
  std::string criterion;
  std::string witness;
  std::optional<std::pair<double, double>> violation;
  std::shared_ptr<const SeparableDecomposition> decomposition;

  static Verdict entangled(std::string criterion, std::string witness, double lhs, double rhs) {
    if (!(lhs > rhs + kViolationMargin)) {
      throw std::logic_error("Entangled verdict without a strict violation");
    }
    return {VerdictKind::Entangled, std::move(criterion), std::move(witness),
            std::make_pair(lhs, rhs), nullptr};
  }

  static Verdict separable(std::string criterion, std::string witness,
                           std::shared_ptr<const SeparableDecomposition> dec = nullptr) {
    return {VerdictKind::SeparableProven, std::move(criterion), std::move(witness), std::nullopt,
            std::move(dec)};
  }

  static Verdict inconclusive(std::string criterion, std::string witness = {}) {
    return {VerdictKind::Inconclusive, std::move(criterion), std::move(witness), std::nullopt,
            nullptr};
  }

  [[nodiscard]] bool is_entangled() const { return kind == VerdictKind::Entangled; }
  [[nodiscard]] bool is_separable() const { return kind == VerdictKind::SeparableProven; }
  [[nodiscard]] bool is_inconclusive() const { return kind == VerdictKind::Inconclusive; }
};

/// Entangled if any verdict is Entangled, else SeparableProven if any proves
/// separability, else Inconclusive.
inline VerdictKind combine(const std::vector<Verdict>& verdicts) {
  bool separable = false;
  for (const auto& v : verdicts) {
    if (v.is_entangled()) return VerdictKind::Entangled;
    separable = separable || v.is_separable();
  }
  return separable ? VerdictKind::SeparableProven : VerdictKind::Inconclusive;
}

}  // namespace sepdec
