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
#include <functional>
#include <numeric>
#include <vector>

#include "sepdec/types.hpp"

namespace sepdec {

struct NelderMeadOptions {
  int max_iterations = 500;
  double ftol = 1e-12;    // stop when |f_worst - f_best| <= ftol
  double initial_step = 0.5;
  int max_evaluations = -1;  // unlimited when negative
};

struct NelderMeadResult {
  RVector x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Downhill simplex minimization of `f` starting from `x0`.
template <typename F>
NelderMeadResult nelder_mead(F&& f, const RVector& x0, const NelderMeadOptions& opt = {}) {
  const int dim = static_cast<int>(x0.size());
  NelderMeadResult res;
  if (dim == 0) {
    res.x = x0;
    res.value = f(x0);
    res.evaluations = 1;
    return res;
  }
  constexpr double reflect = 1.0;
  constexpr double expand = 2.0;
  constexpr double contract = 0.5;
  constexpr double shrink = 0.5;

  auto budget_left = [&] {
    return opt.max_evaluations < 0 || res.evaluations < opt.max_evaluations;
  };
  auto eval = [&](const RVector& x) {
    ++res.evaluations;
    return f(x);
  };

  std::vector<RVector> pts(dim + 1, x0);
  std::vector<double> vals(dim + 1);
  vals[0] = eval(x0);
  for (int k = 0; k < dim; ++k) {
    pts[k + 1](k) += opt.initial_step;
    vals[k + 1] = eval(pts[k + 1]);
  }

  std::vector<int> order(dim + 1);
  for (res.iterations = 0; res.iterations < opt.max_iterations && budget_left();
       ++res.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return vals[i] < vals[j]; });
    const int best = order.front();
    const int worst = order.back();
    const int second = order[dim - 1];
    if (std::abs(vals[worst] - vals[best]) <= opt.ftol) break;

    RVector centroid = RVector::Zero(dim);
    for (int k = 0; k <= dim; ++k) {
      if (k != worst) centroid += pts[k];
    }
    centroid /= dim;

    const RVector xr = centroid + reflect * (centroid - pts[worst]);
    const double fr = eval(xr);
    if (fr < vals[best]) {
      const RVector xe = centroid + expand * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const RVector xc = outside ? RVector(centroid + contract * (xr - centroid))
                               : RVector(centroid + contract * (pts[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (int k = 0; k <= dim; ++k) {
      if (k == best) continue;
      pts[k] = pts[best] + shrink * (pts[k] - pts[best]);
      vals[k] = eval(pts[k]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  res.value = *it;
  res.x = pts[static_cast<std::size_t>(it - vals.begin())];
  return res;
}

}  // namespace sepdec
