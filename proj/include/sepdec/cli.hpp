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
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sepdec/bloch.hpp"
#include "sepdec/criteria.hpp"
#include "sepdec/decomposer.hpp"
#include "sepdec/io.hpp"
#include "sepdec/normal_form.hpp"
#include "sepdec/states.hpp"

namespace sepdec::cli {

using io::json;

enum ExitCode : int {
  kOk = 0,
  kFailed = 1,
  kParse = 2,
  kDims = 3,
  kUnphysical = 4,
  kUnsupportedRank = 5,
};

/// Runs `body`, translating library exceptions into exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParse;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kParse;
  } catch (const InvalidDimension& e) {
    err << "error: " << e.what() << '\n';
    return kDims;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kDims;
  } catch (const UnphysicalState& e) {
    err << "error: " << e.what() << '\n';
    return kUnphysical;
  } catch (const UnsupportedRank& e) {
    err << "error: " << e.what() << '\n';
    return kUnsupportedRank;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
}

inline io::LoadedState load_checked(const std::string& path, std::ostream& err) {
  io::LoadedState s = io::load_state(path);
  if (s.asymmetry > kAsymmetryWarnTol) {
    err << "warning: input matrix was not Hermitian (defect " << s.asymmetry
        << "); using its Hermitian part\n";
  }
  return s;
}

inline json verdict_json(const Verdict& v) {
  json j;
  j["criterion"] = v.criterion;
  j["verdict"] = to_string(v.kind);
  j["witness"] = v.witness;
  if (v.violation) {
    j["violation"] = {{"lhs", io::round12(v.violation->first)},
                      {"rhs", io::round12(v.violation->second)}};
  } else {
    j["violation"] = nullptr;
  }
  return j;
}

// ---------------------------------------------------------------------------
// example

inline std::vector<double> parse_triple(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("--t: '" + item + "' is not a number");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size() || !std::isfinite(v)) throw ParseError("--t: bad value '" + item + "'");
    vals.push_back(v);
  }
  if (vals.size() != 3) throw ParseError("--t expects three comma-separated values");
  return vals;
}

inline int cmd_example(const std::string& family, const std::string& t_text,
                       const std::string& output, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    FamilyParams p;
    try {
      p.family = parse_family(family);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
    const std::vector<double> t = parse_triple(t_text);
    for (int k = 0; k < 3; ++k) p.t[k] = t[static_cast<std::size_t>(k)];
    const HermitianUnitTrace op = make_family(p);
    const double lo = min_eigenvalue(op);
    if (lo < -kPositivityTol) {
      err << "error: operator is unphysical (min eigenvalue " << io::round12(lo) << ")\n";
      return static_cast<int>(kUnphysical);
    }
    const json state = io::state_to_json(op.matrix, op.dim_a, op.dim_b);
    if (output.empty()) {
      out << state.dump(2) << '\n';
      return static_cast<int>(kOk);
    }
    io::save_json(output, state);
    json summary;
    summary["family"] = family;
    summary["t"] = {t[0], t[1], t[2]};
    summary["dims"] = {op.dim_a, op.dim_b};
    summary["min_eigenvalue"] = io::round12(lo);
    summary["output"] = output;
    out << summary.dump(2) << '\n';
    return static_cast<int>(kOk);
  });
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOptions {
  std::string criteria = "all";
  std::uint64_t seed = 0;
  int budget = 20000;
  double tol = 1e-9;
  /// Restarts of the numerical bound oracles (sum, product).
  int sum_restarts = 200;
  int product_restarts = 20;
};

inline bool valid_selector(const std::string& s) {
  return s == "all" || s == "ppt" || s == "norms" || s == "corollary2" || s == "symmetry" ||
         s == "observation1";
}

/// State restricted to its local supports, if that is a valid compression.
struct WorkingState {
  std::optional<DensityMatrix> state;
  int n = 0;
  int m = 0;
};

inline WorkingState working_state(const DensityMatrix& rho, const LocalRankReport& rep) {
  WorkingState w;
  if (rep.leak > kLeakTol) return w;
  w.n = rep.n;
  w.m = rep.m;
  if (rep.n == rep.dim_a && rep.m == rep.dim_b) {
    w.state = rho;
  } else {
    w.state = reduce_local_support(rho, rep).state;
  }
  return w;
}

/// Report object for `rho`; see cmd_analyze.
inline json analyze_state(const DensityMatrix& rho, int n, int m, const AnalyzeOptions& opt) {
  const bool all = opt.criteria == "all";
  auto wanted = [&](const char* name) { return all || opt.criteria == name; };

  json report;
  report["dims"] = {n, m};
  const LocalRankReport rep = local_ranks(rho, n, m);
  report["local_ranks"] = {{"a", rep.n},
                           {"b", rep.m},
                           {"spectrum_a", io::rounded(rep.spectrum_a)},
                           {"spectrum_b", io::rounded(rep.spectrum_b)},
                           {"leak", io::round12(rep.leak)}};

  const BlochForm bf = to_bloch(rho, n, m);
  const RVector tau = singular_values(bf.correlation);
  report["correlation"] = {{"ky_fan", io::round12(tau.sum())},
                           {"frobenius", io::round12(bf.correlation.norm())},
                           {"singular_values", io::rounded(tau)}};

  std::vector<Verdict> verdicts;

  if (wanted("observation1")) verdicts.push_back(observation1_test(rep));
  if (wanted("ppt")) verdicts.push_back(ppt_test(rho, n, m));

  if (wanted("norms")) {
    const WorkingState w = working_state(rho, rep);
    if (!w.state) {
      verdicts.push_back(Verdict::inconclusive("norms", "no valid support reduction"));
    } else if (w.n < 2 || w.m < 2) {
      verdicts.push_back(Verdict::inconclusive("norms", "a local support is one-dimensional"));
    } else {
      try {
        const NormalForm nf = filter_to_normal_form(*w.state, w.n, w.m);
        const BlochForm nbf = to_bloch(nf.state, w.n, w.m);
        const RVector ntau = singular_values(nbf.correlation);
        report["normal_form"] = {{"dims", {w.n, w.m}},
                                 {"iterations", nf.iterations},
                                 {"ky_fan", io::round12(ntau.sum())},
                                 {"singular_values", io::rounded(ntau)}};
        verdicts.push_back(bloch_norm_tests(nbf));
      } catch (const ConvergenceError& e) {
        verdicts.push_back(Verdict::inconclusive("norms", e.what()));
      }
    }
  }

  if (wanted("corollary2")) {
    const CorrelationSubspaces subs = correlation_support_subspaces(bf.correlation);
    OracleOptions sum_opt;
    sum_opt.seed = opt.seed;
    sum_opt.restarts = opt.sum_restarts;
    OracleOptions prod_opt;
    prod_opt.seed = opt.seed;
    prod_opt.restarts = opt.product_restarts;
    const SubspaceBounds ba = subspace_bounds(subs.left, n, sum_opt, prod_opt);
    const SubspaceBounds bb = subspace_bounds(subs.right, m, sum_opt, prod_opt);
    report["subspace_bounds"] = {
        {"a",
         {{"sum", io::round12(ba.sum_bound)},
          {"sum_provenance", to_string(ba.sum_provenance)},
          {"product", io::round12(ba.product_bound)},
          {"product_provenance", to_string(ba.product_provenance)}}},
        {"b",
         {{"sum", io::round12(bb.sum_bound)},
          {"sum_provenance", to_string(bb.sum_provenance)},
          {"product", io::round12(bb.product_bound)},
          {"product_provenance", to_string(bb.product_provenance)}}}};
    verdicts.push_back(corollary2_test(bf.correlation, ba, bb));
  }

  if (wanted("symmetry")) {
    bool applied = false;
    for (const bool on_a : {true, false}) {
      if (!qutrit_inversion_is_sound(bf, on_a)) continue;
      const int dim_a = bf.dim_a * bf.dim_a - 1;
      const int dim_b = bf.dim_b * bf.dim_b - 1;
      const RMatrix o_a = on_a ? partial_inversion_map({1, 2, 3}, bf.dim_a)
                               : RMatrix(RMatrix::Identity(dim_a, dim_a));
      const RMatrix o_b = on_a ? RMatrix(RMatrix::Identity(dim_b, dim_b))
                               : partial_inversion_map({1, 2, 3}, bf.dim_b);
      Verdict v = symmetry_map_test(rho, n, m, o_a, o_b);
      v.witness += on_a ? " (partial inversion on A)" : " (partial inversion on B)";
      const bool hit = v.is_entangled();
      verdicts.push_back(std::move(v));
      applied = true;
      if (hit) break;
    }
    if (!applied) {
      verdicts.push_back(Verdict::inconclusive(
          "symmetry", "partial inversion not known to be positive on this state"));
    }
  }

  if (all) {
    json dj;
    SearchOptions sopt;
    sopt.seed = opt.seed;
    sopt.budget = opt.budget;
    try {
      const DecomposeOutcome res = decompose_state(rho, n, m, sopt, opt.tol);
      dj["attempted"] = true;
      dj["success"] = res.ok();
      dj["message"] = res.message;
      dj["best_score"] = io::round12(res.search.best_score);
      dj["evaluations"] = res.search.evaluations;
      if (res.decomposition) {
        dj["terms"] = res.decomposition->terms();
        dj["reconstruction_error"] = io::round12(res.validation.reconstruction_error);
      }
      if (res.ok()) {
        verdicts.push_back(Verdict::separable(
            "decomposition",
            "explicit " + std::to_string(res.decomposition->terms()) + "-term decomposition",
            res.decomposition));
      } else {
        verdicts.push_back(Verdict::inconclusive("decomposition", res.message));
      }
    } catch (const UnsupportedRank& e) {
      dj["attempted"] = false;
      dj["message"] = e.what();
      verdicts.push_back(Verdict::inconclusive("decomposition", e.what()));
    }
    report["decomposition"] = dj;
  }

  json crit = json::array();
  for (const Verdict& v : verdicts) crit.push_back(verdict_json(v));
  report["criteria"] = crit;
  report["overall"] = to_string(combine(verdicts));
  return report;
}

inline int cmd_analyze(const std::string& input, const AnalyzeOptions& opt, std::ostream& out,
                       std::ostream& err) {
  return guarded(err, [&] {
    if (!valid_selector(opt.criteria)) throw ParseError("unknown criteria '" + opt.criteria + "'");
    const io::LoadedState s = load_checked(input, err);
    out << analyze_state(s.state, s.dim_a, s.dim_b, opt).dump(2) << '\n';
    return static_cast<int>(kOk);
  });
}

// ---------------------------------------------------------------------------
// decompose

inline int cmd_decompose(const std::string& input, const std::string& output, std::uint64_t seed,
                         int budget, double tol, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const io::LoadedState s = load_checked(input, err);
    SearchOptions sopt;
    sopt.seed = seed;
    sopt.budget = budget;
    const DecomposeOutcome res = decompose_state(s.state, s.dim_a, s.dim_b, sopt, tol);
    json report;
    report["success"] = res.ok();
    report["message"] = res.message;
    report["evaluations"] = res.search.evaluations;
    if (!res.ok()) {
      report["best_score"] = io::round12(res.search.best_score);
      if (res.decomposition) {
        report["reconstruction_error"] = io::round12(res.validation.reconstruction_error);
      }
      out << report.dump(2) << '\n';
      return static_cast<int>(kFailed);
    }
    const SeparableDecomposition& dec = *res.decomposition;
    const Quantumness q = quantumness(dec);
    report["terms"] = dec.terms();
    report["weights"] = io::rounded(dec.weights);
    report["reconstruction_error"] = io::round12(res.validation.reconstruction_error);
    report["min_local_eigenvalue"] = io::round12(res.validation.min_local_eigenvalue);
    report["quantumness"] = {{"E_A", io::round12(q.e_a)},
                             {"E_B", io::round12(q.e_b)},
                             {"var_A", io::round12(q.var_a)},
                             {"var_B", io::round12(q.var_b)}};
    if (!output.empty()) {
      io::save_json(output, io::decomposition_to_json(dec));
      report["output"] = output;
    }
    out << report.dump(2) << '\n';
    return static_cast<int>(kOk);
  });
}

// ---------------------------------------------------------------------------
// verify

inline int cmd_verify(const std::string& state_path, const std::string& dec_path, double tol,
                      std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const io::LoadedState s = load_checked(state_path, err);
    const SeparableDecomposition dec = io::load_decomposition(dec_path);
    if (dec.dim_a != s.dim_a || dec.dim_b != s.dim_b) {
      throw InvalidDimension("decomposition dims do not match the state");
    }
    ValidationReport rep;
    try {
      rep = validate_decomposition(s.state.matrix(), dec, tol);
    } catch (const PreconditionError& e) {
      err << "error: " << e.what() << '\n';
      json j;
      j["valid"] = false;
      j["message"] = e.what();
      out << j.dump(2) << '\n';
      return static_cast<int>(kFailed);
    }
    json j;
    j["valid"] = rep.ok();
    j["psd_ok"] = rep.psd_ok;
    j["weights_ok"] = rep.weights_ok;
    j["reconstruction_error"] = io::round12(rep.reconstruction_error);
    j["min_local_eigenvalue"] = io::round12(rep.min_local_eigenvalue);
    j["weight_sum"] = io::round12(rep.weight_sum);
    j["tolerance"] = tol;
    out << j.dump(2) << '\n';
    return static_cast<int>(rep.ok() ? kOk : kFailed);
  });
}

// ---------------------------------------------------------------------------
// bloch

inline int cmd_bloch(const std::string& input, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const io::LoadedState s = load_checked(input, err);
    const int n = s.dim_a;
    const int m = s.dim_b;
    const BlochForm bf = to_bloch(s.state, n, m);
    const LocalRankReport rep = local_ranks(s.state, n, m);
    json j;
    j["dims"] = {n, m};
    j["a"] = io::rounded(bf.a);
    j["b"] = io::rounded(bf.b);
    j["correlation"] = io::rounded(bf.correlation);
    json nz = json::array();
    for (Eigen::Index r = 0; r < bf.correlation.rows(); ++r) {
      for (Eigen::Index c = 0; c < bf.correlation.cols(); ++c) {
        if (std::abs(bf.correlation(r, c)) > 1e-12) {
          nz.push_back({{"row", r + 1}, {"col", c + 1}, {"value", io::round12(bf.correlation(r, c))}});
        }
      }
    }
    j["nonzero_correlations"] = nz;
    j["singular_values"] = io::rounded(singular_values(bf.correlation));
    j["local_ranks"] = {{"a", rep.n}, {"b", rep.m}};
    const double an = bf.a.norm();
    const double bn = bf.b.norm();
    j["normal_form_check"] = {{"a_norm", io::round12(an)},
                              {"b_norm", io::round12(bn)},
                              {"normal", an < 1e-12 && bn < 1e-12}};
    out << j.dump(2) << '\n';
    return static_cast<int>(kOk);
  });
}

}  // namespace sepdec::cli
