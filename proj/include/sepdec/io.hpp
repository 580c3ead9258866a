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
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sepdec/bloch.hpp"
#include "sepdec/errors.hpp"
#include "sepdec/verdict.hpp"

namespace sepdec::io {

using json = nlohmann::ordered_json;

/// Trace deviation accepted on ingestion before renormalizing.
inline constexpr double kIngestTraceTol = 1e-9;
/// Hermiticity defect above which a file is rejected outright.
inline constexpr double kIngestAsymmetryLimit = 1e-6;

/// Value rounded to 12 significant digits, for reports.
inline double round12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline json rounded(const RVector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(round12(v(k)));
  return out;
}

inline json rounded(const RMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(round12(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

/// Row-major list of [re, im] pairs at full precision.
inline json encode_matrix(const CMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back({m(i, j).real(), m(i, j).imag()});
  }
  return out;
}

inline CMatrix decode_matrix(const json& j, int dim, const std::string& what) {
  if (!j.is_array()) throw ParseError(what + ": expected an array of [re, im] pairs");
  if (j.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim)) {
    throw InvalidDimension(what + ": expected " + std::to_string(dim * dim) + " entries, got " +
                           std::to_string(j.size()));
  }
  CMatrix m(dim, dim);
  std::size_t k = 0;
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c, ++k) {
      const json& e = j[k];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        throw ParseError(what + ": entry " + std::to_string(k) + " is not an [re, im] pair");
      }
      m(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

inline void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

inline std::pair<int, int> decode_dims(const json& j) {
  if (!j.is_object() || !j.contains("dims")) throw ParseError("missing 'dims'");
  const json& d = j["dims"];
  if (!d.is_array() || d.size() != 2 || !d[0].is_number_integer() || !d[1].is_number_integer()) {
    throw ParseError("'dims' must be a pair of integers");
  }
  const int n = d[0].get<int>();
  const int m = d[1].get<int>();
  if (n < 2 || m < 2) throw InvalidDimension("dims must be at least 2 on each side");
  return {n, m};
}

// ---------------------------------------------------------------------------
// StateFile

inline json state_to_json(const CMatrix& m, int n, int mm) {
  json j;
  j["dims"] = {n, mm};
  j["matrix"] = encode_matrix(m);
  return j;
}

struct LoadedState {
  DensityMatrix state;
  double asymmetry = 0.0;
  int dim_a = 0;
  int dim_b = 0;
};

/// Parses a StateFile: the matrix is symmetrized, its trace must be within
/// kIngestTraceTol of one and is then normalized, and it must be PSD.
inline LoadedState state_from_json(const json& j) {
  const auto [n, m] = decode_dims(j);
  if (!j.contains("matrix")) throw ParseError("missing 'matrix'");
  const CMatrix raw = decode_matrix(j["matrix"], n * m, "matrix");
  const double asym = hermitian_defect(raw);
  if (asym > kIngestAsymmetryLimit) {
    throw ParseError("matrix is not Hermitian (defect " + std::to_string(asym) + ")");
  }
  const CMatrix h = (raw + raw.adjoint()) / 2.0;
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > kIngestTraceTol) {
    throw ParseError("matrix trace is " + std::to_string(tr) + ", expected 1");
  }
  const double lo = min_eigenvalue(h / tr);
  if (lo < -kPositivityTol) {
    throw UnphysicalState("matrix is not positive semidefinite (min eigenvalue " +
                              std::to_string(lo) + ")",
                          lo);
  }
  LoadedState out;
  out.state = DensityMatrix::from_matrix(h / tr, n, m);
  out.asymmetry = asym;
  out.dim_a = n;
  out.dim_b = m;
  return out;
}

inline LoadedState load_state(const std::string& path) {
  const json j = load_json(path);
  try {
    return state_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// DecompositionFile

inline json decomposition_to_json(const SeparableDecomposition& dec) {
  json j;
  j["dims"] = {dec.dim_a, dec.dim_b};
  json w = json::array();
  for (Eigen::Index i = 0; i < dec.weights.size(); ++i) w.push_back(dec.weights(i));
  j["weights"] = w;
  json sa = json::array();
  json sb = json::array();
  for (std::size_t i = 0; i < dec.rho_a_list.size(); ++i) {
    sa.push_back(encode_matrix(dec.rho_a_list[i]));
    sb.push_back(encode_matrix(dec.rho_b_list[i]));
  }
  j["states_a"] = sa;
  j["states_b"] = sb;
  auto vectors = [](const std::vector<RVector>& vs) {
    json out = json::array();
    for (const RVector& v : vs) out.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return out;
  };
  j["bloch_r"] = vectors(dec.r_list);
  j["bloch_s"] = vectors(dec.s_list);
  return j;
}

/// Parses a DecompositionFile. Local matrices are taken as written; their
/// validity is checked by validate_decomposition.
inline SeparableDecomposition decomposition_from_json(const json& j) {
  const auto [n, m] = decode_dims(j);
  for (const char* key : {"weights", "states_a", "states_b"}) {
    if (!j.contains(key) || !j[key].is_array()) {
      throw ParseError(std::string("missing array '") + key + "'");
    }
  }
  const std::size_t terms = j["weights"].size();
  if (terms == 0 || j["states_a"].size() != terms || j["states_b"].size() != terms) {
    throw ParseError("weights, states_a and states_b must have the same nonzero length");
  }
  SeparableDecomposition dec;
  dec.dim_a = n;
  dec.dim_b = m;
  dec.weights.resize(static_cast<Eigen::Index>(terms));
  for (std::size_t i = 0; i < terms; ++i) {
    if (!j["weights"][i].is_number()) throw ParseError("weights must be numbers");
    dec.weights(static_cast<Eigen::Index>(i)) = j["weights"][i].get<double>();
    const std::string idx = "[" + std::to_string(i) + "]";
    dec.rho_a_list.push_back(decode_matrix(j["states_a"][i], n, "states_a" + idx));
    dec.rho_b_list.push_back(decode_matrix(j["states_b"][i], m, "states_b" + idx));
    const CMatrix& a = dec.rho_a_list.back();
    const CMatrix& b = dec.rho_b_list.back();
    dec.r_list.push_back(bloch_vector((a + a.adjoint()) / 2.0));
    dec.s_list.push_back(bloch_vector((b + b.adjoint()) / 2.0));
  }
  return dec;
}

inline SeparableDecomposition load_decomposition(const std::string& path) {
  const json j = load_json(path);
  try {
    return decomposition_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

}  // namespace sepdec::io
