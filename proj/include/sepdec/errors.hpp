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

#include <stdexcept>
#include <string>

namespace sepdec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or vector dimensions are incompatible with the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Requested Hilbert-space dimension is not supported (e.g. N < 2).
class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// An input violates a documented precondition (non-orthogonal map,
/// rank-deficient state passed to filtering, non-Hermitian operator...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Iterative procedure did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_a, double last_b)
      : Error(what), last_a_norm(last_a), last_b_norm(last_b) {}
  double last_a_norm;
  double last_b_norm;
};

/// Support reduction requested on a state with correlations outside its
/// local supports.
class InvalidReduction : public Error {
 public:
  using Error::Error;
};

/// Correlation rank outside the regime handled by the constructive search.
class UnsupportedRank : public Error {
 public:
  UnsupportedRank(const std::string& what, int rank) : Error(what), rank(rank) {}
  int rank;
};

/// Input file is malformed or violates the file format.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Operator is not positive semidefinite.
class UnphysicalState : public Error {
 public:
  UnphysicalState(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue(min_eigenvalue) {}
  double min_eigenvalue;
};

}  // namespace sepdec
