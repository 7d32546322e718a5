// Copyright 2026 The qtomo Authors.
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

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qtomo {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Ket4 = Eigen::Vector4cd;

/// Two-qubit Hilbert-space dimension.
inline constexpr int kQubitPairDim = 4;

// Error hierarchy. Contract errors map to CLI exit code 1, I/O errors to 2.

/// Caller violated a precondition (dimension mismatch, index out of range...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Matrix is not a valid density matrix within tolerance.
class InvalidStateError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Parameter vector that maps to no state (all-zero factor).
class DegenerateParameterError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Counts carry no information (all zero).
class NoInformationError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// Projector set does not span the Hermitian operators.
class NotInformationallyCompleteError : public ContractError {
 public:
  using ContractError::ContractError;
};

/// A projector predicts zero rate but has a nonzero rate derivative.
class SingularModelError : public ContractError {
 public:
  SingularModelError(const std::string& what, int projector_index, int param_index)
      : ContractError(what), projector_index(projector_index), param_index(param_index) {}
  int projector_index;
  int param_index;
};

/// The classical Fisher null space overlaps the support of the SLD Fisher matrix.
class IllPosedBoundError : public ContractError {
 public:
  using ContractError::ContractError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qtomo
