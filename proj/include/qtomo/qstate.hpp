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

#include <json.hpp>

#include "qtomo/common.hpp"

namespace qtomo {

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
/// Eigenvalues above this count toward StateCharacter::rank.
inline constexpr double kRankTol = 1e-6;

/**
 * A validated d x d density matrix, d in {2, 4}.
 *
 * Construction checks hermiticity (element-wise 1e-12), unit trace (1e-10)
 * and positivity. Eigenvalues in [-1e-9, 0) are clamped to zero and the
 * result renormalized; anything more negative is rejected. Instances are
 * immutable.
 */
class DensityMatrix {
 public:
  explicit DensityMatrix(const CMatrix& entries);

  static DensityMatrix pure(const CVector& ket);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  cd operator()(int row, int col) const { return m_(row, col); }

 private:
  CMatrix m_;
};

struct EigenSystem {
  RVector values;   // descending
  CMatrix vectors;  // column a is the eigenvector of values[a]
};

/// Eigendecomposition with eigenvalues sorted in descending order.
EigenSystem hermitian_eig(const DensityMatrix& rho);
/// Same, for an arbitrary Hermitian matrix; throws InvalidStateError if not Hermitian.
EigenSystem hermitian_eig(const CMatrix& hermitian);

/// Principal square root of a PSD matrix.
CMatrix matrix_sqrt_psd(const DensityMatrix& rho);
CMatrix matrix_sqrt_psd(const CMatrix& psd);

/// Uhlmann fidelity Tr sqrt(sqrt(rho0) rho sqrt(rho0)), in [0, 1].
double fidelity(const DensityMatrix& rho0, const DensityMatrix& rho);

/// Bures distance 2 (1 - F). Reports plot half of this, 1 - F.
double bures_distance(const DensityMatrix& rho0, const DensityMatrix& rho);

/// Von Neumann entropy in bits.
double von_neumann_entropy(const DensityMatrix& rho);

/// Binary entropy h(x) in bits, h(0) = h(1) = 0.
double binary_entropy(double x);

/// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);

/// Entanglement of formation (bits) of a two-qubit state.
double entanglement_of_formation(const DensityMatrix& rho);
double eof_from_concurrence(double c);

struct StateCharacter {
  double entropy_bits = 0.0;
  double eof_bits = 0.0;
  double concurrence = 0.0;
  int rank = 0;
};

StateCharacter characterize(const DensityMatrix& rho);

/// {"dim": d, "re": [[...]], "im": [[...]]}
nlohmann::json to_json(const DensityMatrix& rho);
/// Parses and validates; throws InvalidStateError/ContractError on bad input.
DensityMatrix density_matrix_from_json(const nlohmann::json& j);

}  // namespace qtomo
