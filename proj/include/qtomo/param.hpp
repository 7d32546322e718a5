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

#include <cstdint>
#include <span>

#include <json.hpp>

#include "qtomo/common.hpp"
#include "qtomo/qstate.hpp"

namespace qtomo {

/// Lower-trapezoidal 4 x k factor, k <= 4.
using Factor = Eigen::Matrix<cd, 4, Eigen::Dynamic, 0, 4, 4>;

/// Number of real parameters of the rank-k model (7, 12, 15, 16).
int param_count(int k);

// Layout of theta: the k real diagonals T_jj first, then for each column
// j = 0..k-1 the entries of rows j+1..3 as interleaved (Re, Im) pairs.
struct FactorEntry {
  int row;
  int col;
  bool imaginary;
};

FactorEntry factor_entry(int k, int index);

/// Builds T from a raw theta vector without validation.
Factor factor_from_theta(int k, std::span<const double> theta);

/**
 * Parameter point of the rank-k model. The overall scale C = Tr[T T^dagger]
 * (the nuisance rate) is carried by the norm of theta: C = |theta|^2.
 *
 * Construction canonicalizes the gauge by negating any column whose
 * diagonal entry is negative, which leaves T T^dagger unchanged.
 */
class RankKParams {
 public:
  RankKParams(int k, RVector theta);

  int k() const { return k_; }
  const RVector& theta() const { return theta_; }
  int size() const { return static_cast<int>(theta_.size()); }
  Factor factor() const { return factor_from_theta(k_, {theta_.data(), static_cast<std::size_t>(theta_.size())}); }
  /// Unnormalized Gram matrix G = T T^dagger.
  CMatrix gram() const;
  double scale() const { return theta_.squaredNorm(); }

 private:
  int k_;
  RVector theta_;
};

struct StateAndScale {
  DensityMatrix rho;
  double C;
};

StateAndScale to_state(const RankKParams& p);

/// dG/dtheta_i = (dT) T^dagger + T (dT)^dagger.
CMatrix d_gram_d_theta(const RankKParams& p, int i);

/// d rho / d theta_i by the quotient rule on G / Tr[G]. Hermitian and traceless.
CMatrix d_rho_d_theta(const RankKParams& p, int i);

/// dC/dtheta_i = Tr[dG/dtheta_i] = 2 theta_i.
double d_C_d_theta(const RankKParams& p, int i);

/// Keeps the k largest eigenpairs of rho (renormalized) and factors the
/// result as a lower-trapezoidal T with nonnegative real diagonal, scaled
/// so that Tr[T T^dagger] = C.
RankKParams project_to_rank(const DensityMatrix& rho, int k, double C = 1.0);

/// Entries i.i.d. standard normal, diagonals made nonnegative.
RankKParams random_params(int k, std::uint64_t seed);

/// Rank-k point embedded in the rank-(k+1) model by appending a column.
/// With fill = 0 the state is unchanged.
RVector embed_in_higher_rank(const RankKParams& p, double fill = 0.0);

nlohmann::json to_json(const RankKParams& p);
RankKParams rank_k_params_from_json(const nlohmann::json& j);

}  // namespace qtomo
