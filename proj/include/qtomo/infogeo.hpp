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

#include <span>
#include <vector>

#include <json.hpp>

#include "qtomo/measure.hpp"
#include "qtomo/param.hpp"
#include "qtomo/qstate.hpp"

namespace qtomo {

/// Relative singular-value cutoff for the pseudo-inverse of J-tilde.
inline constexpr double kPinvTol = 1e-10;
/// Support cutoff for SLD operators, relative to the largest eigenvalue.
inline constexpr double kSldTol = 1e-10;

/**
 * Classical Fisher matrix of the Poisson count model,
 * J_ij = sum_nu (dM_nu/dtheta_i)(dM_nu/dtheta_j) / M_nu.
 *
 * Projectors with zero predicted rate and zero rate derivative carry no
 * information and are skipped; a zero rate with a nonzero derivative
 * throws SingularModelError naming the projector and parameter.
 */
RMatrix classical_fisher(const RankKParams& p, const ProjectorSet& ps, double t);

/// SLD operators for an arbitrary family given rho and its derivatives.
std::vector<CMatrix> sld_operators(const DensityMatrix& rho, std::span<const CMatrix> d_rho);
std::vector<CMatrix> sld_operators(const RankKParams& p);

/// J^S_ij = Re Tr[rho L_i L_j].
RMatrix sld_fisher(const DensityMatrix& rho, std::span<const CMatrix> d_rho);
RMatrix sld_fisher(const RankKParams& p);

/// Local Bures distance 2(1 - F) ~ (1/4) Tr[J^S V].
double local_bures_quadratic(const RMatrix& J_sld, const RMatrix& V);

/// (1 / (4 Ct)) Tr[J^S pinv(J-tilde)], the asymptotic floor on the mean Bures distance.
double cr_bound_from_matrices(const RMatrix& J_sld, const RMatrix& J_tilde, double Ct);
double cr_bound_bures(const RankKParams& p0, const ProjectorSet& ps, double Ct);

/// Second moment of theta-hat about theta0 (not about the sample mean).
RMatrix empirical_covariance(std::span<const RankKParams> theta_hats, const RankKParams& theta0);

struct FisherBundle {
  int k;
  RankKParams theta0;
  RMatrix J;
  RMatrix J_tilde;
  RMatrix J_sld;
  double Ct;
};

/// Fisher matrices at p for acquisition time t; Ct = |theta|^2 t.
FisherBundle fisher_bundle(const RankKParams& p, const ProjectorSet& ps, double t);

/// {"k", "Ct", "J", "J_sld", "cr_bound"}
nlohmann::json fisher_report_json(const FisherBundle& fb, const ProjectorSet& ps);

}  // namespace qtomo
