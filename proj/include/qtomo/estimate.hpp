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
#include <vector>

#include <json.hpp>

#include "qtomo/measure.hpp"
#include "qtomo/param.hpp"
#include "qtomo/qstate.hpp"

namespace qtomo {

struct FitOptions {
  int n_starts = 5;
  /// Evaluation budget per start (simplex evaluations plus gradient iterations).
  int max_iters = 20000;
  /// Relative log-likelihood change used to stop the simplex phase.
  double f_tol = 1e-9;
  double x_tol = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RankFit {
  int k = 0;
  RankKParams theta_hat;
  double log_lf = 0.0;
  double aic = 0.0;
  bool converged = false;
  int n_evals = 0;
  /// 0 = linear-inversion start, 1..n_starts-1 random, then any extra starts.
  int best_start_index = 0;
};

struct MaiceResult {
  std::vector<RankFit> fits;  // fits[k - 1], k = 1..4
  int selected_k = 0;
  DensityMatrix rho_hat;
  double C_hat = 0.0;

  const RankFit& fit(int k) const { return fits.at(static_cast<std::size_t>(k - 1)); }
};

/// AIC = -2 log_lf + 2 param_count(k).
double aic(double log_lf, int k);

/// Least-squares inversion of the linear count model, clamped to the PSD cone.
DensityMatrix linear_inversion_init(const CountRecord& rec, const ProjectorSet& ps);

/// Rate C implied by a candidate state: total counts / (t sum_nu <m_nu|rho|m_nu>).
double implied_scale(const DensityMatrix& rho, const CountRecord& rec, const ProjectorSet& ps);

/**
 * Maximum-likelihood fit within the rank-k model. Every start runs a
 * simplex search followed by an L-BFGS polish on the analytic gradient;
 * the best local maximum wins (ties to the lower start index).
 * extra_starts are raw theta vectors of length param_count(k).
 */
RankFit mle_fit(const CountRecord& rec, const ProjectorSet& ps, int k, const FitOptions& opts,
                std::span<const RVector> extra_starts = {});

/// Fits ranks 1..4 and keeps the minimum-AIC model (ties to smaller k).
/// Each rank k >= 2 also starts from the rank-(k-1) optimum embedded in rank k.
MaiceResult maice_fit(const CountRecord& rec, const ProjectorSet& ps, const FitOptions& opts);

nlohmann::json fit_report_json(const MaiceResult& res);
/// Report for a single fixed-rank fit, same schema with one entry in "fits".
nlohmann::json fit_report_json(const RankFit& fit);

}  // namespace qtomo
