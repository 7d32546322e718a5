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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtomo/common.hpp"
#include "qtomo/param.hpp"
#include "qtomo/qstate.hpp"

namespace qtomo {

/// Floor applied to predicted rates when a nonzero count meets a zero rate.
inline constexpr double kMuFloor = 1e-12;

struct Projector {
  std::string label;
  Ket4 ket;
};

/**
 * Ordered set of rank-one tomographic projectors |m><m|. Kets must be unit
 * vectors (1e-10); entangled kets are allowed.
 */
class ProjectorSet {
 public:
  explicit ProjectorSet(std::vector<Projector> projectors);

  int size() const { return static_cast<int>(projectors_.size()); }
  const Projector& operator[](int nu) const { return projectors_[static_cast<std::size_t>(nu)]; }
  const std::vector<Projector>& projectors() const { return projectors_; }
  /// True iff the projectors span the 16-dimensional real space of Hermitian 4x4 matrices.
  bool informationally_complete() const { return informationally_complete_; }
  /// Index of a label, or -1.
  int find(const std::string& label) const;

 private:
  std::vector<Projector> projectors_;
  bool informationally_complete_ = false;
};

/// Row nu holds the coordinates of X -> <m_nu|X|m_nu> in the Hermitian basis
/// (4 real diagonals, then (Re, Im) of the 6 upper off-diagonals).
RMatrix measurement_design(const ProjectorSet& ps);
/// Inverse of the coordinate map used by measurement_design.
CMatrix hermitian_from_coordinates(const RVector& x);

/// The standard 16 product settings over H, V, D, L, R.
ProjectorSet default_projectors();

/// Single-qubit ket by polarization name (H, V, D, A, L, R).
Eigen::Vector2cd polarization(char name);

struct CountRecord {
  std::vector<std::int64_t> counts;
  double t = 1.0;
  std::optional<std::uint64_t> seed;

  std::int64_t total() const;
};

/// Checks the CountRecord invariants against a projector set.
void validate(const CountRecord& rec, const ProjectorSet& ps);

/// M_nu = C t <m_nu|rho|m_nu>.
RVector expected_counts(const DensityMatrix& rho, double C, double t, const ProjectorSet& ps);

/// Independent Poisson draws; the stream for projector nu is keyed by (seed, nu).
CountRecord sample_counts(const DensityMatrix& rho, double C, double t, const ProjectorSet& ps,
                          std::uint64_t seed);

/**
 * Poisson log-likelihood kernel of a fixed-rank model on one count record.
 * Operates directly on raw theta so that optimizers avoid revalidating
 * states on every evaluation.
 */
class PoissonLikelihood {
 public:
  PoissonLikelihood(const CountRecord& rec, const ProjectorSet& ps, int k);

  int k() const { return k_; }
  int dimension() const { return n_params_; }
  double value(std::span<const double> theta) const;
  /// Returns the value; writes the gradient into grad (length dimension()).
  double value_and_gradient(std::span<const double> theta, std::span<double> grad) const;
  /// Predicted counts at theta.
  RVector rates(std::span<const double> theta) const;

 private:
  int k_;
  int n_params_;
  double t_;
  std::vector<Ket4> kets_;
  std::vector<double> counts_;
  double log_factorials_ = 0.0;
};

double log_likelihood(const RankKParams& p, const CountRecord& rec, const ProjectorSet& ps);
RVector grad_log_likelihood(const RankKParams& p, const CountRecord& rec, const ProjectorSet& ps);

/// d M_nu / d theta_i = t <m_nu| dG/dtheta_i |m_nu>, as a V x n matrix.
RMatrix rate_jacobian(const RankKParams& p, const ProjectorSet& ps, double t);

/// KL divergence between independent Poisson vectors with means M0 and M.
/// Returns +infinity when some M0_nu > 0 meets M_nu = 0.
double poisson_relative_entropy(const RVector& M0, const RVector& M);

// File formats.
nlohmann::json to_json(const ProjectorSet& ps);
ProjectorSet projector_set_from_json(const nlohmann::json& j);
ProjectorSet load_projectors(const std::string& path);
void save_projectors(const std::string& path, const ProjectorSet& ps);

/// Sidecar JSON path for a count CSV.
std::string count_sidecar_path(const std::string& csv_path);
/// Writes `label,count` CSV plus the {"t", "seed"} sidecar.
void save_counts(const std::string& csv_path, const CountRecord& rec, const ProjectorSet& ps);
/// Reads a count CSV and sidecar; rows are matched to ps by label.
CountRecord load_counts(const std::string& csv_path, const ProjectorSet& ps);

}  // namespace qtomo
