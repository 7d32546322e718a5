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

#include "qtomo/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qtomo/optimize.hpp"
#include "qtomo/random.hpp"

namespace qtomo {

void FitOptions::validate() const {
  if (n_starts < 1 || max_iters < 1 || !(f_tol > 0.0) || !(x_tol > 0.0)) {
    throw ContractError("fit options must be positive");
  }
}

double aic(double log_lf, int k) { return -2.0 * log_lf + 2.0 * param_count(k); }

DensityMatrix linear_inversion_init(const CountRecord& rec, const ProjectorSet& ps) {
  validate(rec, ps);
  const RMatrix a = measurement_design(ps);
  Eigen::ColPivHouseholderQR<RMatrix> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 16) throw NotInformationallyCompleteError("projector set is not informationally complete");
  RVector b(ps.size());
  for (int nu = 0; nu < ps.size(); ++nu) b[nu] = static_cast<double>(rec.counts[static_cast<std::size_t>(nu)]) / rec.t;
  const RVector x = qr.solve(b);
  CMatrix h = hermitian_from_coordinates(x);
  EigenSystem es = hermitian_eig(h);
  es.values = es.values.cwiseMax(0.0);
  const double tr = es.values.sum();
  if (!(tr > 0.0)) return DensityMatrix::maximally_mixed(4);
  es.values /= tr;
  return DensityMatrix(es.vectors * es.values.cast<cd>().asDiagonal() * es.vectors.adjoint());
}

double implied_scale(const DensityMatrix& rho, const CountRecord& rec, const ProjectorSet& ps) {
  const RVector unit = expected_counts(rho, 1.0, rec.t, ps);
  const double denom = unit.sum();
  if (!(denom > 0.0)) throw ContractError("state predicts no counts for this projector set");
  return std::max(static_cast<double>(rec.total()), 1.0) / denom;
}

RankFit mle_fit(const CountRecord& rec, const ProjectorSet& ps, int k, const FitOptions& opts,
                std::span<const RVector> extra_starts) {
  opts.validate();
  validate(rec, ps);
  if (rec.total() == 0) throw NoInformationError("all counts are zero");
  const int n = param_count(k);
  const PoissonLikelihood lf(rec, ps, k);

  const DensityMatrix li = linear_inversion_init(rec, ps);
  const double c_est = implied_scale(li, rec, ps);

  std::vector<RVector> starts;
  starts.push_back(project_to_rank(li, k, c_est).theta());
  for (int s = 1; s < opts.n_starts; ++s) {
    RVector th = random_params(k, derive_seed(opts.seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(s)})).theta();
    th *= std::sqrt(c_est / th.squaredNorm());
    starts.push_back(std::move(th));
  }
  for (const RVector& e : extra_starts) {
    if (e.size() != n) throw ContractError("extra start has wrong length for rank " + std::to_string(k));
    starts.push_back(e);
  }

  const Objective neg_ll = [&lf](const RVector& x) {
    return -lf.value({x.data(), static_cast<std::size_t>(x.size())});
  };
  const ObjectiveWithGradient neg_ll_grad = [&lf](const RVector& x, RVector& g) {
    const double v = lf.value_and_gradient({x.data(), static_cast<std::size_t>(x.size())},
                                           {g.data(), static_cast<std::size_t>(g.size())});
    g = -g;
    return -v;
  };

  NelderMeadOptions nm;
  nm.max_evals = std::max(1, std::min(opts.max_iters / 4, 150 * n));
  nm.f_tol = std::max(opts.f_tol, 1e-7);
  nm.x_tol = std::max(opts.x_tol, 1e-5);

  RankFit best{k, RankKParams(k, starts.front()), -std::numeric_limits<double>::infinity()};
  int total_evals = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const OptimResult coarse = nelder_mead(neg_ll, starts[s], nm);
    LbfgsOptions lb;
    lb.max_iters = std::max(1, opts.max_iters - coarse.n_evals);
    lb.f_tol = opts.f_tol * 1e-4;
    const OptimResult fine = lbfgs(neg_ll_grad, coarse.x, lb);
    total_evals += coarse.n_evals + fine.n_evals;
    const double ll = -fine.f;
    if (ll > best.log_lf) {
      best.theta_hat = RankKParams(k, fine.x);
      best.log_lf = ll;
      best.converged = fine.converged;
      best.best_start_index = static_cast<int>(s);
    }
  }
  // Re-evaluate on the canonical theta so log_lf matches theta_hat exactly.
  best.log_lf = lf.value({best.theta_hat.theta().data(), static_cast<std::size_t>(n)});
  best.aic = aic(best.log_lf, k);
  best.n_evals = total_evals;
  return best;
}

MaiceResult maice_fit(const CountRecord& rec, const ProjectorSet& ps, const FitOptions& opts) {
  std::vector<RankFit> fits;
  fits.reserve(4);
  for (int k = 1; k <= 4; ++k) {
    std::vector<RVector> extra;
    if (k >= 2) extra.push_back(embed_in_higher_rank(fits.back().theta_hat));
    fits.push_back(mle_fit(rec, ps, k, opts, extra));
  }
  int selected = 1;
  for (int k = 2; k <= 4; ++k) {
    if (fits[static_cast<std::size_t>(k - 1)].aic < fits[static_cast<std::size_t>(selected - 1)].aic) selected = k;
  }
  const StateAndScale st = to_state(fits[static_cast<std::size_t>(selected - 1)].theta_hat);
  return {std::move(fits), selected, st.rho, st.C};
}

namespace {

nlohmann::json fit_entry(const RankFit& f) {
  return {{"k", f.k}, {"log_lf", f.log_lf}, {"aic", f.aic}, {"converged", f.converged}};
}

}  // namespace

nlohmann::json fit_report_json(const MaiceResult& res) {
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : res.fits) fits.push_back(fit_entry(f));
  return {{"selected_k", res.selected_k}, {"fits", fits}, {"rho_hat", to_json(res.rho_hat)}, {"C_hat", res.C_hat}};
}

nlohmann::json fit_report_json(const RankFit& fit) {
  const StateAndScale st = to_state(fit.theta_hat);
  return {{"selected_k", fit.k},
          {"fits", nlohmann::json::array({fit_entry(fit)})},
          {"rho_hat", to_json(st.rho)},
          {"C_hat", st.C}};
}

}  // namespace qtomo
