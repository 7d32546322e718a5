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

#include "qtomo/infogeo.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace qtomo {

RMatrix classical_fisher(const RankKParams& p, const ProjectorSet& ps, double t) {
  if (!(t > 0.0)) throw ContractError("acquisition time must be positive");
  const RMatrix jac = rate_jacobian(p, ps, t);
  const CMatrix g = p.gram();
  RVector rate(ps.size());
  for (int nu = 0; nu < ps.size(); ++nu) rate[nu] = t * (ps[nu].ket.adjoint() * g * ps[nu].ket)(0, 0).real();
  const double rate_max = rate.maxCoeff();
  const double jac_max = jac.cwiseAbs().maxCoeff();
  const int n = p.size();
  RMatrix J = RMatrix::Zero(n, n);
  for (int nu = 0; nu < ps.size(); ++nu) {
    if (rate[nu] <= 1e-12 * rate_max) {
      Eigen::Index worst = 0;
      const double d = jac.row(nu).cwiseAbs().maxCoeff(&worst);
      if (d > 1e-6 * jac_max) {
        throw SingularModelError("projector '" + ps[nu].label + "' has zero rate but nonzero derivative along parameter " +
                                     std::to_string(worst),
                                 nu, static_cast<int>(worst));
      }
      continue;
    }
    J.noalias() += jac.row(nu).transpose() * jac.row(nu) / rate[nu];
  }
  return 0.5 * (J + J.transpose());
}

std::vector<CMatrix> sld_operators(const DensityMatrix& rho, std::span<const CMatrix> d_rho) {
  const EigenSystem es = hermitian_eig(rho);
  const auto d = es.values.size();
  const double cutoff = kSldTol * es.values[0];
  std::vector<CMatrix> out;
  out.reserve(d_rho.size());
  for (const CMatrix& dr : d_rho) {
    if (dr.rows() != d || dr.cols() != d) throw ContractError("derivative shape does not match state");
    CMatrix l = es.vectors.adjoint() * dr * es.vectors;
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) {
        const double s = es.values[a] + es.values[b];
        l(a, b) = s > cutoff ? 2.0 * l(a, b) / s : cd(0.0);
      }
    }
    CMatrix back = es.vectors * l * es.vectors.adjoint();
    out.push_back(0.5 * (back + back.adjoint()));
  }
  return out;
}

namespace {

std::vector<CMatrix> rho_derivatives(const RankKParams& p) {
  std::vector<CMatrix> d;
  d.reserve(static_cast<std::size_t>(p.size()));
  for (int i = 0; i < p.size(); ++i) d.push_back(d_rho_d_theta(p, i));
  return d;
}

}  // namespace

std::vector<CMatrix> sld_operators(const RankKParams& p) {
  const auto d = rho_derivatives(p);
  return sld_operators(to_state(p).rho, d);
}

RMatrix sld_fisher(const DensityMatrix& rho, std::span<const CMatrix> d_rho) {
  const auto ls = sld_operators(rho, d_rho);
  const auto n = static_cast<Eigen::Index>(ls.size());
  RMatrix js(n, n);
  std::vector<CMatrix> rho_l;
  rho_l.reserve(ls.size());
  for (const auto& l : ls) rho_l.push_back(rho.matrix() * l);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      // Re Tr[rho L_i L_j]
      const double v = (rho_l[static_cast<std::size_t>(i)].transpose().cwiseProduct(ls[static_cast<std::size_t>(j)])).sum().real();
      js(i, j) = v;
      js(j, i) = v;
    }
  }
  return js;
}

RMatrix sld_fisher(const RankKParams& p) {
  const auto d = rho_derivatives(p);
  return sld_fisher(to_state(p).rho, d);
}

double local_bures_quadratic(const RMatrix& J_sld, const RMatrix& V) {
  if (J_sld.rows() != J_sld.cols() || V.rows() != V.cols() || J_sld.rows() != V.rows()) {
    throw ContractError("local_bures_quadratic: shape mismatch");
  }
  return 0.25 * (J_sld * V).trace();
}

double cr_bound_from_matrices(const RMatrix& J_sld, const RMatrix& J_tilde, double Ct) {
  if (!(Ct > 0.0)) throw ContractError("Ct must be positive");
  if (J_sld.rows() != J_tilde.rows() || J_sld.cols() != J_tilde.cols() || J_sld.rows() != J_sld.cols()) {
    throw ContractError("cr_bound: shape mismatch");
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(0.5 * (J_tilde + J_tilde.transpose()));
  const RVector mu = eig.eigenvalues();
  const RMatrix& v = eig.eigenvectors();
  const double mu_max = mu.cwiseAbs().maxCoeff();
  if (!(mu_max > 0.0)) throw IllPosedBoundError("classical Fisher matrix vanishes");
  const double js_norm = std::max(J_sld.norm(), 1e-300);
  RMatrix pinv = RMatrix::Zero(mu.size(), mu.size());
  for (Eigen::Index a = 0; a < mu.size(); ++a) {
    if (mu[a] > kPinvTol * mu_max) {
      pinv.noalias() += v.col(a) * v.col(a).transpose() / mu[a];
    } else if ((J_sld * v.col(a)).norm() > 1e-8 * js_norm) {
      throw IllPosedBoundError("classical Fisher null space overlaps the SLD Fisher support");
    }
  }
  return (J_sld * pinv).trace() / (4.0 * Ct);
}

double cr_bound_bures(const RankKParams& p0, const ProjectorSet& ps, double Ct) {
  const RMatrix j_tilde = classical_fisher(p0, ps, 1.0) / p0.scale();
  return cr_bound_from_matrices(sld_fisher(p0), j_tilde, Ct);
}

RMatrix empirical_covariance(std::span<const RankKParams> theta_hats, const RankKParams& theta0) {
  if (theta_hats.size() < 2) throw ContractError("empirical_covariance needs at least two samples");
  const int n = theta0.size();
  RMatrix v = RMatrix::Zero(n, n);
  for (const auto& th : theta_hats) {
    if (th.k() != theta0.k()) throw ContractError("empirical_covariance: mixed ranks");
    const RVector d = th.theta() - theta0.theta();
    v.noalias() += d * d.transpose();
  }
  return v / static_cast<double>(theta_hats.size());
}

FisherBundle fisher_bundle(const RankKParams& p, const ProjectorSet& ps, double t) {
  const double ct = p.scale() * t;
  const RMatrix j_tilde = classical_fisher(p, ps, t) / ct;
  return {p.k(), p, j_tilde * ct, j_tilde, sld_fisher(p), ct};
}

namespace {

nlohmann::json matrix_json(const RMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

nlohmann::json fisher_report_json(const FisherBundle& fb, const ProjectorSet& ps) {
  return {{"k", fb.k},
          {"Ct", fb.Ct},
          {"J", matrix_json(fb.J)},
          {"J_sld", matrix_json(fb.J_sld)},
          {"cr_bound", cr_bound_bures(fb.theta0, ps, fb.Ct)}};
}

}  // namespace qtomo
