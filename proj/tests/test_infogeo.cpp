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

#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "qtomo/estimate.hpp"
#include "qtomo/infogeo.hpp"

using namespace qtomo;
namespace o = qtomo::oracle;

namespace {

Ket4 basis(int i) {
  Ket4 k = Ket4::Zero();
  k[i] = 1.0;
  return k;
}

RVector rates_reference(int k, const RVector& th, const ProjectorSet& ps, double t) {
  const CMatrix g = o::gram_reference(o::factor_reference(k, th));
  RVector m(ps.size());
  for (int nu = 0; nu < ps.size(); ++nu) m[nu] = t * (ps[nu].ket.adjoint() * g * ps[nu].ket)(0, 0).real();
  return m;
}

RMatrix rates_jacobian_reference(int k, const RVector& th, const ProjectorSet& ps, double t) {
  RMatrix d(ps.size(), th.size());
  for (int i = 0; i < th.size(); ++i)
    d.col(i) = o::richardson([&](const RVector& x) { return rates_reference(k, x, ps, t); }, th, i, 1e-4);
  return d;
}

CMatrix rho_reference(int k, const RVector& th) {
  const CMatrix g = o::gram_reference(o::factor_reference(k, th));
  return g / g.trace().real();
}

ProjectorSet random_povm_basis(std::mt19937_64& rng) {
  const CMatrix u = o::random_unitary(rng, 4);
  std::vector<Projector> v;
  for (int a = 0; a < 4; ++a) v.push_back({"b" + std::to_string(a), u.col(a)});
  return ProjectorSet(v);
}

double min_eig(const RMatrix& m) { return Eigen::SelfAdjointEigenSolver<RMatrix>(m).eigenvalues().minCoeff(); }

}  // namespace

TEST_CASE("brute-force Fisher oracle reproduces the single-rate closed form") {
  // M(theta) = C t theta on one projector: J = C t / theta. The second
  // projector carries a constant rate and no information.
  for (double ct : {0.7, 2.0, 4.5}) {
    for (double theta : {0.3, 1.0}) {
      RVector m(2);
      m << ct * theta, 1.0;
      RMatrix dm(2, 1);
      dm << ct, 0.0;
      CHECK(o::brute_force_fisher(m, dm)(0, 0) == doctest::Approx(ct / theta).epsilon(1e-10));
    }
  }
}

TEST_CASE("classical Fisher matches outcome sums on two-projector toys") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 8; ++trial) {
    const ProjectorSet ps({{"a", o::random_ket(rng, 4)}, {"b", o::random_ket(rng, 4)}});
    const int k = 1 + trial % 2;
    RankKParams p = random_params(k, static_cast<std::uint64_t>(trial));
    const double t = 0.5 + 0.25 * trial;
    // Keep both means at most 5.
    const double mmax = rates_reference(k, p.theta(), ps, t).maxCoeff();
    p = RankKParams(k, p.theta() * std::sqrt(4.5 / mmax));
    const RVector m = rates_reference(k, p.theta(), ps, t);
    REQUIRE(m.maxCoeff() <= 5.0);
    const RMatrix brute = o::brute_force_fisher(m, rates_jacobian_reference(k, p.theta(), ps, t));
    const RMatrix j = classical_fisher(p, ps, t);
    CHECK((j - brute).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("classical Fisher structure") {
  const ProjectorSet ps = default_projectors();
  std::mt19937_64 rng(2);
  for (int k = 1; k <= 4; ++k) {
    const auto p = project_to_rank(DensityMatrix(o::random_density(rng, 4, 4)), k, 500.0);
    const RMatrix j = classical_fisher(p, ps, 1.0);
    CHECK((j - j.transpose()).norm() <= 1e-9 * j.norm());
    CHECK(min_eig(j) >= -1e-8 * j.norm());
    CHECK((classical_fisher(p, ps, 2.0) - 2.0 * j).cwiseAbs().maxCoeff() <= 1e-12 * j.cwiseAbs().maxCoeff());

    // With theta = sqrt(C) phi for a unit-scale phi, J in phi coordinates is linear in C.
    const RankKParams unit(k, p.theta() / std::sqrt(p.scale()));
    auto j_phi = [&](double c) {
      return RMatrix(c * classical_fisher(RankKParams(k, unit.theta() * std::sqrt(c)), ps, 1.0));
    };
    CHECK((j_phi(2000.0) - 2.0 * j_phi(1000.0)).norm() <= 1e-9 * j_phi(2000.0).norm());
  }
  CHECK_THROWS_AS(classical_fisher(random_params(2, 1), ps, 0.0), ContractError);
}

TEST_CASE("zero-rate projectors with vanishing derivatives are skipped") {
  // |HH> in the rank-1 model: VV sees rate 0 and its rate is stationary.
  const ProjectorSet ps = default_projectors();
  RVector th = RVector::Zero(7);
  th[0] = std::sqrt(500.0);
  const RankKParams p(1, th);
  const RMatrix j = classical_fisher(p, ps, 1.0);
  CHECK(j.allFinite());
  CHECK(min_eig(j) >= -1e-8 * j.norm());
}

TEST_CASE("SLD operators") {
  SUBCASE("qubit diagonal family") {
    for (double th : {-0.5, 0.0, 0.5}) {
      CMatrix m = CMatrix::Zero(2, 2);
      m(0, 0) = (1.0 + th) / 2.0;
      m(1, 1) = (1.0 - th) / 2.0;
      const DensityMatrix rho(m);
      CMatrix d = CMatrix::Zero(2, 2);
      d(0, 0) = 0.5;
      d(1, 1) = -0.5;
      const std::vector<CMatrix> ds{d};
      const auto l = sld_operators(rho, ds);
      CMatrix expect = CMatrix::Zero(2, 2);
      expect(0, 0) = 1.0 / (1.0 + th);
      expect(1, 1) = -1.0 / (1.0 - th);
      CHECK((l[0] - expect).norm() <= 1e-12);
      CHECK(std::abs(sld_fisher(rho, ds)(0, 0) - 1.0 / (1.0 - th * th)) <= 1e-8);
    }
  }
  SUBCASE("maximally mixed state") {
    std::mt19937_64 rng(3);
    CMatrix a = o::random_ginibre(rng, 4, 4);
    a = a + a.adjoint().eval();
    a -= a.trace() / 4.0 * CMatrix::Identity(4, 4);
    const std::vector<CMatrix> ds{a};
    const auto l = sld_operators(DensityMatrix::maximally_mixed(4), ds);
    CHECK((l[0] - 4.0 * a).norm() <= 1e-12 * a.norm());
  }
  SUBCASE("defining equation residual") {
    for (int k = 1; k <= 4; ++k) {
      for (std::uint64_t s = 0; s < 50; ++s) {
        const auto p = random_params(k, 300 + s);
        const auto rho = to_state(p).rho.matrix();
        const auto ls = sld_operators(p);
        REQUIRE(static_cast<int>(ls.size()) == p.size());
        for (int i = 0; i < p.size(); ++i) {
          const CMatrix d = d_rho_d_theta(p, i);
          CHECK((d - 0.5 * (ls[i] * rho + rho * ls[i])).norm() <= 1e-8 * std::max(1.0, d.norm()));
          CHECK((ls[i] - ls[i].adjoint()).norm() <= 1e-12 * std::max(1.0, ls[i].norm()));
        }
      }
    }
  }
}

TEST_CASE("SLD Fisher matrix") {
  std::mt19937_64 rng(4);
  for (int k = 1; k <= 4; ++k) {
    const auto p = random_params(k, 40 + static_cast<std::uint64_t>(k));
    const RMatrix js = sld_fisher(p);
    CHECK((js - js.transpose()).norm() <= 1e-12 * js.norm());
    CHECK(min_eig(js) >= -1e-8 * js.norm());
    // Uniform scaling of T leaves rho unchanged.
    const RVector scale_dir = p.theta() / p.theta().norm();
    CHECK((js * scale_dir).norm() <= 1e-8 * js.norm());

    // Second-order agreement with the Bures distance.
    for (int trial = 0; trial < 10; ++trial) {
      RVector delta = RVector::NullaryExpr(p.size(), [&](Eigen::Index) {
        return std::normal_distribution<double>(0.0, 1.0)(rng);
      });
      const double q = 0.25 * delta.dot(js * delta);
      delta *= std::sqrt(1e-4 / q);
      const double bures = 2.0 * (1.0 - fidelity(DensityMatrix(rho_reference(k, p.theta())),
                                                  DensityMatrix(rho_reference(k, p.theta() + delta))));
      CHECK(std::abs(bures - 1e-4) <= 0.05 * bures);
    }
  }
}

TEST_CASE("local Bures quadratic form") {
  CHECK(local_bures_quadratic(RMatrix::Identity(5, 5), RMatrix::Zero(5, 5)) == 0.0);
  CHECK(local_bures_quadratic(RMatrix::Identity(6, 6), RMatrix::Identity(6, 6)) == 1.5);
  CHECK_THROWS_AS(local_bures_quadratic(RMatrix::Identity(2, 2), RMatrix::Identity(3, 3)), ContractError);
}

TEST_CASE("Cramer-Rao bound") {
  const ProjectorSet ps = default_projectors();
  SUBCASE("scalar toy") {
    const RMatrix js = RMatrix::Constant(1, 1, 3.0);
    const RMatrix jt = RMatrix::Constant(1, 1, 2.0);
    CHECK(cr_bound_from_matrices(js, jt, 10.0) == doctest::Approx(3.0 / (4.0 * 10.0 * 2.0)).epsilon(1e-15));
  }
  SUBCASE("exact inverse scaling in C t") {
    std::mt19937_64 rng(5);
    for (int k = 1; k <= 4; ++k) {
      const auto p = project_to_rank(DensityMatrix(o::random_density(rng, 4, k)), k, 500.0);
      const double b = cr_bound_bures(p, ps, 1000.0);
      CHECK(b > 0.0);
      CHECK(cr_bound_bures(p, ps, 2000.0) == b / 2.0);
    }
  }
  SUBCASE("independent of how C t is split between C and the parameter scale") {
    const auto p = project_to_rank(DensityMatrix::maximally_mixed(4), 4, 500.0);
    const auto q = project_to_rank(DensityMatrix::maximally_mixed(4), 4, 3.0);
    CHECK(cr_bound_bures(p, ps, 1000.0) == doctest::Approx(cr_bound_bures(q, ps, 1000.0)).epsilon(1e-10));
  }
  SUBCASE("ill-posed when measurement misses a state direction") {
    const RMatrix js = RMatrix::Identity(2, 2);
    RMatrix jt = RMatrix::Zero(2, 2);
    jt(0, 0) = 1.0;
    CHECK_THROWS_AS(cr_bound_from_matrices(js, jt, 1.0), IllPosedBoundError);
    CHECK_THROWS_AS(cr_bound_from_matrices(js, RMatrix::Zero(2, 2), 1.0), IllPosedBoundError);
    CHECK_THROWS_AS(cr_bound_from_matrices(js, jt, 0.0), ContractError);
  }
  SUBCASE("shared null directions cancel") {
    RMatrix js = RMatrix::Zero(2, 2);
    js(0, 0) = 2.0;
    RMatrix jt = RMatrix::Zero(2, 2);
    jt(0, 0) = 4.0;
    CHECK(cr_bound_from_matrices(js, jt, 1.0) == doctest::Approx(2.0 / 16.0));
  }
  SUBCASE("adding projectors never raises the bound") {
    std::mt19937_64 rng(6);
    auto more = ps.projectors();
    for (int i = 0; i < 4; ++i) more.push_back({"x" + std::to_string(i), o::random_ket(rng, 4)});
    const ProjectorSet superset(more);
    for (int k = 1; k <= 4; ++k) {
      const auto p = project_to_rank(DensityMatrix(o::random_density(rng, 4, k)), k, 500.0);
      CHECK(cr_bound_bures(p, superset, 1000.0) <= cr_bound_bures(p, ps, 1000.0) * (1.0 + 1e-10));
    }
  }
}

TEST_CASE("measurement information never exceeds quantum information") {
  std::mt19937_64 rng(7);
  auto directions = [&](const RMatrix& js, int n) {
    // Random directions in the row space of J^S.
    Eigen::SelfAdjointEigenSolver<RMatrix> e(js);
    const double cut = 1e-8 * e.eigenvalues().maxCoeff();
    std::vector<RVector> out;
    for (int i = 0; i < n; ++i) {
      RVector u = RVector::Zero(js.rows());
      for (Eigen::Index a = 0; a < js.rows(); ++a)
        if (e.eigenvalues()[a] > cut) u += std::normal_distribution<double>(0.0, 1.0)(rng) * e.eigenvectors().col(a);
      out.push_back(u);
    }
    return out;
  };
  SUBCASE("rank-one POVMs") {
    for (int trial = 0; trial < 20; ++trial) {
      const ProjectorSet povm = random_povm_basis(rng);
      const int k = 1 + trial % 4;
      const auto fb = fisher_bundle(random_params(k, 900 + static_cast<std::uint64_t>(trial)), povm, 1.0);
      for (const auto& u : directions(fb.J_sld, 10)) CHECK(u.dot(fb.J_tilde * u) <= u.dot(fb.J_sld * u) + 1e-8);
    }
  }
  SUBCASE("general sets, weighted by the largest eigenvalue of the projector sum") {
    const ProjectorSet ps = default_projectors();
    CMatrix s = CMatrix::Zero(4, 4);
    for (const auto& p : ps.projectors()) s += p.ket * p.ket.adjoint();
    const double smax = Eigen::SelfAdjointEigenSolver<CMatrix>(s).eigenvalues().maxCoeff();
    for (int k = 1; k <= 4; ++k) {
      const auto fb = fisher_bundle(random_params(k, 950 + static_cast<std::uint64_t>(k)), ps, 1.0);
      for (const auto& u : directions(fb.J_sld, 10)) CHECK(u.dot(fb.J_tilde * u) <= smax * u.dot(fb.J_sld * u) + 1e-8);
    }
  }
}

TEST_CASE("Fisher bundle invariants and report") {
  const ProjectorSet ps = default_projectors();
  const auto p = project_to_rank(DensityMatrix::maximally_mixed(4), 4, 500.0);
  const auto fb = fisher_bundle(p, ps, 2.0);
  CHECK(fb.k == 4);
  CHECK(fb.Ct == doctest::Approx(1000.0).epsilon(1e-14));
  CHECK(fb.J == fb.J_tilde * fb.Ct);
  CHECK((fb.J - classical_fisher(p, ps, 2.0)).norm() <= 1e-12 * fb.J.norm());
  CHECK((fb.J_sld * p.theta()).norm() <= 1e-8 * fb.J_sld.norm());

  const auto j = fisher_report_json(fb, ps);
  CHECK(j.at("k") == 4);
  CHECK(j.at("Ct").get<double>() == fb.Ct);
  CHECK(j.at("J").size() == 16);
  CHECK(j.at("J_sld")[3].size() == 16);
  CHECK(j.at("cr_bound").get<double>() == cr_bound_bures(p, ps, fb.Ct));
}

TEST_CASE("empirical covariance") {
  const auto p0 = random_params(2, 1);
  const std::vector<RankKParams> same{p0, p0, p0};
  CHECK(empirical_covariance(same, p0).norm() == 0.0);

  RVector delta = RVector::Zero(p0.size());
  delta[5] = 0.01;
  delta[7] = -0.02;
  const std::vector<RankKParams> pair{RankKParams(2, p0.theta() + delta), RankKParams(2, p0.theta() - delta)};
  CHECK((empirical_covariance(pair, p0) - delta * delta.transpose()).norm() <= 1e-15);

  const std::vector<RankKParams> one{p0};
  CHECK_THROWS_AS(empirical_covariance(one, p0), ContractError);
  const std::vector<RankKParams> mixed{p0, random_params(3, 2)};
  CHECK_THROWS_AS(empirical_covariance(mixed, p0), ContractError);
}

TEST_CASE("Monte Carlo covariance of full-rank MLE matches the Fisher predictions") {
  // Werner-like full-rank state, rank-4 fits at C t = 1e4.
  Ket4 phi;
  phi << std::sqrt(0.5), 0, 0, std::sqrt(0.5);
  const DensityMatrix truth(0.3 * phi * phi.adjoint() + 0.7 * CMatrix::Identity(4, 4) / 4.0);
  const ProjectorSet ps = default_projectors();
  const double C = 500.0, t = 20.0;
  const auto p0 = project_to_rank(truth, 4, C);
  const auto fb = fisher_bundle(p0, ps, t);

  std::vector<RankKParams> fits;
  double mean_bures = 0.0;
  const int r = 200;
  for (int i = 0; i < r; ++i) {
    FitOptions opts;
    opts.seed = static_cast<std::uint64_t>(i);
    const auto fit = mle_fit(sample_counts(truth, C, t, ps, 7000 + static_cast<std::uint64_t>(i)), ps, 4, opts);
    fits.push_back(fit.theta_hat);
    mean_bures += bures_distance(truth, to_state(fit.theta_hat).rho) / r;
  }
  const RMatrix v = empirical_covariance(fits, p0);

  // Whitened covariance: tr(J V) = dim for an efficient estimator.
  CHECK(std::abs((fb.J * v).trace() / 16.0 - 1.0) <= 0.20);
  CHECK(std::abs(local_bures_quadratic(fb.J_sld, v) / mean_bures - 1.0) <= 0.15);
}
