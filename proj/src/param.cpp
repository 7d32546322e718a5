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

#include "qtomo/param.hpp"

#include <cmath>
#include <string>

#include "qtomo/random.hpp"

namespace qtomo {

namespace {

void check_k(int k) {
  if (k < 1 || k > 4) throw ContractError("rank k must be in 1..4, got " + std::to_string(k));
}

}  // namespace

int param_count(int k) {
  check_k(k);
  int n = k;
  for (int j = 0; j < k; ++j) n += 2 * (kQubitPairDim - 1 - j);
  return n;
}

FactorEntry factor_entry(int k, int index) {
  if (index < 0 || index >= param_count(k)) {
    throw ContractError("parameter index " + std::to_string(index) + " out of range");
  }
  if (index < k) return {index, index, false};
  int offset = index - k;
  for (int col = 0; col < k; ++col) {
    const int below = kQubitPairDim - 1 - col;
    if (offset < 2 * below) return {col + 1 + offset / 2, col, offset % 2 == 1};
    offset -= 2 * below;
  }
  throw ContractError("parameter index out of range");  // unreachable
}

Factor factor_from_theta(int k, std::span<const double> theta) {
  Factor t = Factor::Zero(kQubitPairDim, k);
  for (int j = 0; j < k; ++j) t(j, j) = theta[j];
  std::size_t idx = static_cast<std::size_t>(k);
  for (int col = 0; col < k; ++col) {
    for (int row = col + 1; row < kQubitPairDim; ++row) {
      t(row, col) = cd(theta[idx], theta[idx + 1]);
      idx += 2;
    }
  }
  return t;
}

RankKParams::RankKParams(int k, RVector theta) : k_(k), theta_(std::move(theta)) {
  if (theta_.size() != param_count(k)) {
    throw ContractError("theta length " + std::to_string(theta_.size()) + " does not match rank " +
                        std::to_string(k));
  }
  if (!theta_.allFinite()) throw ContractError("theta has non-finite entries");
  if (theta_.squaredNorm() == 0.0) throw DegenerateParameterError("all-zero parameter vector");
  // Column sign flips leave G = T T^dagger invariant.
  int idx = k;
  for (int col = 0; col < k; ++col) {
    const int n = 2 * (kQubitPairDim - 1 - col);
    if (theta_[col] < 0.0) {
      theta_[col] = -theta_[col];
      theta_.segment(idx, n) *= -1.0;
    }
    idx += n;
  }
}

CMatrix RankKParams::gram() const {
  const Factor t = factor();
  return t * t.adjoint();
}

StateAndScale to_state(const RankKParams& p) {
  const CMatrix g = p.gram();
  const double c = g.trace().real();
  return {DensityMatrix(g / c), c};
}

CMatrix d_gram_d_theta(const RankKParams& p, int i) {
  const FactorEntry e = factor_entry(p.k(), i);
  const Factor t = p.factor();
  // dT = unit (or i) at (row, col); (dT) T^dagger has a single nonzero row.
  const cd unit = e.imaginary ? cd(0.0, 1.0) : cd(1.0, 0.0);
  CMatrix dg = CMatrix::Zero(kQubitPairDim, kQubitPairDim);
  dg.row(e.row) = unit * t.col(e.col).adjoint();
  dg += dg.adjoint().eval();
  return dg;
}

CMatrix d_rho_d_theta(const RankKParams& p, int i) {
  const CMatrix g = p.gram();
  const CMatrix dg = d_gram_d_theta(p, i);
  const double c = g.trace().real();
  const double dc = dg.trace().real();
  return (dg * c - g * dc) / (c * c);
}

double d_C_d_theta(const RankKParams& p, int i) {
  factor_entry(p.k(), i);  // range check
  return 2.0 * p.theta()[i];
}

RankKParams project_to_rank(const DensityMatrix& rho, int k, double C) {
  check_k(k);
  if (rho.dim() != kQubitPairDim) throw ContractError("project_to_rank requires a 4x4 state");
  if (!(C > 0.0)) throw ContractError("scale C must be positive");
  const EigenSystem es = hermitian_eig(rho);
  RVector lam = es.values.head(k).cwiseMax(0.0);
  if (lam.sum() <= 0.0) throw DegenerateParameterError("state has no weight in the top-k eigenspace");
  lam /= lam.sum();
  // A = V_k sqrt(Lambda_k); T = A Q with Q unitary such that T is lower
  // trapezoidal, i.e. T = R^dagger where A^dagger = Q R.
  CMatrix a = es.vectors.leftCols(k) * lam.cwiseSqrt().cast<cd>().asDiagonal();
  Eigen::HouseholderQR<CMatrix> qr(a.adjoint());
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) r.row(j) *= std::conj(r(j, j)) / mag;
  }
  const CMatrix t = r.adjoint() * std::sqrt(C);
  RVector theta(param_count(k));
  for (int j = 0; j < k; ++j) theta[j] = t(j, j).real();
  int idx = k;
  for (int col = 0; col < k; ++col) {
    for (int row = col + 1; row < kQubitPairDim; ++row) {
      theta[idx++] = t(row, col).real();
      theta[idx++] = t(row, col).imag();
    }
  }
  return RankKParams(k, std::move(theta));
}

RankKParams random_params(int k, std::uint64_t seed) {
  const int n = param_count(k);
  CounterRng rng(seed, 0x7A4A11u);
  RVector theta(n);
  for (int i = 0; i < n; ++i) theta[i] = rng.normal();
  for (int j = 0; j < k; ++j) theta[j] = std::abs(theta[j]);
  return RankKParams(k, std::move(theta));
}

RVector embed_in_higher_rank(const RankKParams& p, double fill) {
  const int k = p.k();
  if (k >= 4) throw ContractError("cannot embed a rank-4 point in a higher rank");
  const int kk = k + 1;
  RVector out(param_count(kk));
  out.head(k) = p.theta().head(k);
  out[k] = fill;
  // Off-diagonal blocks of the first k columns keep their order.
  const int offdiag = param_count(k) - k;
  out.segment(kk, offdiag) = p.theta().tail(offdiag);
  out.tail(2 * (kQubitPairDim - 1 - k)).setConstant(fill);
  return out;
}

nlohmann::json to_json(const RankKParams& p) {
  return {{"k", p.k()}, {"theta", std::vector<double>(p.theta().data(), p.theta().data() + p.size())}};
}

RankKParams rank_k_params_from_json(const nlohmann::json& j) {
  try {
    const int k = j.at("k").get<int>();
    const auto v = j.at("theta").get<std::vector<double>>();
    return RankKParams(k, Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size())));
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("malformed parameter JSON: ") + e.what());
  }
}

}  // namespace qtomo
