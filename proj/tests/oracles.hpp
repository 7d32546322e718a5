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

// Test-only reference computations. Nothing here calls into the code paths
// it is used to check: random states come from std::mt19937_64, Poisson
// expectations are summed outcome by outcome, derivatives are taken by
// Richardson-extrapolated central differences.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace qtomo::oracle {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline CMat random_ginibre(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat a(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a(i, j) = cd(n(rng), n(rng));
  return a;
}

/// Random density matrix A A^dagger / Tr with A of shape dim x rank.
inline CMat random_density(std::mt19937_64& rng, int dim, int rank) {
  const CMat a = random_ginibre(rng, dim, rank);
  CMat g = a * a.adjoint();
  return g / g.trace();
}

/// Haar-ish unitary from the QR of a Ginibre matrix with phase correction.
inline CMat random_unitary(std::mt19937_64& rng, int dim) {
  const CMat a = random_ginibre(rng, dim, dim);
  Eigen::HouseholderQR<CMat> qr(a);
  CMat q = qr.householderQ();
  const CMat r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) q.col(j) *= std::polar(1.0, std::arg(r(j, j)));
  return q;
}

inline CVec random_ket(std::mt19937_64& rng, int dim) {
  CVec v = random_ginibre(rng, dim, 1);
  return v / v.norm();
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline double poisson_pmf(long n, double mean) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(n) * std::log(mean) - mean - std::lgamma(static_cast<double>(n) + 1.0));
}

/// Largest n worth summing: beyond it the pmf is below cutoff and decreasing.
inline long poisson_cutoff(double mean, double cutoff = 1e-16) {
  long n = static_cast<long>(std::ceil(mean));
  while (poisson_pmf(n, mean) >= cutoff) ++n;
  return n;
}

/// Fisher matrix of independent Poisson counts by explicit outcome sums:
/// J_ij = sum_n P(n) s_i(n) s_j(n), s_i(n) = sum_nu (n_nu / M_nu - 1) dM_nu/dtheta_i.
/// Only two projectors are supported (the sum runs over a 2-D grid).
inline RMat brute_force_fisher(const RVec& M, const RMat& dM) {
  const long n0 = poisson_cutoff(M[0]);
  const long n1 = poisson_cutoff(M[1]);
  const auto k = dM.cols();
  RMat J = RMat::Zero(k, k);
  for (long a = 0; a <= n0; ++a) {
    const double pa = poisson_pmf(a, M[0]);
    for (long b = 0; b <= n1; ++b) {
      const double w = pa * poisson_pmf(b, M[1]);
      const RVec s = (static_cast<double>(a) / M[0] - 1.0) * dM.row(0).transpose() +
                     (static_cast<double>(b) / M[1] - 1.0) * dM.row(1).transpose();
      J += w * s * s.transpose();
    }
  }
  return J;
}

/// Kullback-Leibler divergence of two Poisson laws by outcome sum up to n_max.
inline double brute_force_poisson_kl(double m0, double m, long n_max) {
  double d = 0.0;
  for (long n = 0; n <= n_max; ++n) {
    const double p0 = poisson_pmf(n, m0);
    if (p0 == 0.0) continue;
    d += p0 * (std::log(p0) - std::log(poisson_pmf(n, m)));
  }
  return d;
}

/// d f / d x_i by a Richardson-extrapolated central difference.
template <class F>
auto richardson(const F& f, const RVec& x, int i, double h) {
  auto eval = [&](double s) {
    RVec y = x;
    y[i] += s;
    return f(y);
  };
  using R = decltype(f(x));
  const R d1 = (eval(h) - eval(-h)) / (2.0 * h);
  const R d2 = (eval(h / 2) - eval(-h / 2)) / h;
  return R((4.0 * d2 - d1) / 3.0);
}

template <class F>
double richardson_scalar(const F& f, const RVec& x, int i, double h) {
  auto eval = [&](double s) {
    RVec y = x;
    y[i] += s;
    return f(y);
  };
  const double d1 = (eval(h) - eval(-h)) / (2.0 * h);
  const double d2 = (eval(h / 2) - eval(-h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

inline double binary_entropy_bits(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// Werner state p |Phi+><Phi+| + (1 - p) I/4 spectrum: (1+3p)/4 once, (1-p)/4 three times.
inline double werner_entropy_bits(double p) {
  const double a = (1.0 + 3.0 * p) / 4.0;
  const double b = (1.0 - p) / 4.0;
  return -a * std::log2(a) - 3.0 * b * std::log2(b);
}

/// Dense lower-trapezoidal factor built entry by entry from the
/// diagonal-first, column-major (Re, Im) layout.
inline CMat factor_reference(int k, const RVec& theta) {
  CMat t = CMat::Zero(4, k);
  int idx = k;
  for (int j = 0; j < k; ++j) t(j, j) = theta[j];
  for (int j = 0; j < k; ++j)
    for (int r = j + 1; r < 4; ++r) {
      t(r, j) = cd(theta[idx], theta[idx + 1]);
      idx += 2;
    }
  return t;
}

/// G_ab = sum_c T_ac conj(T_bc), written out.
inline CMat gram_reference(const CMat& t) {
  CMat g = CMat::Zero(t.rows(), t.rows());
  for (int a = 0; a < t.rows(); ++a)
    for (int b = 0; b < t.rows(); ++b)
      for (int c = 0; c < t.cols(); ++c) g(a, b) += t(a, c) * std::conj(t(b, c));
  return g;
}

}  // namespace qtomo::oracle
