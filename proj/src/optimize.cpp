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

#include "qtomo/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <vector>

namespace qtomo {

OptimResult nelder_mead(const Objective& f, RVector x0, const NelderMeadOptions& opts) {
  const auto n = x0.size();
  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;
  const double gamma = 0.75 - 0.5 / dn;
  const double delta = 1.0 - 1.0 / dn;

  std::vector<RVector> xs(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> fs(static_cast<std::size_t>(n + 1));
  const double step = opts.initial_step * std::max(x0.cwiseAbs().maxCoeff(), 1.0);
  for (Eigen::Index i = 0; i < n; ++i) xs[static_cast<std::size_t>(i + 1)][i] += step;
  int evals = 0;
  auto eval = [&](const RVector& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = eval(xs[i]);

  std::vector<std::size_t> order(xs.size());
  bool converged = false;
  while (evals < opts.max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fs[a] < fs[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    const double spread = fs[worst] - fs[best];
    double xspread = 0.0;
    for (const auto& x : xs) xspread = std::max(xspread, (x - xs[best]).cwiseAbs().maxCoeff());
    if (spread <= opts.f_tol * (std::abs(fs[best]) + 1.0) &&
        xspread <= opts.x_tol * (xs[best].cwiseAbs().maxCoeff() + 1.0)) {
      converged = true;
      break;
    }

    RVector centroid = RVector::Zero(n);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i != worst) centroid += xs[i];
    }
    centroid /= dn;

    const RVector xr = centroid + alpha * (centroid - xs[worst]);
    const double fr = eval(xr);
    if (fr < fs[best]) {
      const RVector xe = centroid + beta * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        xs[worst] = xe;
        fs[worst] = fe;
      } else {
        xs[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      xs[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    const RVector xc = outside ? RVector(centroid + gamma * (xr - centroid))
                               : RVector(centroid - gamma * (centroid - xs[worst]));
    const double fc = eval(xc);
    if (fc < (outside ? fr : fs[worst])) {
      xs[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i == best) continue;
      xs[i] = xs[best] + delta * (xs[i] - xs[best]);
      fs[i] = eval(xs[i]);
    }
  }
  const auto it = std::min_element(fs.begin(), fs.end());
  const auto ib = static_cast<std::size_t>(std::distance(fs.begin(), it));
  return {xs[ib], fs[ib], evals, converged};
}

OptimResult lbfgs(const ObjectiveWithGradient& fg, RVector x, const LbfgsOptions& opts) {
  const auto n = x.size();
  RVector g(n);
  double fx = fg(x, g);
  int evals = 1;
  std::deque<RVector> s_hist, y_hist;
  std::deque<double> rho_hist;
  bool converged = false;
  if (!std::isfinite(fx)) return {x, fx, evals, false};

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    if (g.cwiseAbs().maxCoeff() <= opts.g_tol * std::max(1.0, std::abs(fx))) {
      converged = true;
      break;
    }
    // Two-loop recursion.
    RVector q = g;
    std::vector<double> a(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      a[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= a[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, g.norm());
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(q);
      q += (a[i] - b) * s_hist[i];
    }
    RVector dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g / std::max(1.0, g.norm());
      slope = g.dot(dir);
    }

    double step = 1.0;
    RVector xn(n), gn(n);
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + step * dir;
      fn = fg(xn, gn);
      ++evals;
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No progress possible along the search direction at double precision.
      converged = s_hist.empty();
      if (converged) break;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    const RVector s = xn - x;
    const RVector y = gn - g;
    const double sy = s.dot(y);
    const double decrease = fx - fn;
    x = xn;
    g = gn;
    fx = fn;
    if (sy > 1e-16 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (decrease <= opts.f_tol * std::max(1.0, std::abs(fx)) && s.cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff())) {
      converged = true;
      break;
    }
  }
  return {x, fx, evals, converged};
}

}  // namespace qtomo
