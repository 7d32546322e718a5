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

#include <functional>

#include "qtomo/common.hpp"

namespace qtomo {

/// Objective to be minimized.
using Objective = std::function<double(const RVector&)>;
/// Returns the objective value and writes the gradient.
using ObjectiveWithGradient = std::function<double(const RVector&, RVector&)>;

struct OptimResult {
  RVector x;
  double f = 0.0;
  int n_evals = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_evals = 5000;
  /// Stop when the simplex value spread drops below f_tol * (|f_best| + 1).
  double f_tol = 1e-8;
  /// ... and every vertex lies within x_tol * (|x_best|_inf + 1) of the best.
  double x_tol = 1e-6;
  /// Initial edge length relative to max(|x0|_inf, 1).
  double initial_step = 0.1;
};

/// Nelder-Mead with dimension-adaptive coefficients (Gao & Han 2012).
OptimResult nelder_mead(const Objective& f, RVector x0, const NelderMeadOptions& opts = {});

struct LbfgsOptions {
  int max_iters = 2000;
  int memory = 10;
  /// Converged when |g|_inf <= g_tol * max(1, |f|).
  double g_tol = 1e-10;
  /// ... or the relative decrease over one iteration is below f_tol.
  double f_tol = 1e-13;
};

/// Limited-memory BFGS with an Armijo backtracking line search.
OptimResult lbfgs(const ObjectiveWithGradient& fg, RVector x0, const LbfgsOptions& opts = {});

}  // namespace qtomo
