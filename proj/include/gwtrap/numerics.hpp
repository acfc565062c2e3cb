// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

namespace gwtrap {

struct BisectionResult {
  double root = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Root of an increasing function on [lo, hi] with f(lo) <= 0 <= f(hi).
/// Runs `iterations` halvings, or fewer once the bracket stops shrinking.
BisectionResult bisect_increasing(const std::function<double(double)>& f, double lo,
                                  double hi, int iterations = 60);

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 50);

}  // namespace gwtrap
