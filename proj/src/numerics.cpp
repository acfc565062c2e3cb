// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/numerics.hpp"

#include <cmath>

#include "gwtrap/error.hpp"

namespace gwtrap {

BisectionResult bisect_increasing(const std::function<double(double)>& f, double lo,
                                  double hi, int iterations) {
  if (!(lo <= hi)) throw Error(ErrorKind::InvalidArgument, "bisection: empty bracket");
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo > 0.0 || fhi < 0.0) {
    throw Error(ErrorKind::NoSolution, "bisection: bracket does not enclose a root");
  }
  BisectionResult r;
  for (; r.iterations < iterations; ++r.iterations) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double rlo = std::abs(f(lo));
  const double rhi = std::abs(f(hi));
  r.root = rlo <= rhi ? lo : hi;
  r.residual = std::min(rlo, rhi);
  return r;
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace gwtrap
