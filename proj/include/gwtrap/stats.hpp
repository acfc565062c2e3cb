// SPDX-License-Identifier: Apache-2.0
//
// Estimators used by the experiments: survival tables, weighted line fits,
// Kolmogorov-Smirnov and chi-square tests, correlation.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gwtrap {

struct TailTable {
  std::vector<double> grid;
  std::vector<std::uint64_t> n_exceed;
  std::vector<double> survival;
  std::vector<double> std_error;
  std::uint64_t samples = 0;
};

/// P(X >= u) for each u in `grid`, over `total` draws of which `values`
/// lists the ones that may exceed grid points (others count as below).
TailTable survival_on_grid(std::vector<double> values, const std::vector<double>& grid,
                           std::uint64_t total);

/// `points` values log-spaced over [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t points);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Weighted residual sum of squares.
  double residual = 0.0;
  /// From the weights taken as inverse variances.
  double slope_std_error = 0.0;
  std::size_t points = 0;
};

/// Weighted least squares y = a + b x. Needs at least two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w);

/// WLS of log survival on log u over grid points inside [lo, hi], weights
/// (survival/stderr)^2. Unit weights when any standard error in the window
/// is zero. Throws for fewer than 3 usable points.
LineFit fit_power_law(const TailTable& t, double lo, double hi);

struct PrefactorFit {
  double constant = 0.0;
  /// Relative standard error of `constant`.
  double rel_std_error = 0.0;
  std::size_t points = 0;
};

/// C in survival ≈ C u^{slope} with the slope held fixed, same weights.
PrefactorFit fit_prefactor(const TailTable& t, double slope, double lo, double hi);

/// Largest [u, 10u] with at least `min_exceed` exceedances at its top end,
/// u a grid point; falls back to the lowest decade when none qualifies.
std::pair<double, double> default_fit_window(const TailTable& t, std::uint64_t min_exceed = 100);

/// sup_x |F_n(x) - F(x)|.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Kolmogorov survival Q(λ) = 2 Σ (-1)^{j-1} e^{-2 j² λ²}.
double kolmogorov_survival(double lambda);

/// Asymptotic p-value with the Stephens small-sample correction.
double ks_pvalue(double d, double n);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  std::size_t n = 0;
};

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
  std::size_t bins = 0;
};

/// Pearson chi-square goodness of fit of `counts` to `probabilities`.
/// Adjacent cells are pooled left to right until each expected count
/// reaches `min_expected`; a short remainder joins the last pooled cell.
ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& counts,
                               const std::vector<double>& probabilities, int fitted_parameters,
                               double min_expected = 5.0);

struct RateFit {
  double rate = 0.0;
  double rate_std_error = 0.0;
  double log_scale = 0.0;
  int iterations = 0;
};

/// Poisson maximum likelihood for counts[i] ~ Poisson(A e^{-rate·x[i]}).
/// Zero counts are allowed; throws when no two bins are occupied.
RateFit fit_exponential_rate(std::span<const double> x, std::span<const double> counts);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanEstimate mean_with_error(std::span<const double> x);

}  // namespace gwtrap
