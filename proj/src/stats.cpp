// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "gwtrap/error.hpp"

namespace gwtrap {

TailTable survival_on_grid(std::vector<double> values, const std::vector<double>& grid,
                           std::uint64_t total) {
  if (total == 0 || values.size() > total) {
    throw Error(ErrorKind::InvalidArgument, "survival_on_grid: bad sample total");
  }
  std::sort(values.begin(), values.end());
  TailTable t;
  t.grid = grid;
  t.samples = total;
  const double n = static_cast<double>(total);
  for (double u : grid) {
    const auto above = static_cast<std::uint64_t>(
        values.end() - std::lower_bound(values.begin(), values.end(), u));
    const double s = static_cast<double>(above) / n;
    t.n_exceed.push_back(above);
    t.survival.push_back(s);
    t.std_error.push_back(std::sqrt(s * (1.0 - s) / n));
  }
  return t;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi > lo) || points < 2) {
    throw Error(ErrorKind::InvalidArgument, "log_grid: need 0 < lo < hi and >= 2 points");
  }
  std::vector<double> g(points);
  const double a = std::log(lo);
  const double step = (std::log(hi) - a) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = std::exp(a + step * static_cast<double>(i));
  g.front() = lo;
  g.back() = hi;
  return g;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) {
    throw Error(ErrorKind::InvalidArgument, "fit_line: length mismatch");
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  if (!(sw > 0.0)) throw Error(ErrorKind::InvalidArgument, "fit_line: empty window");
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::InvalidArgument, "fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.residual += w[i] * r * r;
  }
  f.slope_std_error = std::sqrt(1.0 / sxx);
  f.points = x.size();
  return f;
}

namespace {

struct LogPoints {
  std::vector<double> x, y, w;
};

LogPoints window_points(const TailTable& t, double lo, double hi) {
  LogPoints p;
  bool unit = false;
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const double u = t.grid[i];
    if (u < lo || u > hi || !(t.survival[i] > 0.0)) continue;
    p.x.push_back(std::log(u));
    p.y.push_back(std::log(t.survival[i]));
    const double rel = t.std_error[i] / t.survival[i];
    if (!(rel > 0.0) || !std::isfinite(rel)) unit = true;
    p.w.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 1.0);
  }
  if (unit) std::fill(p.w.begin(), p.w.end(), 1.0);
  return p;
}

}  // namespace

LineFit fit_power_law(const TailTable& t, double lo, double hi) {
  const auto p = window_points(t, lo, hi);
  if (p.x.size() < 3) {
    throw Error(ErrorKind::InvalidArgument,
                "fit_power_law: fewer than 3 positive survival points in the window");
  }
  return fit_line(p.x, p.y, p.w);
}

PrefactorFit fit_prefactor(const TailTable& t, double slope, double lo, double hi) {
  const auto p = window_points(t, lo, hi);
  if (p.x.empty()) throw Error(ErrorKind::InvalidArgument, "fit_prefactor: empty window");
  double sw = 0.0, s = 0.0;
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    sw += p.w[i];
    s += p.w[i] * (p.y[i] - slope * p.x[i]);
  }
  return {std::exp(s / sw), std::sqrt(1.0 / sw), p.x.size()};
}

std::pair<double, double> default_fit_window(const TailTable& t, std::uint64_t min_exceed) {
  if (t.grid.empty()) throw Error(ErrorKind::InvalidArgument, "default_fit_window: empty grid");
  for (std::size_t i = t.grid.size(); i-- > 0;) {
    const double lo = t.grid[i];
    std::size_t top = i;
    while (top + 1 < t.grid.size() && t.grid[top + 1] <= 10.0 * lo * (1.0 + 1e-12)) ++top;
    if (t.grid[top] < 10.0 * lo * (1.0 - 1e-9)) continue;
    if (t.n_exceed[top] >= min_exceed) return {lo, t.grid[top]};
  }
  return {t.grid.front(), 10.0 * t.grid.front()};
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return std::min(d, 1.0);
}

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_pvalue(double d, double n) {
  const double rn = std::sqrt(n);
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf) {
  KsResult r;
  r.n = samples.size();
  r.statistic = ks_statistic(std::move(samples), cdf);
  r.p_value = ks_pvalue(r.statistic, static_cast<double>(r.n));
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorKind::InvalidArgument, "ks_two_sample: empty sample");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // Step both empirical CDFs past each distinct value so ties are handled.
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  r.n = a.size() + b.size();
  r.p_value = ks_pvalue(d, na * nb / (na + nb));
  return r;
}

ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& counts,
                               const std::vector<double>& probabilities, int fitted_parameters,
                               double min_expected) {
  if (counts.size() != probabilities.size() || counts.empty()) {
    throw Error(ErrorKind::InvalidArgument, "chi_square_gof: length mismatch");
  }
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(),
                                                       std::uint64_t{0}));
  std::vector<double> obs, expd;
  double o = 0.0, e = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    o += static_cast<double>(counts[k]);
    e += n * probabilities[k];
    if (e >= min_expected) {
      obs.push_back(o);
      expd.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (expd.empty()) {
      obs.push_back(o);
      expd.push_back(e);
    } else {
      obs.back() += o;
      expd.back() += e;
    }
  }
  ChiSquareResult r;
  r.bins = obs.size();
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const double diff = obs[k] - expd[k];
    r.statistic += diff * diff / expd[k];
  }
  r.dof = static_cast<int>(obs.size()) - 1 - fitted_parameters;
  if (r.dof < 1) {
    throw Error(ErrorKind::InvalidArgument, "chi_square_gof: not enough cells after pooling");
  }
  r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

RateFit fit_exponential_rate(std::span<const double> x, std::span<const double> counts) {
  if (x.size() != counts.size()) {
    throw Error(ErrorKind::InvalidArgument, "fit_exponential_rate: length mismatch");
  }
  std::vector<double> ox, oy, ow;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (counts[i] > 0.0) {
      ox.push_back(x[i]);
      oy.push_back(std::log(counts[i]));
      ow.push_back(counts[i]);
    }
  }
  if (ox.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "fit_exponential_rate: fewer than 2 occupied bins");
  }
  const auto start = fit_line(ox, oy, ow);
  RateFit f;
  double a = start.intercept;
  double s = -start.slope;
  // Newton on the log-likelihood Σ c_i (a - s x_i) - e^{a - s x_i}.
  double iaa = 0.0, ias = 0.0, iss = 0.0;
  for (f.iterations = 1; f.iterations <= 100; ++f.iterations) {
    double ga = 0.0, gs = 0.0;
    iaa = ias = iss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double mu = std::exp(a - s * x[i]);
      ga += counts[i] - mu;
      gs += -x[i] * (counts[i] - mu);
      iaa += mu;
      ias += -x[i] * mu;
      iss += x[i] * x[i] * mu;
    }
    const double det = iaa * iss - ias * ias;
    const double da = (iss * ga - ias * gs) / det;
    const double ds = (iaa * gs - ias * ga) / det;
    a += da;
    s += ds;
    if (std::abs(ds) < 1e-13 * std::max(1.0, std::abs(s)) && std::abs(da) < 1e-13) break;
  }
  f.rate = s;
  f.log_scale = a;
  f.rate_std_error = std::sqrt(iaa / (iaa * iss - ias * ias));
  return f;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "pearson_correlation: need paired samples");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0 && syy > 0.0)) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

MeanEstimate mean_with_error(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorKind::InvalidArgument, "mean_with_error: no samples");
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {m, std::sqrt(var / n)};
}

}  // namespace gwtrap
