// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gwtrap/error.hpp"
#include "gwtrap/numerics.hpp"
#include "gwtrap/parallel.hpp"
#include "gwtrap/sampler.hpp"

namespace gwtrap {

namespace {

void require_probability(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, std::string(who) + ": p must lie in (0, 1)");
  }
}

}  // namespace

RootSolve solve_chi(const OffspringLaw& h, const BiasLaw& nu) {
  const double m = h.mean();
  if (!(m > 0.0)) {
    throw Error(ErrorKind::NoSolution, "solve_chi: m_h = 0, ∫y^χ dν = 1/m_h has no solution");
  }
  const double target = 1.0 / m;
  auto f = [&](double c) { return nu.moment(c) - target; };
  const double hi = std::log(target) / std::log(nu.q()) + 1.0;
  const auto r = bisect_increasing(f, 0.0, hi);
  return {r.root, r.residual};
}

RootSolve solve_kappa(const ScalarLaw& x, double p) {
  require_probability(p, "solve_kappa");
  if (x.is_degenerate_zero()) {
    throw Error(ErrorKind::NoSolution, "solve_kappa: X is identically 0");
  }
  if (x.lower() < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "solve_kappa: X must be nonnegative");
  }
  const double target = 1.0 / p;
  auto f = [&](double k) { return x.mgf(k) - target; };
  double hi = 1.0;
  while (f(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > 1e12) throw Error(ErrorKind::NoSolution, "solve_kappa: no bracket found");
  }
  const auto r = bisect_increasing(f, 0.0, hi);
  return {r.root, r.residual};
}

RenewalTailConstants renewal_constants_c2_c3(const ScalarLaw& x, double p, double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "renewal constants: c must be > 0");
  RenewalTailConstants out;
  out.kappa = solve_kappa(x, p).value;
  out.tilted_mean = x.mgf_derivative(out.kappa);
  out.c2 = (1.0 - p) / (out.kappa * p * out.tilted_mean);
  out.c3 = c * out.c2 / (1.0 - p);
  return out;
}

// --- CountLaw ----------------------------------------------------------------

CountLaw CountLaw::geometric(double p) {
  require_probability(p, "CountLaw::geometric");
  CountLaw y;
  y.kind_ = Kind::Geometric;
  y.p_ = p;
  return y;
}

CountLaw CountLaw::shifted_tail(double p, double c) {
  require_probability(p, "CountLaw::shifted_tail");
  if (!(c > 0.0) || c * p / (1.0 - p) > 1.0) {
    throw Error(ErrorKind::InvalidArgument,
                "CountLaw::shifted_tail: need 0 < c and c p/(1-p) <= 1");
  }
  CountLaw y;
  y.kind_ = Kind::ShiftedTail;
  y.p_ = p;
  y.c_ = c;
  return y;
}

CountLaw CountLaw::asymptotic_geometric(double p) {
  require_probability(p, "CountLaw::asymptotic_geometric");
  CountLaw y;
  y.kind_ = Kind::AsymptoticGeometric;
  y.p_ = p;
  y.norm_ = 1.0 / (1.0 - p) - std::log1p(-p);
  double acc = 0.0;
  for (std::uint64_t k = 0;; ++k) {
    acc += y.pmf(k);
    y.cdf_.push_back(acc);
    if (1.0 - acc < 1e-17 || k > 100'000) break;
  }
  y.cdf_.back() = 1.0;
  return y;
}

CountLaw CountLaw::constant(std::uint64_t k) {
  CountLaw y;
  y.kind_ = Kind::Constant;
  y.k_ = k;
  return y;
}

double CountLaw::pmf(std::uint64_t k) const {
  const double kd = static_cast<double>(k);
  switch (kind_) {
    case Kind::Geometric: return (1.0 - p_) * std::pow(p_, kd);
    case Kind::ShiftedTail: return k == 0 ? 1.0 - c_ * p_ / (1.0 - p_) : c_ * std::pow(p_, kd);
    case Kind::AsymptoticGeometric:
      return (k == 0 ? 1.0 : (1.0 + 1.0 / kd) * std::pow(p_, kd)) / norm_;
    case Kind::Constant: return k == k_ ? 1.0 : 0.0;
  }
  return 0.0;
}

double CountLaw::survival(std::uint64_t n) const {
  if (n == 0) return 1.0;
  const double nd = static_cast<double>(n);
  switch (kind_) {
    case Kind::Geometric: return std::pow(p_, nd);
    case Kind::ShiftedTail: return c_ * std::pow(p_, nd) / (1.0 - p_);
    case Kind::AsymptoticGeometric: {
      // Σ_{k>=n} (1 + 1/k) p^k = p^n/(1-p) + Σ_{k>=n} p^k/k.
      const double lead = std::pow(p_, nd);
      if (lead == 0.0) return 0.0;
      double harmonic = 0.0;
      double term = lead;
      for (std::uint64_t k = n; term > 1e-18 * harmonic * static_cast<double>(k); ++k) {
        harmonic += term / static_cast<double>(k);
        term *= p_;
      }
      return (lead / (1.0 - p_) + harmonic) / norm_;
    }
    case Kind::Constant: return n <= k_ ? 1.0 : 0.0;
  }
  return 0.0;
}

std::uint64_t CountLaw::sample(RngStream& rng) const {
  switch (kind_) {
    case Kind::Geometric:
      return static_cast<std::uint64_t>(std::floor(rng.exponential() / -std::log(p_)));
    case Kind::ShiftedTail:
      if (rng.uniform() < pmf(0)) return 0;
      return 1 + static_cast<std::uint64_t>(std::floor(rng.exponential() / -std::log(p_)));
    case Kind::AsymptoticGeometric: {
      const double u = rng.uniform();
      return static_cast<std::uint64_t>(
          std::upper_bound(cdf_.begin(), cdf_.end() - 1, u) - cdf_.begin());
    }
    case Kind::Constant: return k_;
  }
  return 0;
}

// --- defective renewal simulation ---------------------------------------------

double sample_defective_renewal(const ScalarLaw& x, const CountLaw& y, RngStream& rng) {
  const std::uint64_t count = y.sample(rng);
  double z = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) z += x.sample(rng);
  return z;
}

SurvivalTable simulate_defective_renewal(const ScalarLaw& x, const CountLaw& y,
                                         const std::vector<double>& grid, std::uint64_t n,
                                         std::uint64_t seed, RenewalEstimator estimator,
                                         unsigned workers, std::uint16_t tag) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "simulate_defective_renewal: n = 0");
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw Error(ErrorKind::InvalidArgument, "simulate_defective_renewal: grid must be sorted");
  }
  constexpr std::uint64_t kBlock = 1 << 16;
  const std::size_t g = grid.size();
  SurvivalTable out;
  out.grid = grid;
  out.samples = n;
  out.n_exceed.assign(g, 0);
  out.survival.assign(g, 0.0);
  out.std_error.assign(g, 0.0);
  const double nd = static_cast<double>(n);

  if (estimator == RenewalEstimator::Crude) {
    auto blocks = map_blocks(n, kBlock, workers, [&](BlockRange r) {
      RngStream rng(seed, stream_id(tag, r.index));
      std::vector<std::uint64_t> hist(g + 1, 0);
      for (std::uint64_t i = r.begin; i < r.end; ++i) {
        const double z = sample_defective_renewal(x, y, rng);
        ++hist[std::upper_bound(grid.begin(), grid.end(), z) - grid.begin()];
      }
      return hist;
    });
    std::vector<std::uint64_t> hist(g + 1, 0);
    for (const auto& b : blocks) {
      for (std::size_t j = 0; j <= g; ++j) hist[j] += b[j];
    }
    // Samples in bin j satisfy grid[j-1] <= z < grid[j].
    std::uint64_t above = 0;
    for (std::size_t j = g; j-- > 0;) {
      above += hist[j + 1];
      out.n_exceed[j] = above;
      const double s = static_cast<double>(above) / nd;
      out.survival[j] = s;
      out.std_error[j] = std::sqrt(s * (1.0 - s) / nd);
    }
    return out;
  }

  if (y.kind() == CountLaw::Kind::Constant) {
    throw Error(ErrorKind::InvalidArgument,
                "simulate_defective_renewal: tilted estimator needs a geometric-type count law");
  }
  const double p = y.ratio();
  const double kappa = solve_kappa(x, p).value;
  const double log_p = std::log(p);
  struct Moments {
    std::vector<double> sum, sum_sq;
  };
  auto blocks = map_blocks(n, kBlock, workers, [&](BlockRange r) {
    RngStream rng(seed, stream_id(tag, r.index));
    Moments m{std::vector<double>(g, 0.0), std::vector<double>(g, 0.0)};
    for (std::uint64_t i = r.begin; i < r.end; ++i) {
      double s = 0.0;
      std::uint64_t steps = 0;
      for (std::size_t j = 0; j < g; ++j) {
        while (s < grid[j]) {
          s += x.sample_tilted(kappa, rng);
          ++steps;
        }
        const double tail = y.survival(steps);
        const double w = tail > 0.0
                             ? std::exp(std::log(tail) - static_cast<double>(steps) * log_p -
                                        kappa * s)
                             : 0.0;
        m.sum[j] += w;
        m.sum_sq[j] += w * w;
      }
    }
    return m;
  });
  std::vector<double> sum(g, 0.0), sum_sq(g, 0.0);
  for (const auto& b : blocks) {
    for (std::size_t j = 0; j < g; ++j) {
      sum[j] += b.sum[j];
      sum_sq[j] += b.sum_sq[j];
    }
  }
  for (std::size_t j = 0; j < g; ++j) {
    const double mean = sum[j] / nd;
    const double var = std::max(0.0, sum_sq[j] / nd - mean * mean);
    out.n_exceed[j] = n;
    out.survival[j] = mean;
    out.std_error[j] = std::sqrt(var / nd);
  }
  return out;
}

// --- tail constants -----------------------------------------------------------

BaseWeightConstant compute_d2(const OffspringLaw& h, const BiasLaw& nu) {
  BaseWeightConstant out;
  out.alpha = estimate_alpha(h).alpha;
  out.chi = solve_chi(h, nu).value;
  out.log_moment = nu.log_moment(out.chi);
  out.d2 = out.alpha / (out.chi * h.mean() * out.log_moment);
  return out;
}

D1Estimate estimate_d1(const OffspringLaw& h, const BiasLaw& nu,
                       const std::vector<std::size_t>& k_list, std::uint64_t samples,
                       std::uint64_t seed, unsigned workers) {
  if (k_list.empty() || !std::is_sorted(k_list.begin(), k_list.end())) {
    throw Error(ErrorKind::InvalidArgument, "estimate_d1: k_list must be nonempty and increasing");
  }
  if (samples == 0) throw Error(ErrorKind::InvalidArgument, "estimate_d1: samples = 0");
  const double chi = solve_chi(h, nu).value;
  const std::size_t kn = k_list.size();
  struct Acc {
    std::vector<double> sum, sum_sq;
    std::vector<std::uint64_t> hits;
  };
  auto blocks = map_blocks(samples, 4096, workers, [&](BlockRange r) {
    RngStream rng(seed, stream_id(0x44, r.index));
    Acc a{std::vector<double>(kn, 0.0), std::vector<double>(kn, 0.0),
          std::vector<std::uint64_t>(kn, 0)};
    for (std::uint64_t i = r.begin; i < r.end; ++i) {
      const auto t = sample_tree(h, nu, rng);
      const auto it = std::lower_bound(k_list.begin(), k_list.end(), t.depth());
      if (it == k_list.end() || *it != t.depth()) continue;
      const auto j = static_cast<std::size_t>(it - k_list.begin());
      const double v = std::pow(t.total_weight(), chi);
      a.sum[j] += v;
      a.sum_sq[j] += v * v;
      ++a.hits[j];
    }
    return a;
  });
  D1Estimate out;
  out.samples = samples;
  const double nd = static_cast<double>(samples);
  for (std::size_t j = 0; j < kn; ++j) {
    double s = 0.0, s2 = 0.0;
    std::uint64_t hits = 0;
    for (const auto& b : blocks) {
      s += b.sum[j];
      s2 += b.sum_sq[j];
      hits += b.hits[j];
    }
    const double mean = s / nd;
    out.rows.push_back({k_list[j], mean, std::sqrt(std::max(0.0, s2 / nd - mean * mean) / nd),
                        hits});
  }
  const double scale = 1.0 / (chi * h.mean() * nu.log_moment(chi));
  out.d1 = scale * out.rows.back().mean;
  out.std_error = scale * out.rows.back().std_error;
  if (kn >= 2) {
    const double a = out.rows[kn - 2].mean;
    const double b = out.rows[kn - 1].mean;
    out.stabilized = b > 0.0 && std::abs(b - a) / b < 0.02;
  }
  return out;
}

double compute_c1(double d1, const OffspringLaw& h, double chi) {
  if (!(d1 > 0.0)) throw Error(ErrorKind::InvalidArgument, "compute_c1: d1 must be > 0");
  double sum = 0.0;
  for (std::size_t k = 1; k <= h.max_offspring(); ++k) {
    sum += h.h(k) * std::pow(static_cast<double>(k), 1.0 - chi);
  }
  return std::pow(2.0, -chi) * d1 * sum;
}

GeometricExponentialPair couple_geometric_exponential(double p, RngStream& rng) {
  require_probability(p, "couple_geometric_exponential");
  const double e = rng.exponential() / -std::log(p);
  return {static_cast<std::uint64_t>(std::floor(e)), e};
}

}  // namespace gwtrap
