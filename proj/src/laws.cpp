// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/laws.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gwtrap/error.hpp"
#include "gwtrap/numerics.hpp"

namespace gwtrap {

// --- OffspringLaw ------------------------------------------------------------

OffspringLaw::OffspringLaw(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.empty()) throw Error(ErrorKind::InvalidArgument, "offspring pmf is empty");
  double sum = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorKind::InvalidArgument, "offspring pmf has a negative entry");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "offspring pmf does not sum to 1");
  }
  while (pmf_.size() > 1 && pmf_.back() == 0.0) pmf_.pop_back();
  mean_ = 0.0;
  for (std::size_t k = 1; k < pmf_.size(); ++k) mean_ += static_cast<double>(k) * pmf_[k];
  if (!(mean_ < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "offspring law is not subcritical (m_h >= 1)");
  }
  cdf_.resize(pmf_.size());
  std::partial_sum(pmf_.begin(), pmf_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

OffspringLaw OffspringLaw::truncated_geometric(double ratio, std::size_t max_k) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "geometric ratio must lie in (0, 1)");
  }
  std::vector<double> pmf(max_k + 1);
  double term = 1.0 - ratio;
  for (auto& p : pmf) {
    p = term;
    term *= ratio;
  }
  const double z = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  for (auto& p : pmf) p /= z;
  return OffspringLaw(std::move(pmf));
}

OffspringLaw OffspringLaw::two_point(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw Error(ErrorKind::InvalidArgument, "p must lie in [0, 1)");
  return OffspringLaw({1.0 - p, p});
}

double OffspringLaw::pgf(double s) const {
  double acc = 0.0;
  for (std::size_t k = pmf_.size(); k-- > 0;) acc = acc * s + pmf_[k];
  return acc;
}

double OffspringLaw::pgf_complement(double t) const {
  // Σ h_k (1 - (1 - t)^k), each term via expm1/log1p.
  const double l = std::log1p(-t);
  double acc = 0.0;
  for (std::size_t k = 1; k < pmf_.size(); ++k) {
    acc += pmf_[k] * -std::expm1(static_cast<double>(k) * l);
  }
  return acc;
}

std::size_t OffspringLaw::sample(RngStream& rng) const {
  const double u = rng.uniform();
  std::size_t k = 0;
  while (k + 1 < cdf_.size() && u >= cdf_[k]) ++k;
  return k;
}

// --- ScalarLaw ---------------------------------------------------------------

ScalarLaw ScalarLaw::point_mass(double x) { return point_mixture({x}, {1.0}); }

ScalarLaw ScalarLaw::point_mixture(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.empty() || atoms.size() != weights.size()) {
    throw Error(ErrorKind::InvalidArgument, "point mixture needs matching atoms and weights");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i]) || atoms[i] < 0.0) {
      throw Error(ErrorKind::InvalidArgument, "point mixture atoms must be finite and >= 0");
    }
    if (!(weights[i] > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "point mixture weights must be positive");
    }
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "point mixture weights must sum to 1");
  }
  ScalarLaw law;
  law.kind_ = Kind::PointMixture;
  law.lo_ = *std::min_element(atoms.begin(), atoms.end());
  law.hi_ = *std::max_element(atoms.begin(), atoms.end());
  law.cumulative_.resize(weights.size());
  std::partial_sum(weights.begin(), weights.end(), law.cumulative_.begin());
  law.cumulative_.back() = 1.0;
  law.atoms_ = std::move(atoms);
  law.weights_ = std::move(weights);
  return law;
}

ScalarLaw ScalarLaw::uniform(double a, double b) {
  if (!(std::isfinite(a) && std::isfinite(b) && a >= 0.0 && a < b)) {
    throw Error(ErrorKind::InvalidArgument, "uniform law needs 0 <= a < b < inf");
  }
  ScalarLaw law;
  law.kind_ = Kind::Uniform;
  law.lo_ = a;
  law.hi_ = b;
  return law;
}

ScalarLaw ScalarLaw::log_uniform(double a, double b) {
  if (!(std::isfinite(a) && std::isfinite(b) && a > 0.0 && a < b)) {
    throw Error(ErrorKind::InvalidArgument, "log-uniform law needs 0 < a < b < inf");
  }
  ScalarLaw law;
  law.kind_ = Kind::LogUniform;
  law.lo_ = a;
  law.hi_ = b;
  return law;
}

bool ScalarLaw::is_degenerate_zero() const {
  return kind_ == Kind::PointMixture && hi_ == 0.0;
}

std::string ScalarLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Uniform: os << "uniform[" << lo_ << ", " << hi_ << "]"; break;
    case Kind::LogUniform: os << "log_uniform[" << lo_ << ", " << hi_ << "]"; break;
    case Kind::PointMixture:
      os << "point_mixture{";
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        os << (i ? ", " : "") << atoms_[i] << ":" << weights_[i];
      }
      os << "}";
      break;
  }
  return os.str();
}

double ScalarLaw::sample(RngStream& rng) const {
  const double u = rng.uniform();
  switch (kind_) {
    case Kind::Uniform: return lo_ + (hi_ - lo_) * u;
    case Kind::LogUniform: return lo_ * std::exp(u * std::log(hi_ / lo_));
    case Kind::PointMixture: {
      std::size_t i = 0;
      while (i + 1 < cumulative_.size() && u >= cumulative_[i]) ++i;
      return atoms_[i];
    }
  }
  return lo_;
}

double ScalarLaw::cdf(double x) const {
  switch (kind_) {
    case Kind::Uniform: return std::clamp((x - lo_) / (hi_ - lo_), 0.0, 1.0);
    case Kind::LogUniform:
      if (x <= lo_) return 0.0;
      return std::clamp(std::log(x / lo_) / std::log(hi_ / lo_), 0.0, 1.0);
    case Kind::PointMixture: {
      double acc = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (atoms_[i] <= x) acc += weights_[i];
      }
      return std::min(acc, 1.0);
    }
  }
  return 0.0;
}

template <class F>
double ScalarLaw::integrate(F f) const {
  switch (kind_) {
    case Kind::Uniform:
      return adaptive_simpson(f, lo_, hi_, 1e-12) / (hi_ - lo_);
    case Kind::LogUniform: {
      const double a = std::log(lo_);
      const double b = std::log(hi_);
      return adaptive_simpson([&](double t) { return f(std::exp(t)); }, a, b, 1e-12) / (b - a);
    }
    case Kind::PointMixture: {
      double acc = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) acc += weights_[i] * f(atoms_[i]);
      return acc;
    }
  }
  return 0.0;
}

double ScalarLaw::mean() const {
  switch (kind_) {
    case Kind::Uniform: return 0.5 * (lo_ + hi_);
    case Kind::LogUniform: return (hi_ - lo_) / std::log(hi_ / lo_);
    case Kind::PointMixture: return integrate([](double x) { return x; });
  }
  return 0.0;
}

double ScalarLaw::power_moment(double c) const {
  if (!(lo_ > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "power moments need a positive support");
  }
  if (kind_ == Kind::Uniform) {
    if (std::abs(c + 1.0) < 1e-14) return std::log(hi_ / lo_) / (hi_ - lo_);
    return (std::pow(hi_, c + 1.0) - std::pow(lo_, c + 1.0)) / ((c + 1.0) * (hi_ - lo_));
  }
  return integrate([c](double y) { return std::pow(y, c); });
}

double ScalarLaw::power_log_moment(double c) const {
  if (!(lo_ > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "power moments need a positive support");
  }
  if (kind_ == Kind::Uniform && std::abs(c + 1.0) > 1e-14) {
    const double e = c + 1.0;
    auto antiderivative = [e](double y) {
      return std::pow(y, e) * (std::log(y) / e - 1.0 / (e * e));
    };
    return (antiderivative(hi_) - antiderivative(lo_)) / (hi_ - lo_);
  }
  return integrate([c](double y) { return std::pow(y, c) * std::log(y); });
}

double ScalarLaw::mgf(double theta) const {
  if (kind_ == Kind::Uniform) {
    const double w = theta * (hi_ - lo_);
    if (w == 0.0) return 1.0;
    return std::exp(theta * lo_) * std::expm1(w) / w;
  }
  return integrate([theta](double x) { return std::exp(theta * x); });
}

double ScalarLaw::mgf_derivative(double theta) const {
  if (kind_ == Kind::Uniform && theta != 0.0) {
    auto antiderivative = [theta](double x) {
      return std::exp(theta * x) * (x / theta - 1.0 / (theta * theta));
    };
    return (antiderivative(hi_) - antiderivative(lo_)) / (hi_ - lo_);
  }
  return integrate([theta](double x) { return x * std::exp(theta * x); });
}

double ScalarLaw::sample_tilted(double theta, RngStream& rng) const {
  switch (kind_) {
    case Kind::Uniform: {
      const double u = rng.uniform();
      const double w = theta * (hi_ - lo_);
      if (std::abs(w) < 1e-300) return lo_ + (hi_ - lo_) * u;
      return lo_ + std::log1p(u * std::expm1(w)) / theta;
    }
    case Kind::PointMixture: {
      double z = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) z += weights_[i] * std::exp(theta * atoms_[i]);
      double u = rng.uniform() * z;
      for (std::size_t i = 0; i + 1 < atoms_.size(); ++i) {
        u -= weights_[i] * std::exp(theta * atoms_[i]);
        if (u < 0.0) return atoms_[i];
      }
      return atoms_.back();
    }
    case Kind::LogUniform: break;
  }
  throw Error(ErrorKind::InvalidArgument, "tilted sampling is not implemented for " + describe());
}

ScalarLaw ScalarLaw::log_image() const {
  switch (kind_) {
    case Kind::LogUniform: return uniform(std::log(lo_), std::log(hi_));
    case Kind::PointMixture: {
      std::vector<double> logs;
      for (double a : atoms_) {
        if (!(a >= 1.0)) {
          throw Error(ErrorKind::InvalidArgument, "log image needs atoms >= 1");
        }
        logs.push_back(std::log(a));
      }
      return point_mixture(std::move(logs), weights_);
    }
    case Kind::Uniform: break;
  }
  throw Error(ErrorKind::InvalidArgument, "log image of " + describe() + " is not a supported law");
}

// --- BiasLaw -----------------------------------------------------------------

bool log_ratio_is_rational(double a, double b, long max_denominator) {
  const double x = std::log(a) / std::log(b);
  // Continued-fraction convergents of x.
  double r = x;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int i = 0; i < 64; ++i) {
    const double fl = std::floor(r);
    const long a_i = static_cast<long>(fl);
    const long p2 = a_i * p1 + p0;
    const long q2 = a_i * q1 + q0;
    if (q2 > max_denominator) return false;
    if (std::abs(x - static_cast<double>(p2) / static_cast<double>(q2)) < 1e-9) return true;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = r - fl;
    if (frac < 1e-15) return true;
    r = 1.0 / frac;
  }
  return false;
}

BiasLaw::BiasLaw(ScalarLaw law, bool declared_non_lattice)
    : law_(std::move(law)), non_lattice_(declared_non_lattice) {
  if (!(law_.lower() > 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "bias law support must lie in (1, inf)");
  }
  if (law_.kind() == ScalarLaw::Kind::PointMixture) {
    const auto atoms = law_.atoms();
    bool lattice = true;
    for (std::size_t i = 1; i < atoms.size() && lattice; ++i) {
      lattice = log_ratio_is_rational(atoms[i], atoms[0]);
    }
    if (lattice && non_lattice_) {
      warning_ = "bias law " + law_.describe() +
                 " declared non-lattice but its log-atoms look commensurate";
    }
  }
}

}  // namespace gwtrap
