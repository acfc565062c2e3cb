// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwtrap/rng.hpp"

namespace gwtrap {

/// Offspring distribution with finite support h_0..h_K.
class OffspringLaw {
 public:
  /// Requires nonnegative entries summing to 1 within 1e-12 and mean < 1.
  explicit OffspringLaw(std::vector<double> pmf);

  /// h_k ∝ (1 - r) r^k for k = 0..max_k, renormalized.
  static OffspringLaw truncated_geometric(double ratio, std::size_t max_k);
  /// h = (1 - p, p): every vertex has at most one child.
  static OffspringLaw two_point(double p);

  std::span<const double> pmf() const { return pmf_; }
  double h(std::size_t k) const { return k < pmf_.size() ? pmf_[k] : 0.0; }
  std::size_t max_offspring() const { return pmf_.size() - 1; }
  double mean() const { return mean_; }

  /// f(s) = Σ h_k s^k.
  double pgf(double s) const;
  /// 1 - f(1 - t), accurate for small t.
  double pgf_complement(double t) const;

  std::size_t sample(RngStream& rng) const;

 private:
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
};

/// A law on [0, ∞): finite point mixture, uniform or log-uniform on [a, b].
class ScalarLaw {
 public:
  enum class Kind { PointMixture, Uniform, LogUniform };

  static ScalarLaw point_mass(double x);
  static ScalarLaw point_mixture(std::vector<double> atoms, std::vector<double> weights);
  static ScalarLaw uniform(double a, double b);
  static ScalarLaw log_uniform(double a, double b);

  Kind kind() const { return kind_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  std::span<const double> atoms() const { return atoms_; }
  std::span<const double> weights() const { return weights_; }
  bool is_continuous() const { return kind_ != Kind::PointMixture; }
  bool is_degenerate_zero() const;
  std::string describe() const;

  double sample(RngStream& rng) const;
  double cdf(double x) const;
  double mean() const;

  /// E X^c for X > 0.
  double power_moment(double c) const;
  /// E X^c log X for X > 0.
  double power_log_moment(double c) const;
  /// E e^{θX}.
  double mgf(double theta) const;
  /// E X e^{θX}.
  double mgf_derivative(double theta) const;

  /// Sample from the exponentially tilted law, density ∝ e^{θx} dμ(x).
  /// Point mixtures and uniform laws only.
  double sample_tilted(double theta, RngStream& rng) const;

  /// Image under log; point mixtures and log-uniform laws only.
  ScalarLaw log_image() const;

 private:
  ScalarLaw() = default;
  /// Generic expectation by adaptive Simpson over the support.
  template <class F>
  double integrate(F f) const;

  Kind kind_ = Kind::PointMixture;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Edge-bias law ν supported in [q, Q] with q > 1, plus the caller's
/// declaration of whether log ν is non-lattice.
class BiasLaw {
 public:
  BiasLaw(ScalarLaw law, bool declared_non_lattice);

  static BiasLaw uniform(double a, double b) { return {ScalarLaw::uniform(a, b), true}; }
  static BiasLaw log_uniform(double a, double b) {
    return {ScalarLaw::log_uniform(a, b), true};
  }
  static BiasLaw point_mass(double beta) { return {ScalarLaw::point_mass(beta), false}; }

  const ScalarLaw& law() const { return law_; }
  double q() const { return law_.lower(); }
  double Q() const { return law_.upper(); }
  bool declared_non_lattice() const { return non_lattice_; }
  /// Set when the declaration contradicts a check on point-mass atoms
  /// (pairwise log-ratios close to small-denominator rationals).
  const std::optional<std::string>& lattice_warning() const { return warning_; }

  double sample(RngStream& rng) const { return law_.sample(rng); }
  /// ∫ y^c dν.
  double moment(double c) const { return law_.power_moment(c); }
  /// ∫ y^c log y dν.
  double log_moment(double c) const { return law_.power_log_moment(c); }

 private:
  ScalarLaw law_;
  bool non_lattice_;
  std::optional<std::string> warning_;
};

/// True when log(a)/log(b) is within 1e-9 of p/q with q <= max_denominator.
bool log_ratio_is_rational(double a, double b, long max_denominator = 1000);

}  // namespace gwtrap
