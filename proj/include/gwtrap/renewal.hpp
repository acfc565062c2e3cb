// SPDX-License-Identifier: Apache-2.0
//
// Scalar constants of the weight tails and a simulator for defective
// renewal sums Z = X_1 + ... + X_Y.
#pragma once

#include <cstdint>
#include <vector>

#include "gwtrap/laws.hpp"
#include "gwtrap/rng.hpp"

namespace gwtrap {

struct RootSolve {
  double value = 0.0;
  /// Signed residual of the defining equation at `value`.
  double residual = 0.0;
};

/// χ with ∫ y^χ dν = 1/m_h.
RootSolve solve_chi(const OffspringLaw& h, const BiasLaw& nu);

/// κ with E e^{κX} = 1/p.
RootSolve solve_kappa(const ScalarLaw& x, double p);

struct RenewalTailConstants {
  double kappa = 0.0;
  double tilted_mean = 0.0;  ///< E X e^{κX}
  double c2 = 0.0;
  double c3 = 0.0;
};

/// c₂ = (1-p)/(κ p E X e^{κX}) and c₃ = c·c₂/(1-p).
RenewalTailConstants renewal_constants_c2_c3(const ScalarLaw& x, double p, double c);

/// Law of the number of summands Y.
class CountLaw {
 public:
  enum class Kind { Geometric, ShiftedTail, AsymptoticGeometric, Constant };

  /// P(Y = k) = (1-p) p^k, k >= 0.
  static CountLaw geometric(double p);
  /// P(Y = k) = c p^k for k >= 1; the remaining mass sits at 0.
  static CountLaw shifted_tail(double p, double c);
  /// P(Y = k) ∝ (1 + 1/k) p^k for k >= 1, weight 1 at k = 0.
  static CountLaw asymptotic_geometric(double p);
  static CountLaw constant(std::uint64_t k);

  Kind kind() const { return kind_; }
  double ratio() const { return p_; }
  double pmf(std::uint64_t k) const;
  /// P(Y >= n).
  double survival(std::uint64_t n) const;
  std::uint64_t sample(RngStream& rng) const;

 private:
  CountLaw() = default;
  Kind kind_ = Kind::Geometric;
  double p_ = 0.0;
  double c_ = 0.0;
  double norm_ = 1.0;
  std::uint64_t k_ = 0;
  std::vector<double> cdf_;
};

struct SurvivalTable {
  std::vector<double> grid;
  /// Exceedance counts (crude) or the replicate count (tilted).
  std::vector<std::uint64_t> n_exceed;
  std::vector<double> survival;
  std::vector<double> std_error;
  std::uint64_t samples = 0;
};

enum class RenewalEstimator {
  /// Empirical survival of i.i.d. copies of Z, binomial standard errors.
  Crude,
  /// Exponentially tilted increments with likelihood-ratio weights; the
  /// standard error is the sample standard deviation over √n.
  Tilted,
};

/// P(Z >= u) on `grid`. Blocks of samples draw from stream_id(tag, block).
SurvivalTable simulate_defective_renewal(const ScalarLaw& x, const CountLaw& y,
                                         const std::vector<double>& grid, std::uint64_t n,
                                         std::uint64_t seed, RenewalEstimator estimator,
                                         unsigned workers = 0, std::uint16_t tag = 0x52);

/// Single-sample form for tests and the CLI.
double sample_defective_renewal(const ScalarLaw& x, const CountLaw& y, RngStream& rng);

struct BaseWeightConstant {
  double alpha = 0.0;
  double chi = 0.0;
  double log_moment = 0.0;  ///< ∫ y^χ log y dν
  double d2 = 0.0;
};

/// d₂ = α/(χ m_h ∫ y^χ log y dν).
BaseWeightConstant compute_d2(const OffspringLaw& h, const BiasLaw& nu);

struct D1Row {
  std::size_t k = 0;
  double mean = 0.0;    ///< E(ω(T)^χ 1{D(T) = k})
  double std_error = 0.0;
  std::uint64_t hits = 0;
};

struct D1Estimate {
  double d1 = 0.0;
  double std_error = 0.0;
  std::vector<D1Row> rows;
  /// Relative change between the last two rows was below 2%.
  bool stabilized = false;
  std::uint64_t samples = 0;
};

/// Monte Carlo over `samples` unconditioned trees, shared by every k.
D1Estimate estimate_d1(const OffspringLaw& h, const BiasLaw& nu,
                       const std::vector<std::size_t>& k_list, std::uint64_t samples,
                       std::uint64_t seed, unsigned workers = 0);

/// c₁ = 2^{-χ} d₁ Σ_{k>=1} h_k k^{1-χ}.
double compute_c1(double d1, const OffspringLaw& h, double chi);

struct GeometricExponentialPair {
  std::uint64_t g = 0;
  double e = 0.0;
};

/// E exponential with rate log(1/p) and G = ⌊E⌋, so G is geometric(p).
GeometricExponentialPair couple_geometric_exponential(double p, RngStream& rng);

}  // namespace gwtrap
