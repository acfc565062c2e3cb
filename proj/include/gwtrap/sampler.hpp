// SPDX-License-Identifier: Apache-2.0
//
// Weighted Galton-Watson trees: unconditioned, conditioned on high total
// weight (by rejection) and conditioned to be non-trivial; plus the depth law
// by generating-function iteration.
#pragma once

#include <cstdint>
#include <functional>

#include "gwtrap/laws.hpp"
#include "gwtrap/rng.hpp"
#include "gwtrap/tree.hpp"

namespace gwtrap {

struct SamplerCaps {
  std::size_t node_cap = 10'000'000;
  std::size_t depth_cap = TreeBuilder::kDefaultDepthCap;
};

/// Breadth-first realization: offspring counts i.i.d. h, biases i.i.d. ν.
WeightedTree sample_tree(const OffspringLaw& h, const BiasLaw& nu, RngStream& rng,
                         const SamplerCaps& caps = {});

struct ConditionedSample {
  WeightedTree tree;
  std::uint64_t attempts = 0;
};

/// Rejection sampling until `accept(tree)`; throws BudgetExhausted.
ConditionedSample sample_where(const OffspringLaw& h, const BiasLaw& nu, RngStream& rng,
                               const std::function<bool(const WeightedTree&)>& accept,
                               std::uint64_t max_attempts, const SamplerCaps& caps = {});

/// P_{h,ν}(· | ω(T) > u).
ConditionedSample sample_conditioned(const OffspringLaw& h, const BiasLaw& nu, double u,
                                     RngStream& rng, std::uint64_t max_attempts,
                                     const SamplerCaps& caps = {});

/// P*_{h,ν}: conditioned on at least one edge.
ConditionedSample sample_nontrivial(const OffspringLaw& h, const BiasLaw& nu,
                                    RngStream& rng,
                                    std::uint64_t max_attempts = UINT64_MAX,
                                    const SamplerCaps& caps = {});

/// g_n = P(D(T) <= n): g_0 = h_0, g_{n+1} = f(g_n).
double depth_cdf(const OffspringLaw& h, std::size_t n);
/// 1 - g_n, iterated in complement form so it keeps full relative precision.
double depth_survival(const OffspringLaw& h, std::size_t n);
/// P(D(T) = n).
double depth_pmf(const OffspringLaw& h, std::size_t n);

struct AlphaEstimate {
  double alpha = 0.0;
  std::size_t n = 0;
  /// |r_n - r_{n-1}| / r_n at the returned n.
  double agreement = 0.0;
};

/// α = lim m_h^{-n} P(D(T) = n), accepted once successive ratios agree to
/// relative `tolerance`.
AlphaEstimate estimate_alpha(const OffspringLaw& h, std::size_t n_max = 200,
                             double tolerance = 1e-8);

}  // namespace gwtrap
