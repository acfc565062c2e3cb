// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/sampler.hpp"

#include <cmath>
#include <sstream>

#include "gwtrap/error.hpp"

namespace gwtrap {

WeightedTree sample_tree(const OffspringLaw& h, const BiasLaw& nu, RngStream& rng,
                         const SamplerCaps& caps) {
  TreeBuilder builder;
  std::vector<std::uint32_t> depth{0};
  for (std::uint32_t head = 0; head < builder.size(); ++head) {
    const std::size_t k = h.sample(rng);
    if (k == 0) continue;
    if (builder.size() + k > caps.node_cap) {
      throw Error(ErrorKind::CapExceeded,
                  "sample_tree: node cap " + std::to_string(caps.node_cap) + " exceeded");
    }
    if (depth[head] + 1 > caps.depth_cap) {
      throw Error(ErrorKind::CapExceeded,
                  "sample_tree: depth cap " + std::to_string(caps.depth_cap) + " exceeded");
    }
    for (std::size_t j = 0; j < k; ++j) {
      builder.add_child(VertexId{head}, nu.sample(rng));
      depth.push_back(depth[head] + 1);
    }
  }
  return builder.finish(caps.depth_cap);
}

ConditionedSample sample_where(const OffspringLaw& h, const BiasLaw& nu, RngStream& rng,
                               const std::function<bool(const WeightedTree&)>& accept,
                               std::uint64_t max_attempts, const SamplerCaps& caps) {
  for (std::uint64_t attempt = 1; attempt <= max_attempts; ++attempt) {
    WeightedTree t = sample_tree(h, nu, rng, caps);
    if (accept(t)) return {std::move(t), attempt};
  }
  throw Error(ErrorKind::BudgetExhausted,
              "rejection sampling: no acceptance in " + std::to_string(max_attempts) +
                  " attempts");
}

ConditionedSample sample_conditioned(const OffspringLaw& h, const BiasLaw& nu, double u,
                                     RngStream& rng, std::uint64_t max_attempts,
                                     const SamplerCaps& caps) {
  if (!(u >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sample_conditioned: u must be >= 0");
  try {
    return sample_where(
        h, nu, rng, [u](const WeightedTree& t) { return t.total_weight() > u; },
        max_attempts, caps);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BudgetExhausted) throw;
    std::ostringstream os;
    os << "sample_conditioned: no tree with weight > " << u << " in " << max_attempts
       << " attempts; lower u or raise the budget";
    throw Error(ErrorKind::BudgetExhausted, os.str());
  }
}

ConditionedSample sample_nontrivial(const OffspringLaw& h, const BiasLaw& nu,
                                    RngStream& rng, std::uint64_t max_attempts,
                                    const SamplerCaps& caps) {
  if (h.h(0) >= 1.0) {
    throw Error(ErrorKind::InvalidArgument, "sample_nontrivial: h_0 = 1, every tree is trivial");
  }
  return sample_where(
      h, nu, rng, [](const WeightedTree& t) { return t.edge_count() >= 1; }, max_attempts,
      caps);
}

double depth_cdf(const OffspringLaw& h, std::size_t n) {
  return 1.0 - depth_survival(h, n);
}

double depth_survival(const OffspringLaw& h, std::size_t n) {
  double t = 1.0 - h.h(0);
  for (std::size_t i = 0; i < n; ++i) t = h.pgf_complement(t);
  return t;
}

double depth_pmf(const OffspringLaw& h, std::size_t n) {
  if (n == 0) return h.h(0);
  double prev = 1.0 - h.h(0);
  for (std::size_t i = 1; i < n; ++i) prev = h.pgf_complement(prev);
  return prev - h.pgf_complement(prev);
}

AlphaEstimate estimate_alpha(const OffspringLaw& h, std::size_t n_max, double tolerance) {
  const double m = h.mean();
  if (!(m > 0.0)) {
    throw Error(ErrorKind::NoSolution, "estimate_alpha: m_h = 0, depth is identically 0");
  }
  double t_prev = 1.0 - h.h(0);  // P(D > 0)
  double scale = 1.0;            // m^{-n}
  double r_prev = std::nan("");
  double r = std::nan("");
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double t = h.pgf_complement(t_prev);
    scale /= m;
    r = scale * (t_prev - t);
    t_prev = t;
    if (n >= 2) {
      const double agreement = std::abs(r - r_prev) / std::abs(r);
      if (agreement < tolerance) return {r, n, agreement};
    }
    r_prev = r;
  }
  std::ostringstream os;
  os.precision(17);
  os << "estimate_alpha: no convergence within n_max = " << n_max << "; last iterates "
     << r_prev << ", " << r;
  throw Error(ErrorKind::NotConverged, os.str());
}

}  // namespace gwtrap
