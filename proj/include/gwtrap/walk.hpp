// SPDX-License-Identifier: Apache-2.0
//
// The biased walk on a weighted tree: from a non-root vertex with child
// biases β_1..β_k the walk steps to the parent with probability 1/(1+Σβ)
// and to child j with probability β_j/(1+Σβ); from the root it steps to
// child j with probability β_j/Σβ.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gwtrap/rng.hpp"
#include "gwtrap/tree.hpp"

namespace gwtrap {

struct StepLaw {
  VertexId vertex;
  /// Parent first (if any), then children in order.
  std::vector<std::pair<VertexId, double>> neighbors;
};

StepLaw step_distribution(const WeightedTree& tree, VertexId v);

struct ReturnSample {
  /// H_φ = inf{n >= 1 : X_n = φ} for the walk started at φ.
  std::uint64_t steps = 0;
  /// v_base was hit before the return.
  bool deep = false;
  /// Walks discarded before this one (conditioned sampling only).
  std::uint64_t rejected_count = 0;
};

/// Precomputed transition tables for repeated simulation on one tree. The
/// tree must outlive the walker.
class Walker {
 public:
  static constexpr std::uint64_t kDefaultStepCap = 1'000'000'000;

  explicit Walker(const WeightedTree& tree, std::uint64_t step_cap = kDefaultStepCap);

  ReturnSample simulate_return(RngStream& rng) const;
  /// Rejection on the deep-excursion event.
  ReturnSample simulate_return_conditioned_de(RngStream& rng, std::uint64_t max_attempts) const;

  const WeightedTree& tree() const { return *tree_; }
  VertexId v_base() const { return v_base_; }

 private:
  VertexId step(VertexId v, double u) const;

  const WeightedTree* tree_;
  std::uint64_t step_cap_;
  VertexId v_base_;
  /// cumulative_[child_offset_[v] + j]: probability of the parent move plus
  /// moves to children 0..j-1 (root: children only).
  std::vector<double> cumulative_;
  std::vector<std::uint32_t> offset_;
};

ReturnSample simulate_return(const WeightedTree& tree, RngStream& rng);
ReturnSample simulate_return_conditioned_de(const WeightedTree& tree, RngStream& rng,
                                            std::uint64_t max_attempts);

/// Expected hitting time of φ from `start`; for start = φ, the expected
/// first-return time. Solved by leaf elimination.
double exact_mean_return(const WeightedTree& tree, VertexId start);
/// 2(ω(T) - 1)/μ(φ) with μ(φ) the sum of the root's child biases.
double mean_return_closed_form(const WeightedTree& tree);
/// (2/N)(ω(T) - 1), N the number of root offspring. Reported for comparison
/// only; it disagrees with the walk whenever μ(φ) != N.
double mean_return_offspring_normalized(const WeightedTree& tree);
/// P^{v_child}(hit v_base before φ).
double compute_p_de(const WeightedTree& tree);
/// P^{start}(hit target before avoid).
double exact_hitting_prob(const WeightedTree& tree, VertexId start, VertexId target,
                          VertexId avoid);

/// Values of the absorbed chain: x(v) = boundary value on absorbing vertices,
/// otherwise step_cost + E[x(next)]. Exposed for tests.
std::vector<double> solve_absorbed_chain(const WeightedTree& tree,
                                         const std::vector<char>& absorbing,
                                         const std::vector<double>& boundary,
                                         double step_cost);

}  // namespace gwtrap
