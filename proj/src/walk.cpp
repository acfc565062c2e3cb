// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/walk.hpp"

#include "gwtrap/error.hpp"

namespace gwtrap {

namespace {

void require_root_children(const WeightedTree& tree, const char* what) {
  if (tree.child_count(kRoot) == 0) {
    throw Error(ErrorKind::UndefinedWalk,
                std::string(what) + ": the root has no children, the walk is undefined");
  }
}

}  // namespace

StepLaw step_distribution(const WeightedTree& tree, VertexId v) {
  StepLaw law{v, {}};
  const auto kids = tree.children(v);
  double total = 0.0;
  for (VertexId c : kids) total += tree.bias(c);
  if (v == kRoot) {
    require_root_children(tree, "step_distribution");
  } else {
    total += 1.0;
    law.neighbors.emplace_back(*tree.parent(v), 1.0 / total);
  }
  for (VertexId c : kids) law.neighbors.emplace_back(c, tree.bias(c) / total);
  return law;
}

Walker::Walker(const WeightedTree& tree, std::uint64_t step_cap)
    : tree_(&tree), step_cap_(step_cap), v_base_(tree.find_v_base()) {
  require_root_children(tree, "Walker");
  offset_.resize(tree.size() + 1);
  cumulative_.reserve(tree.size() * 2);
  for (std::uint32_t i = 0; i < tree.size(); ++i) {
    const VertexId v{i};
    offset_[i] = static_cast<std::uint32_t>(cumulative_.size());
    const auto kids = tree.children(v);
    double total = v == kRoot ? 0.0 : 1.0;
    for (VertexId c : kids) total += tree.bias(c);
    double acc = v == kRoot ? 0.0 : 1.0;
    for (VertexId c : kids) {
      cumulative_.push_back(acc / total);
      acc += tree.bias(c);
    }
  }
  offset_[tree.size()] = static_cast<std::uint32_t>(cumulative_.size());
}

VertexId Walker::step(VertexId v, double u) const {
  const std::uint32_t begin = offset_[v.index];
  const std::uint32_t end = offset_[v.index + 1];
  if (begin == end || u < cumulative_[begin]) {
    // leaves and the parent move; the root always has children with
    // cumulative_[begin] = 0, so it never lands here
    return *tree_->parent(v);
  }
  std::uint32_t j = begin;
  while (j + 1 < end && u >= cumulative_[j + 1]) ++j;
  return tree_->children(v)[j - begin];
}

ReturnSample Walker::simulate_return(RngStream& rng) const {
  ReturnSample s;
  VertexId v = kRoot;
  do {
    v = step(v, rng.uniform());
    ++s.steps;
    if (v == v_base_) s.deep = true;
    if (s.steps >= step_cap_ && v != kRoot) {
      throw Error(ErrorKind::CapExceeded,
                  "simulate_return: step cap " + std::to_string(step_cap_) + " exceeded");
    }
  } while (v != kRoot);
  return s;
}

ReturnSample Walker::simulate_return_conditioned_de(RngStream& rng,
                                                    std::uint64_t max_attempts) const {
  for (std::uint64_t attempt = 0; attempt < max_attempts; ++attempt) {
    ReturnSample s = simulate_return(rng);
    if (s.deep) {
      s.rejected_count = attempt;
      return s;
    }
  }
  throw Error(ErrorKind::BudgetExhausted,
              "simulate_return_conditioned_de: no deep excursion in " +
                  std::to_string(max_attempts) + " attempts");
}

ReturnSample simulate_return(const WeightedTree& tree, RngStream& rng) {
  return Walker(tree).simulate_return(rng);
}

ReturnSample simulate_return_conditioned_de(const WeightedTree& tree, RngStream& rng,
                                            std::uint64_t max_attempts) {
  return Walker(tree).simulate_return_conditioned_de(rng, max_attempts);
}

std::vector<double> solve_absorbed_chain(const WeightedTree& tree,
                                         const std::vector<char>& absorbing,
                                         const std::vector<double>& boundary,
                                         double step_cost) {
  const std::size_t n = tree.size();
  if (absorbing.size() != n || boundary.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "solve_absorbed_chain: size mismatch");
  }
  // Each eliminated vertex satisfies x(v) = a(v) + b(v) x(parent); the
  // deficit d(v) = 1 - b(v) is carried separately so that b(v) = 1 stays
  // exact in absorption-free subtrees.
  std::vector<double> a(n, 0.0), b(n, 0.0), d(n, 1.0);
  for (std::size_t i = n; i-- > 1;) {
    const VertexId v{static_cast<std::uint32_t>(i)};
    if (absorbing[i]) {
      a[i] = boundary[i];
      b[i] = 0.0;
      d[i] = 1.0;
      continue;
    }
    double beta_sum = 0.0, weighted_a = 0.0, weighted_d = 0.0;
    for (VertexId c : tree.children(v)) {
      const double beta = tree.bias(c);
      beta_sum += beta;
      weighted_a += beta * a[c.index];
      weighted_d += beta * d[c.index];
    }
    const double denom = 1.0 + weighted_d;
    a[i] = (step_cost * (1.0 + beta_sum) + weighted_a) / denom;
    b[i] = 1.0 / denom;
    d[i] = weighted_d / denom;
  }

  std::vector<double> x(n, 0.0);
  if (absorbing[0]) {
    x[0] = boundary[0];
  } else {
    require_root_children(tree, "solve_absorbed_chain");
    double beta_sum = 0.0, weighted_a = 0.0, weighted_d = 0.0;
    for (VertexId c : tree.children(kRoot)) {
      const double beta = tree.bias(c);
      beta_sum += beta;
      weighted_a += beta * a[c.index];
      weighted_d += beta * d[c.index];
    }
    if (!(weighted_d > 0.0)) {
      throw Error(ErrorKind::NoSolution, "solve_absorbed_chain: no absorbing vertex is reachable");
    }
    x[0] = (step_cost * beta_sum + weighted_a) / weighted_d;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const VertexId v{static_cast<std::uint32_t>(i)};
    x[i] = absorbing[i] ? boundary[i] : a[i] + b[i] * x[tree.parent(v)->index];
  }
  return x;
}

double exact_mean_return(const WeightedTree& tree, VertexId start) {
  if (!tree.valid(start)) throw Error(ErrorKind::InvalidVertex, "exact_mean_return: bad start");
  std::vector<char> absorbing(tree.size(), 0);
  absorbing[0] = 1;
  const std::vector<double> boundary(tree.size(), 0.0);
  const auto t = solve_absorbed_chain(tree, absorbing, boundary, 1.0);
  if (start != kRoot) return t[start.index];
  require_root_children(tree, "exact_mean_return");
  double beta_sum = 0.0, acc = 0.0;
  for (VertexId c : tree.children(kRoot)) {
    beta_sum += tree.bias(c);
    acc += tree.bias(c) * t[c.index];
  }
  return 1.0 + acc / beta_sum;
}

double mean_return_closed_form(const WeightedTree& tree) {
  require_root_children(tree, "mean_return_closed_form");
  double mu_root = 0.0;
  for (VertexId c : tree.children(kRoot)) mu_root += tree.bias(c);
  return 2.0 * (tree.total_weight() - 1.0) / mu_root;
}

double mean_return_offspring_normalized(const WeightedTree& tree) {
  require_root_children(tree, "mean_return_offspring_normalized");
  return 2.0 * (tree.total_weight() - 1.0) / static_cast<double>(tree.child_count(kRoot));
}

double compute_p_de(const WeightedTree& tree) {
  if (tree.depth() == 0) {
    throw Error(ErrorKind::InvalidArgument, "compute_p_de: singleton tree has depth 0");
  }
  return exact_hitting_prob(tree, tree.v_child(), tree.find_v_base(), kRoot);
}

double exact_hitting_prob(const WeightedTree& tree, VertexId start, VertexId target,
                          VertexId avoid) {
  if (!tree.valid(start) || !tree.valid(target) || !tree.valid(avoid)) {
    throw Error(ErrorKind::InvalidVertex, "exact_hitting_prob: vertex out of range");
  }
  if (target == avoid) {
    throw Error(ErrorKind::InvalidArgument, "exact_hitting_prob: target equals avoid");
  }
  if (start == target) return 1.0;
  if (start == avoid) return 0.0;
  std::vector<char> absorbing(tree.size(), 0);
  std::vector<double> boundary(tree.size(), 0.0);
  absorbing[target.index] = 1;
  absorbing[avoid.index] = 1;
  boundary[target.index] = 1.0;
  return solve_absorbed_chain(tree, absorbing, boundary, 0.0)[start.index];
}

}  // namespace gwtrap
