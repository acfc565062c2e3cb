// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/decomp.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "gwtrap/error.hpp"

namespace gwtrap {

OutgrowthDecomposition outgrowth_decompose(const WeightedTree& tree) {
  OutgrowthDecomposition out;
  out.spine = tree.root_path(tree.find_v_base());
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  out.owner.assign(tree.size(), kNone);
  for (std::size_t i = 0; i < out.spine.size(); ++i) {
    out.owner[out.spine[i].index] = static_cast<std::uint32_t>(i);
  }
  out.outgrowths.resize(out.spine.size());
  for (std::uint32_t i = 0; i < tree.size(); ++i) {
    if (out.owner[i] == kNone) out.owner[i] = out.owner[tree.parent(VertexId{i})->index];
    out.outgrowths[out.owner[i]].push_back(VertexId{i});
  }
  return out;
}

WkTerms w_k_terms(const WeightedTree& tree, std::size_t k) {
  const std::size_t depth = tree.depth();
  if (k > depth) {
    throw Error(ErrorKind::InvalidArgument,
                "w_k_terms: k = " + std::to_string(k) + " exceeds D(T) = " +
                    std::to_string(depth));
  }
  const auto dec = outgrowth_decompose(tree);
  WkTerms t;
  for (std::uint32_t i = 0; i < tree.size(); ++i) {
    if (dec.owner[i] >= depth - k) t.w += tree.vertex_weight(VertexId{i});
  }
  const VertexId pivot = dec.spine[depth - k];
  t.u = tree.vertex_weight(pivot);
  t.v = tree.subtree_weight(pivot);
  return t;
}

EkSplit split_E_k(const WeightedTree& tree, std::size_t k) {
  const std::size_t depth = tree.depth();
  if (k > depth) {
    throw Error(ErrorKind::InvalidArgument,
                "split_E_k: k = " + std::to_string(k) + " exceeds D(T) = " +
                    std::to_string(depth));
  }
  const VertexId pivot = tree.root_path(tree.find_v_base())[depth - k];
  return {tree.descendant_tree(pivot), tree.without_descendants_of(pivot), pivot};
}

bool is_b_bare(const WeightedTree& tree, double B) {
  const double omega = tree.total_weight();
  if (!(omega > std::numbers::e)) {
    throw Error(ErrorKind::InvalidArgument,
                "is_b_bare: needs ω(T) > e so that log log ω(T) > 0");
  }
  const double threshold = B * std::log(std::log(omega));
  const auto dec = outgrowth_decompose(tree);
  for (std::size_t i = 0; i + 1 < dec.outgrowths.size(); ++i) {
    if (static_cast<double>(dec.outgrowths[i].size()) > threshold) return false;
  }
  return true;
}

BareBounds check_bare_bounds(const WeightedTree& tree, double B, double Q) {
  const double log_omega = std::log(tree.total_weight());
  BareBounds b;
  b.base_weight_bound = tree.vertex_weight(tree.find_v_base()) >=
                        tree.total_weight() / std::pow(log_omega, 2.0 * B * std::log(Q));
  b.depth_bound = static_cast<double>(tree.depth()) >= log_omega / (2.0 * std::log(Q));
  return b;
}

FsoDecomposition fso_decompose(const WeightedTree& tree) {
  FsoDecomposition out;
  out.v_max = kRoot;
  double best = tree.vertex_weight(kRoot);
  for (VertexId v : tree.preorder()) {
    if (tree.vertex_weight(v) > best) {
      best = tree.vertex_weight(v);
      out.v_max = v;
    }
  }
  const auto path = tree.root_path(out.v_max);
  std::size_t fbp = path.size() - 1;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (tree.child_count(path[i]) >= 2) {
      fbp = i;
      break;
    }
  }
  out.v_fbp = path[fbp];
  out.foundation.assign(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(fbp) + 1);
  out.spine.assign(path.begin() + static_cast<std::ptrdiff_t>(fbp), path.end());
  out.offshoots.resize(out.spine.size());
  for (std::size_t i = 0; i < out.spine.size(); ++i) {
    const bool has_next = i + 1 < out.spine.size();
    auto& set = out.offshoots[i];
    std::vector<VertexId> stack{out.spine[i]};
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      set.push_back(v);
      for (VertexId c : tree.children(v)) {
        if (has_next && c == out.spine[i + 1]) continue;
        stack.push_back(c);
      }
    }
  }
  return out;
}

std::vector<VertexId> find_cutpoints(const WeightedTree& tree) {
  const std::size_t depth = tree.depth();
  std::vector<std::uint32_t> non_leaves(depth + 1, 0);
  std::vector<VertexId> witness(depth + 1);
  for (std::uint32_t i = 0; i < tree.size(); ++i) {
    const VertexId v{i};
    if (tree.is_leaf(v)) continue;
    const std::size_t d = tree.vertex_depth(v);
    ++non_leaves[d];
    witness[d] = v;
  }
  std::vector<VertexId> cuts;
  for (std::size_t d = 1; d <= depth; ++d) {
    if (non_leaves[d] == 1) cuts.push_back(witness[d]);
  }
  return cuts;
}

RenewalDecomposition renewal_decompose(const WeightedTree& tree) {
  RenewalDecomposition out;
  out.cutpoints = find_cutpoints(tree);
  const std::size_t r = out.cutpoints.size() + 1;
  // Component i is rooted at c_{i-1} and keeps the descendants down to
  // depth d_i. Leaves at depth d_{i-1} other than c_{i-1} belong to the
  // previous component, where they are attached.
  for (std::size_t i = 0; i < r; ++i) {
    const VertexId top = i == 0 ? kRoot : out.cutpoints[i - 1];
    const bool last = i + 1 == r;
    const std::size_t floor_depth = last ? tree.depth() : tree.vertex_depth(out.cutpoints[i]);
    RenewalComponent comp;
    TreeBuilder builder;
    comp.original_id.push_back(top);
    for (std::size_t head = 0; head < comp.original_id.size(); ++head) {
      const VertexId src = comp.original_id[head];
      if (!last && src == out.cutpoints[i]) comp.base = VertexId{static_cast<std::uint32_t>(head)};
      if (tree.vertex_depth(src) >= floor_depth) continue;
      for (VertexId c : tree.children(src)) {
        builder.add_child(VertexId{static_cast<std::uint32_t>(head)}, tree.bias(c));
        comp.original_id.push_back(c);
      }
    }
    comp.tree = builder.finish(std::numeric_limits<std::size_t>::max());
    out.components.push_back(std::move(comp));
  }
  return out;
}

WeightedTree concatenate(const std::vector<RenewalComponent>& components) {
  if (components.empty()) {
    throw Error(ErrorKind::InvalidArgument, "concatenate: no components");
  }
  for (std::size_t i = 0; i + 1 < components.size(); ++i) {
    const auto& c = components[i];
    if (!c.base) {
      throw Error(ErrorKind::InvalidArgument,
                  "concatenate: non-final component " + std::to_string(i + 1) +
                      " lacks a base");
    }
    if (!c.tree.valid(*c.base) || !c.tree.is_leaf(*c.base) ||
        c.tree.vertex_depth(*c.base) != c.tree.depth()) {
      throw Error(ErrorKind::InvalidArgument,
                  "concatenate: base of component " + std::to_string(i + 1) +
                      " is not a leaf of maximal depth");
    }
  }
  struct Slot {
    std::size_t component;
    VertexId vertex;
  };
  TreeBuilder builder;
  std::vector<Slot> queue{{0, kRoot}};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    Slot s = queue[head];
    const auto& comp = components[s.component];
    if (s.component + 1 < components.size() && comp.base && s.vertex == *comp.base) {
      s = {s.component + 1, kRoot};
    }
    const auto& src = components[s.component].tree;
    for (VertexId c : src.children(s.vertex)) {
      builder.add_child(VertexId{static_cast<std::uint32_t>(head)}, src.bias(c));
      queue.push_back({s.component, c});
    }
  }
  return builder.finish();
}

}  // namespace gwtrap
