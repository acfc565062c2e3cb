// SPDX-License-Identifier: Apache-2.0
//
// Tree decompositions: outgrowths along the path to v_base, the
// foundation/spine/offshoot split along the path to the maximal-weight
// vertex, and the renewal decomposition at cutpoints.
#pragma once

#include <optional>
#include <vector>

#include "gwtrap/tree.hpp"

namespace gwtrap {

struct OutgrowthDecomposition {
  /// ψ_0 = φ, ..., ψ_{D(T)} = v_base.
  std::vector<VertexId> spine;
  /// outgrowths[i]: vertex set of J_i (ψ_i first, then preorder-free order).
  std::vector<std::vector<VertexId>> outgrowths;
  /// owner[v] = i such that v ∈ J_i.
  std::vector<std::uint32_t> owner;
};

OutgrowthDecomposition outgrowth_decompose(const WeightedTree& tree);

struct WkTerms {
  double w = 0.0;  ///< Σ_{i=0}^{k} Σ_{v∈J_{D-i}} ω(v)
  double u = 0.0;  ///< ω(ψ_{D-k})
  double v = 0.0;  ///< Σ_{v∈E_k} ω_{ψ_{D-k}}(v)
};

/// Throws InvalidArgument for k > D(T).
WkTerms w_k_terms(const WeightedTree& tree, std::size_t k);

struct EkSplit {
  WeightedTree::Extracted e_k;       ///< descendent tree of ψ_{D-k}
  WeightedTree::Extracted e_k_star;  ///< T minus strict descendants of ψ_{D-k}
  VertexId pivot;                    ///< ψ_{D-k} in the source tree
};

EkSplit split_E_k(const WeightedTree& tree, std::size_t k);

/// |V(J_i)| <= B log log ω(T) for every i < D(T). Throws for ω(T) <= e.
bool is_b_bare(const WeightedTree& tree, double B);

struct BareBounds {
  bool base_weight_bound = false;  ///< ω(v_base) >= ω(T)/(log ω(T))^{2B log Q}
  bool depth_bound = false;        ///< D(T) >= log ω(T)/(2 log Q)
};

BareBounds check_bare_bounds(const WeightedTree& tree, double B, double Q);

struct FsoDecomposition {
  VertexId v_max;
  VertexId v_fbp;
  /// φ ... v_fbp.
  std::vector<VertexId> foundation;
  /// χ_0 = v_fbp, ..., χ_s = v_max.
  std::vector<VertexId> spine;
  /// offshoots[i]: χ_i together with its descendants off the spine.
  std::vector<std::vector<VertexId>> offshoots;
};

/// v_max is the first maximal-weight vertex in depth-first order.
FsoDecomposition fso_decompose(const WeightedTree& tree);

/// A component of the renewal decomposition. All but the last carry a base.
struct RenewalComponent {
  WeightedTree tree;
  std::optional<VertexId> base;
  /// Source-tree ids of the component's vertices.
  std::vector<VertexId> original_id;
};

struct RenewalDecomposition {
  /// c_1, ..., c_{r-1} by increasing depth.
  std::vector<VertexId> cutpoints;
  std::vector<RenewalComponent> components;

  std::size_t r() const { return components.size(); }
};

/// A non-root vertex is a cutpoint when it is not a leaf and every other
/// vertex at its depth is a leaf.
std::vector<VertexId> find_cutpoints(const WeightedTree& tree);

RenewalDecomposition renewal_decompose(const WeightedTree& tree);

/// Glues base(C_i) to root(C_{i+1}). Every non-final component must carry a
/// base that is a leaf of maximal depth.
WeightedTree concatenate(const std::vector<RenewalComponent>& components);

}  // namespace gwtrap
