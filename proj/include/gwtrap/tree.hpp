// SPDX-License-Identifier: Apache-2.0
//
// Weighted rooted ordered trees. Vertices live in an arena indexed so that
// every parent precedes its children; child lists keep their order, which
// fixes the Ulam-Harris labelling and hence the lexicographic order used by
// the canonical vertex choices (v_base, v_max).
#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gwtrap {

struct VertexId {
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(VertexId, VertexId) = default;
};

inline constexpr VertexId kRoot{0};

class WeightedTree;

/// Incremental construction. Parents must exist before their children, so
/// insertion order is a topological order of the finished tree.
class TreeBuilder {
 public:
  TreeBuilder();

  VertexId add_child(VertexId parent, double bias);
  std::size_t size() const { return parent_.size(); }
  void reserve(std::size_t n);

  /// Validates biases and the depth cap; the builder is left empty.
  WeightedTree finish(std::size_t depth_cap = kDefaultDepthCap);

  static constexpr std::size_t kDefaultDepthCap = 10'000;

 private:
  std::vector<std::int64_t> parent_;
  std::vector<double> bias_;
  std::vector<std::uint32_t> depth_;
};

class WeightedTree {
 public:
  /// The singleton tree.
  WeightedTree();

  std::size_t size() const { return parent_.size(); }
  std::size_t edge_count() const { return size() - 1; }
  VertexId root() const { return kRoot; }

  bool valid(VertexId v) const { return v.index < size(); }
  std::optional<VertexId> parent(VertexId v) const;
  std::span<const VertexId> children(VertexId v) const;
  std::size_t child_count(VertexId v) const;
  bool is_leaf(VertexId v) const { return child_count(v) == 0; }
  /// Bias of the edge into v; throws for the root.
  double bias(VertexId v) const;
  std::size_t vertex_depth(VertexId v) const;

  /// ω(v): product of biases along the root path; ω(root) = 1.
  double vertex_weight(VertexId v) const;
  /// ω(T) = Σ_v ω(v), root included.
  double total_weight() const { return total_weight_; }
  /// ω_u(v): product of biases on the path from u down to v.
  double relative_weight(VertexId u, VertexId v) const;
  /// Σ_{w ∈ T_v} ω_v(w): total weight of the descendent tree re-rooted at v.
  double subtree_weight(VertexId v) const;
  std::size_t subtree_size(VertexId v) const;

  /// D(T) = max_v d(root, v).
  std::size_t depth() const { return max_depth_; }
  /// First vertex of maximal depth in depth-first (lexicographic) order.
  VertexId find_v_base() const;
  /// Root neighbour on the path to v_base; requires depth() >= 1.
  VertexId v_child() const;
  /// Total weight of T_{v_child} rooted at v_child.
  double omega_star() const;

  bool is_ancestor_or_self(VertexId u, VertexId v) const;
  /// Vertices on the path from the root to v, root first.
  std::vector<VertexId> root_path(VertexId v) const;
  /// Depth-first preorder respecting child order.
  std::vector<VertexId> preorder() const;

  struct Extracted;
  /// Descendent tree T_v, re-rooted at v.
  Extracted descendant_tree(VertexId v) const;
  /// T with the strict descendants of v removed.
  Extracted without_descendants_of(VertexId v) const;

  /// Structural equality of ordered trees (shape, child order, biases).
  friend bool operator==(const WeightedTree& a, const WeightedTree& b);

 private:
  friend class TreeBuilder;

  void check(VertexId v) const;

  std::vector<std::int64_t> parent_;
  std::vector<double> bias_;
  std::vector<std::uint32_t> depth_;
  std::vector<double> weight_;
  std::vector<std::uint32_t> child_begin_;
  std::vector<VertexId> child_list_;
  double total_weight_ = 1.0;
  std::size_t max_depth_ = 0;
};

struct WeightedTree::Extracted {
  WeightedTree tree;
  /// original_id[i] is the vertex of the source tree that became vertex i.
  std::vector<VertexId> original_id;
};

/// Builds an ordered tree from a map of vertices; keep[v] selects which
/// vertices survive. The kept set must be closed under taking parents up to
/// `new_root`.
WeightedTree::Extracted extract_subtree(const WeightedTree& tree,
                                        VertexId new_root,
                                        const std::vector<char>& keep);

/// JSON document: {"children":[{"bias":b,"children":[...]}, ...]}.
std::string serialize(const WeightedTree& tree);
WeightedTree deserialize(std::string_view text,
                         std::size_t depth_cap = TreeBuilder::kDefaultDepthCap);

/// Convenience: root path with the given biases.
WeightedTree make_path(std::span<const double> biases);
/// Convenience: root with one leaf child per bias.
WeightedTree make_star(std::span<const double> biases);

}  // namespace gwtrap
