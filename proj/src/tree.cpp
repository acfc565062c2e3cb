// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/tree.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <utility>

#include <json.hpp>

#include "gwtrap/error.hpp"

namespace gwtrap {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::InvalidVertex: return "invalid vertex";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::CapExceeded: return "safety cap exceeded";
    case ErrorKind::BudgetExhausted: return "budget exhausted";
    case ErrorKind::NoSolution: return "no solution";
    case ErrorKind::NotConverged: return "not converged";
    case ErrorKind::UndefinedWalk: return "undefined walk";
  }
  return "unknown";
}

namespace {

bool valid_bias(double b) { return std::isfinite(b) && b > 1.0; }

}  // namespace

TreeBuilder::TreeBuilder() : parent_{-1}, bias_{std::nan("")}, depth_{0} {}

void TreeBuilder::reserve(std::size_t n) {
  parent_.reserve(n);
  bias_.reserve(n);
  depth_.reserve(n);
}

VertexId TreeBuilder::add_child(VertexId parent, double bias) {
  if (parent.index >= parent_.size()) {
    throw Error(ErrorKind::InvalidVertex, "add_child: unknown parent vertex");
  }
  if (!valid_bias(bias)) {
    throw Error(ErrorKind::InvalidArgument, "add_child: bias outside (1, inf)");
  }
  const auto id = static_cast<std::uint32_t>(parent_.size());
  parent_.push_back(parent.index);
  bias_.push_back(bias);
  depth_.push_back(depth_[parent.index] + 1);
  return VertexId{id};
}

WeightedTree TreeBuilder::finish(std::size_t depth_cap) {
  WeightedTree t;
  const std::size_t n = parent_.size();
  t.parent_ = std::move(parent_);
  t.bias_ = std::move(bias_);
  t.depth_ = std::move(depth_);
  *this = TreeBuilder();

  t.child_begin_.assign(n + 1, 0);
  for (std::size_t i = 1; i < n; ++i) ++t.child_begin_[t.parent_[i] + 1];
  for (std::size_t i = 0; i < n; ++i) t.child_begin_[i + 1] += t.child_begin_[i];
  t.child_list_.resize(n > 0 ? n - 1 : 0);
  std::vector<std::uint32_t> fill(t.child_begin_.begin(), t.child_begin_.end() - 1);
  for (std::size_t i = 1; i < n; ++i) {
    t.child_list_[fill[t.parent_[i]]++] = VertexId{static_cast<std::uint32_t>(i)};
  }

  t.weight_.resize(n);
  t.weight_[0] = 1.0;
  t.max_depth_ = 0;
  double total = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    t.weight_[i] = t.weight_[t.parent_[i]] * t.bias_[i];
    total += t.weight_[i];
    t.max_depth_ = std::max<std::size_t>(t.max_depth_, t.depth_[i]);
  }
  t.total_weight_ = total;
  if (t.max_depth_ > depth_cap) {
    throw Error(ErrorKind::CapExceeded,
                "tree depth " + std::to_string(t.max_depth_) + " exceeds cap " +
                    std::to_string(depth_cap));
  }
  if (!std::isfinite(total)) {
    throw Error(ErrorKind::CapExceeded, "tree weight overflows double precision");
  }
  return t;
}

WeightedTree::WeightedTree()
    : parent_{-1},
      bias_{std::nan("")},
      depth_{0},
      weight_{1.0},
      child_begin_{0, 0} {}

void WeightedTree::check(VertexId v) const {
  if (!valid(v)) {
    throw Error(ErrorKind::InvalidVertex,
                "vertex " + std::to_string(v.index) + " not in tree of size " +
                    std::to_string(size()));
  }
}

std::optional<VertexId> WeightedTree::parent(VertexId v) const {
  check(v);
  if (parent_[v.index] < 0) return std::nullopt;
  return VertexId{static_cast<std::uint32_t>(parent_[v.index])};
}

std::span<const VertexId> WeightedTree::children(VertexId v) const {
  check(v);
  return {child_list_.data() + child_begin_[v.index],
          child_begin_[v.index + 1] - child_begin_[v.index]};
}

std::size_t WeightedTree::child_count(VertexId v) const {
  check(v);
  return child_begin_[v.index + 1] - child_begin_[v.index];
}

double WeightedTree::bias(VertexId v) const {
  check(v);
  if (v == kRoot) throw Error(ErrorKind::InvalidVertex, "the root carries no bias");
  return bias_[v.index];
}

std::size_t WeightedTree::vertex_depth(VertexId v) const {
  check(v);
  return depth_[v.index];
}

double WeightedTree::vertex_weight(VertexId v) const {
  check(v);
  return weight_[v.index];
}

bool WeightedTree::is_ancestor_or_self(VertexId u, VertexId v) const {
  check(u);
  check(v);
  while (depth_[v.index] > depth_[u.index]) v.index = static_cast<std::uint32_t>(parent_[v.index]);
  return u == v;
}

double WeightedTree::relative_weight(VertexId u, VertexId v) const {
  if (!is_ancestor_or_self(u, v)) {
    throw Error(ErrorKind::InvalidArgument,
                "relative_weight: vertex is not a descendant of the base point");
  }
  std::vector<double> path;
  for (VertexId w = v; w != u; w.index = static_cast<std::uint32_t>(parent_[w.index])) {
    path.push_back(bias_[w.index]);
  }
  double product = 1.0;
  for (auto it = path.rbegin(); it != path.rend(); ++it) product *= *it;
  return product;
}

double WeightedTree::subtree_weight(VertexId v) const {
  check(v);
  double total = 0.0;
  std::vector<std::pair<VertexId, double>> stack{{v, 1.0}};
  while (!stack.empty()) {
    const auto [w, rel] = stack.back();
    stack.pop_back();
    total += rel;
    for (VertexId c : children(w)) stack.emplace_back(c, rel * bias_[c.index]);
  }
  return total;
}

std::size_t WeightedTree::subtree_size(VertexId v) const {
  check(v);
  std::size_t count = 0;
  std::vector<VertexId> stack{v};
  while (!stack.empty()) {
    const VertexId w = stack.back();
    stack.pop_back();
    ++count;
    for (VertexId c : children(w)) stack.push_back(c);
  }
  return count;
}

std::vector<VertexId> WeightedTree::preorder() const {
  std::vector<VertexId> order;
  order.reserve(size());
  std::vector<VertexId> stack{kRoot};
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    order.push_back(v);
    const auto kids = children(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

VertexId WeightedTree::find_v_base() const {
  std::vector<VertexId> stack{kRoot};
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    if (depth_[v.index] == max_depth_) return v;
    const auto kids = children(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return kRoot;  // unreachable: some vertex attains the maximum
}

VertexId WeightedTree::v_child() const {
  if (max_depth_ == 0) {
    throw Error(ErrorKind::InvalidArgument, "singleton tree has no v_child");
  }
  VertexId v = find_v_base();
  while (depth_[v.index] > 1) v.index = static_cast<std::uint32_t>(parent_[v.index]);
  return v;
}

double WeightedTree::omega_star() const { return subtree_weight(v_child()); }

std::vector<VertexId> WeightedTree::root_path(VertexId v) const {
  check(v);
  std::vector<VertexId> path(depth_[v.index] + 1);
  for (std::size_t i = path.size(); i-- > 0;) {
    path[i] = v;
    if (i > 0) v.index = static_cast<std::uint32_t>(parent_[v.index]);
  }
  return path;
}

WeightedTree::Extracted extract_subtree(const WeightedTree& tree, VertexId new_root,
                                        const std::vector<char>& keep) {
  WeightedTree::Extracted out;
  TreeBuilder builder;
  out.original_id.push_back(new_root);
  // Breadth-first copy keeps parents ahead of children and child order intact.
  for (std::size_t head = 0; head < out.original_id.size(); ++head) {
    const VertexId src = out.original_id[head];
    for (VertexId c : tree.children(src)) {
      if (!keep[c.index]) continue;
      builder.add_child(VertexId{static_cast<std::uint32_t>(head)}, tree.bias(c));
      out.original_id.push_back(c);
    }
  }
  out.tree = builder.finish(std::numeric_limits<std::size_t>::max());
  return out;
}

WeightedTree::Extracted WeightedTree::descendant_tree(VertexId v) const {
  check(v);
  std::vector<char> keep(size(), 1);
  return extract_subtree(*this, v, keep);
}

WeightedTree::Extracted WeightedTree::without_descendants_of(VertexId v) const {
  check(v);
  std::vector<char> keep(size(), 1);
  std::vector<VertexId> stack(children(v).begin(), children(v).end());
  while (!stack.empty()) {
    const VertexId w = stack.back();
    stack.pop_back();
    keep[w.index] = 0;
    for (VertexId c : children(w)) stack.push_back(c);
  }
  return extract_subtree(*this, kRoot, keep);
}

bool operator==(const WeightedTree& a, const WeightedTree& b) {
  if (a.size() != b.size()) return false;
  std::vector<std::pair<VertexId, VertexId>> stack{{kRoot, kRoot}};
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    const auto kx = a.children(x);
    const auto ky = b.children(y);
    if (kx.size() != ky.size()) return false;
    for (std::size_t i = 0; i < kx.size(); ++i) {
      if (a.bias_[kx[i].index] != b.bias_[ky[i].index]) return false;
      stack.emplace_back(kx[i], ky[i]);
    }
  }
  return true;
}

// --- JSON document ---------------------------------------------------------

namespace {

void append_double(std::string& out, double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string_view digits(buf, static_cast<std::size_t>(end - buf));
  out.append(digits);
  if (digits.find_first_of(".eE") == std::string_view::npos) out.append(".0");
}

}  // namespace

std::string serialize(const WeightedTree& tree) {
  std::string out;
  out.reserve(tree.size() * 32);
  // (vertex, index of next child to emit)
  std::vector<std::pair<VertexId, std::size_t>> stack{{kRoot, 0}};
  out.append("{\"children\":[");
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    const auto kids = tree.children(v);
    if (next == kids.size()) {
      out.append("]}");
      stack.pop_back();
      continue;
    }
    if (next > 0) out.push_back(',');
    const VertexId c = kids[next++];
    out.append("{\"bias\":");
    append_double(out, tree.bias(c));
    out.append(",\"children\":[");
    stack.emplace_back(c, 0);
  }
  return out;
}

WeightedTree deserialize(std::string_view text, std::size_t depth_cap) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
  constexpr std::size_t kNoPosition = std::numeric_limits<std::size_t>::max();
  auto fail = [](const std::string& where, const std::string& why) {
    throw ParseError(kNoPosition, "tree document at " + where + ": " + why);
  };
  auto children_of = [&](const nlohmann::json& node,
                         const std::string& where) -> const nlohmann::json& {
    if (!node.is_object()) fail(where, "expected an object");
    auto it = node.find("children");
    if (it == node.end() || !it->is_array()) fail(where, "missing \"children\" array");
    return *it;
  };

  struct Frame {
    const nlohmann::json* node;
    VertexId id;
    std::size_t parent_frame;
    std::size_t child_index;
    std::size_t depth;
  };
  std::vector<Frame> queue{{&doc, kRoot, 0, 0, 0}};
  auto pointer = [&](std::size_t frame) {
    std::string path;
    for (; frame != 0; frame = queue[frame].parent_frame) {
      path.insert(0, "/children/" + std::to_string(queue[frame].child_index));
    }
    return path.empty() ? std::string("/") : path;
  };

  TreeBuilder builder;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Frame frame = queue[head];
    const auto& kids = children_of(*frame.node, pointer(head));
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const auto& child = kids[i];
      queue.push_back({&child, kRoot, head, i, frame.depth + 1});
      const std::size_t self = queue.size() - 1;
      if (!child.is_object()) fail(pointer(self), "expected an object");
      auto b = child.find("bias");
      if (b == child.end() || !b->is_number()) fail(pointer(self), "missing numeric \"bias\"");
      const double bias = b->get<double>();
      if (!valid_bias(bias)) fail(pointer(self), "bias outside (1, inf)");
      if (frame.depth + 1 > depth_cap) fail(pointer(self), "depth cap exceeded");
      queue[self].id = builder.add_child(frame.id, bias);
    }
  }
  return builder.finish(depth_cap);
}

WeightedTree make_path(std::span<const double> biases) {
  TreeBuilder b;
  VertexId v = kRoot;
  for (double beta : biases) v = b.add_child(v, beta);
  return b.finish();
}

WeightedTree make_star(std::span<const double> biases) {
  TreeBuilder b;
  for (double beta : biases) b.add_child(kRoot, beta);
  return b.finish();
}

}  // namespace gwtrap
