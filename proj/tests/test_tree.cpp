#include <doctest.h>

#include <cmath>

#include "gwtrap/error.hpp"
#include "gwtrap/laws.hpp"
#include "gwtrap/rng.hpp"
#include "gwtrap/sampler.hpp"
#include "gwtrap/tree.hpp"

using namespace gwtrap;

namespace {

WeightedTree random_tree(std::uint64_t i, double above = 20.0) {
  RngStream rng(3, i);
  return sample_conditioned(OffspringLaw::truncated_geometric(1.0 / 3.0, 12),
                            BiasLaw::uniform(1.2, 2.0), above, rng, 10'000'000)
      .tree;
}

}  // namespace

TEST_SUITE("tree_core") {
  TEST_CASE("philox known answer") {
    // Philox4x32-10 with key 0 and counter 0.
    RngStream rng(0, 0);
    CHECK(rng() == 0xe169c58d6627e8d5ull);
    CHECK(rng() == 0x9b00dbd8bc57ac4cull);
  }

  TEST_CASE("streams are reproducible and distinct") {
    RngStream a(9, stream_id(1, 2)), b(9, stream_id(1, 2)), c(9, stream_id(1, 3));
    for (int i = 0; i < 100; ++i) {
      const auto x = a();
      CHECK(x == b());
      CHECK(x != c());
    }
  }

  TEST_CASE("vertex weights") {
    const double biases[] = {2.0, 3.0};
    const auto path = make_path(biases);
    CHECK(path.vertex_weight(kRoot) == 1.0);
    CHECK(path.vertex_weight(VertexId{2}) == 6.0);
    CHECK(path.total_weight() == 9.0);
    CHECK(path.relative_weight(VertexId{1}, VertexId{2}) == 3.0);
    CHECK(path.relative_weight(VertexId{1}, VertexId{1}) == 1.0);
    CHECK_THROWS_AS(path.relative_weight(VertexId{2}, VertexId{1}), Error);
    CHECK_THROWS_AS(path.vertex_weight(VertexId{7}), Error);

    const double one[] = {2.0};
    CHECK(make_path(one).total_weight() == 3.0);
    CHECK(WeightedTree().total_weight() == 1.0);
  }

  TEST_CASE("weights on random trees") {
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto t = random_tree(i, 5.0);
      double sum = 0.0, edges = 0.0;
      for (VertexId v : t.preorder()) {
        sum += t.vertex_weight(v);
        if (v == kRoot) continue;
        const VertexId p = *t.parent(v);
        CHECK(t.vertex_weight(v) == doctest::Approx(t.vertex_weight(p) * t.bias(v)).epsilon(1e-12));
        edges += t.vertex_weight(v);
        for (VertexId u : t.root_path(v)) {
          CHECK(t.vertex_weight(v) ==
                doctest::Approx(t.vertex_weight(u) * t.relative_weight(u, v)).epsilon(1e-12));
        }
      }
      CHECK(sum == doctest::Approx(t.total_weight()).epsilon(1e-12));
      CHECK(edges == doctest::Approx(t.total_weight() - 1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("depth and v_base") {
    CHECK(WeightedTree().depth() == 0);
    CHECK(WeightedTree().find_v_base() == kRoot);
    const double five[] = {2.0, 2.0, 2.0, 2.0, 2.0};
    const auto star = make_star(five);
    CHECK(star.depth() == 1);
    const double two[] = {3.0, 2.0};
    CHECK(make_star(two).find_v_base() == VertexId{1});
    const double p3[] = {2.0, 1.5, 1.7};
    const auto path = make_path(p3);
    CHECK(path.find_v_base() == VertexId{3});
    CHECK(path.depth() == 3);

    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto t = random_tree(i, 5.0);
      const VertexId base = t.find_v_base();
      CHECK(t.vertex_depth(base) == t.depth());
      for (VertexId v : t.preorder()) {
        if (v == base) break;
        CHECK(t.vertex_depth(v) < t.depth());
      }
    }
  }

  TEST_CASE("omega_star") {
    const double one[] = {2.0};
    CHECK(make_path(one).omega_star() == 1.0);
    const double two[] = {2.0, 3.0};
    CHECK(make_path(two).omega_star() == 4.0);
    CHECK_THROWS_AS(WeightedTree().omega_star(), Error);

    // Brute force: sum of ω(v)/β(v_child) over the descendants of v_child.
    for (std::uint64_t i = 0; i < 30; ++i) {
      const auto t = random_tree(i);
      const VertexId c = t.v_child();
      double brute = 0.0;
      for (VertexId v : t.preorder()) {
        if (t.is_ancestor_or_self(c, v)) brute += t.vertex_weight(v) / t.bias(c);
      }
      CHECK(t.omega_star() == doctest::Approx(brute).epsilon(1e-12));
      double by_child = 1.0;
      for (VertexId k : t.children(kRoot)) by_child += t.bias(k) * t.subtree_weight(k);
      CHECK(by_child == doctest::Approx(t.total_weight()).epsilon(1e-12));
    }
  }

  TEST_CASE("serialize round trip") {
    CHECK(serialize(WeightedTree()) == R"({"children":[]})");
    const double one[] = {2.0};
    const auto edge = deserialize(R"({"children":[{"bias":2.0,"children":[]}]})");
    CHECK(edge == make_path(one));
    CHECK(deserialize(serialize(edge)) == edge);
    for (std::uint64_t i = 0; i < 30; ++i) {
      const auto t = random_tree(i);
      CHECK(deserialize(serialize(t)) == t);
    }
  }

  TEST_CASE("deserialize errors") {
    CHECK_THROWS_AS(deserialize(R"({"children":[{"bias":0.5,"children":[]}]})"), Error);
    CHECK_THROWS_AS(deserialize(R"({"children":[{"children":[]}]})"), Error);
    try {
      deserialize(R"({"children":[)");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.kind() == ErrorKind::Parse);
    }
  }

  TEST_CASE("builder rejects bad input") {
    TreeBuilder b;
    CHECK_THROWS_AS(b.add_child(VertexId{3}, 2.0), Error);
    CHECK_THROWS_AS(b.add_child(kRoot, 1.0), Error);
    TreeBuilder deep;
    VertexId v = kRoot;
    for (int i = 0; i < 20; ++i) v = deep.add_child(v, 1.5);
    CHECK_THROWS_AS(deep.finish(10), Error);
  }

  TEST_CASE("descendant split") {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const auto t = random_tree(i);
      const VertexId c = t.v_child();
      const auto below = t.descendant_tree(c);
      const auto rest = t.without_descendants_of(c);
      CHECK(below.tree.size() + rest.tree.size() == t.size() + 1);
      CHECK(below.tree.total_weight() == doctest::Approx(t.omega_star()).epsilon(1e-12));
    }
  }
}
