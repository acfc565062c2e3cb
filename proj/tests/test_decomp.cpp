#include <doctest.h>

#include <cmath>

#include "gwtrap/decomp.hpp"
#include "gwtrap/error.hpp"
#include "gwtrap/sampler.hpp"

using namespace gwtrap;

namespace {

const OffspringLaw kRefH = OffspringLaw::truncated_geometric(1.0 / 3.0, 12);
const BiasLaw kRefNu = BiasLaw::uniform(1.2, 2.0);

WeightedTree random_tree(std::uint64_t i, double above = 20.0) {
  RngStream rng(11, i);
  return sample_conditioned(kRefH, kRefNu, above, rng, 10'000'000).tree;
}

WeightedTree two_edges() {
  const double b[] = {2.0};
  return make_path(b);
}

}  // namespace

TEST_SUITE("decomp") {
  TEST_CASE("outgrowths of simple trees") {
    const double b[] = {2.0, 1.5, 1.8};
    const auto path = make_path(b);
    const auto og = outgrowth_decompose(path);
    CHECK(og.spine.size() == 4);
    for (const auto& j : og.outgrowths) CHECK(j.size() == 1);

    const auto single = outgrowth_decompose(WeightedTree());
    CHECK(single.spine == std::vector<VertexId>{kRoot});
    CHECK(single.outgrowths.size() == 1);
    CHECK(single.outgrowths[0] == std::vector<VertexId>{kRoot});
  }

  TEST_CASE("outgrowths partition random trees") {
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto t = random_tree(i);
      const auto og = outgrowth_decompose(t);
      std::size_t count = 0;
      double weight = 0.0;
      for (const auto& j : og.outgrowths) {
        count += j.size();
        for (VertexId v : j) weight += t.vertex_weight(v);
      }
      CHECK(count == t.size());
      CHECK(weight == doctest::Approx(t.total_weight()).epsilon(1e-12));
      CHECK(og.outgrowths.back() == std::vector<VertexId>{t.find_v_base()});
    }
  }

  TEST_CASE("w_k terms") {
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto t = random_tree(i);
      const std::size_t d = t.depth();
      const double base = t.vertex_weight(t.find_v_base());
      const auto w0 = w_k_terms(t, 0);
      CHECK(w0.w == doctest::Approx(base).epsilon(1e-12));
      CHECK(w0.u == doctest::Approx(base).epsilon(1e-12));
      CHECK(w0.v == 1.0);
      const auto wd = w_k_terms(t, d);
      CHECK(wd.w == doctest::Approx(t.total_weight()).epsilon(1e-12));
      CHECK(wd.u == 1.0);
      CHECK(wd.v == doctest::Approx(t.total_weight()).epsilon(1e-12));
      double prev = 0.0;
      for (std::size_t k = 0; k <= d; ++k) {
        const auto w = w_k_terms(t, k);
        CHECK(std::abs(w.w - w.u * w.v) <= 1e-12 * w.w);
        CHECK(w.w >= prev);
        CHECK(w.w <= t.total_weight() * (1.0 + 1e-12));
        // Brute force over V(E_k).
        const auto split = split_E_k(t, k);
        double brute = 0.0;
        for (VertexId v : t.preorder()) {
          if (t.is_ancestor_or_self(split.pivot, v)) brute += t.vertex_weight(v);
        }
        CHECK(w.w == doctest::Approx(brute).epsilon(1e-12));
        prev = w.w;
      }
      CHECK_THROWS_AS(w_k_terms(t, d + 1), Error);
    }
  }

  TEST_CASE("E_k split") {
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto t = random_tree(i);
      for (std::size_t k = 0; k <= t.depth(); ++k) {
        const auto s = split_E_k(t, k);
        CHECK(s.e_k.tree.depth() == k);
        CHECK(s.e_k.tree.edge_count() + s.e_k_star.tree.edge_count() == t.edge_count());
      }
      CHECK(split_E_k(t, 0).e_k.tree.size() == 1);
      CHECK(split_E_k(t, t.depth()).e_k.tree == t);
      CHECK_THROWS_AS(split_E_k(t, t.depth() + 1), Error);
    }
  }

  TEST_CASE("B-bare") {
    const double b[] = {2.0, 2.0, 2.0, 2.0};
    const auto path = make_path(b);  // ω = 31 > e^e
    CHECK(is_b_bare(path, 1.0));
    std::vector<double> fifty(50, 2.0);
    CHECK_FALSE(is_b_bare(make_star(fifty), 1.0));
    CHECK_THROWS_AS(is_b_bare(WeightedTree(), 1.0), Error);
  }

  TEST_CASE("bare bounds above threshold") {
    const double threshold = 10.0 * std::exp(std::exp(1.0));
    int checked = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto t = random_tree(1000 + i, threshold);
      if (!is_b_bare(t, 2.0)) continue;
      const auto bounds = check_bare_bounds(t, 2.0, kRefNu.Q());
      CHECK(bounds.base_weight_bound);
      CHECK(bounds.depth_bound);
      ++checked;
    }
    CHECK(checked > 0);
  }

  TEST_CASE("FSO of simple trees") {
    const double b[] = {2.0, 1.5, 1.8};
    const auto path = make_path(b);
    const auto f = fso_decompose(path);
    CHECK(f.v_max == VertexId{3});
    CHECK(f.v_fbp == VertexId{3});
    CHECK(f.foundation.size() == 4);
    CHECK(f.spine == std::vector<VertexId>{VertexId{3}});

    const double s[] = {2.0, 3.0};
    const auto star = fso_decompose(make_star(s));
    CHECK(star.v_max == VertexId{2});
    CHECK(star.v_fbp == kRoot);
    CHECK(star.foundation == std::vector<VertexId>{kRoot});
    CHECK(star.offshoots.back() == std::vector<VertexId>{VertexId{2}});
  }

  TEST_CASE("FSO edges partition random trees") {
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto t = random_tree(i);
      const auto f = fso_decompose(t);
      std::vector<int> hits(t.size(), 0);
      for (std::size_t k = 1; k < f.foundation.size(); ++k) ++hits[f.foundation[k].index];
      for (std::size_t k = 1; k < f.spine.size(); ++k) ++hits[f.spine[k].index];
      for (std::size_t k = 0; k < f.offshoots.size(); ++k) {
        for (VertexId v : f.offshoots[k]) {
          if (v != f.spine[k]) ++hits[v.index];
        }
      }
      for (std::size_t v = 1; v < t.size(); ++v) CHECK(hits[v] == 1);
      for (VertexId v : t.preorder()) CHECK(t.vertex_weight(v) <= t.vertex_weight(f.v_max));
    }
  }

  TEST_CASE("renewal decomposition of simple trees") {
    const double b[] = {2.0, 1.5, 1.8};
    const auto rd = renewal_decompose(make_path(b));
    CHECK(rd.cutpoints.size() == 2);
    CHECK(rd.r() == 3);
    for (const auto& c : rd.components) CHECK(c.tree.edge_count() == 1);

    const double s[] = {2.0, 3.0, 1.5};
    const auto star = renewal_decompose(make_star(s));
    CHECK(star.cutpoints.empty());
    CHECK(star.r() == 1);
  }

  TEST_CASE("cutpoints") {
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto t = random_tree(i);
      for (VertexId c : find_cutpoints(t)) {
        CHECK_FALSE(t.is_leaf(c));
        for (VertexId v : t.preorder()) {
          if (v != c && t.vertex_depth(v) == t.vertex_depth(c)) CHECK(t.is_leaf(v));
        }
      }
    }
  }

  TEST_CASE("concatenation") {
    const auto edge = two_edges();
    RenewalComponent one{edge, std::nullopt, {}};
    CHECK(concatenate({one}) == edge);
    RenewalComponent first{edge, VertexId{1}, {}};
    const double b[] = {2.0, 2.0};
    CHECK(concatenate({first, one}) == make_path(b));
    CHECK_THROWS_AS(concatenate({}), Error);
    CHECK_THROWS_AS(concatenate({one, one}), Error);

    for (std::uint64_t i = 0; i < 100; ++i) {
      const auto t = random_tree(i, 5.0);
      const auto rd = renewal_decompose(t);
      CHECK(concatenate(rd.components) == t);
      const auto again = renewal_decompose(concatenate(rd.components));
      REQUIRE(again.r() == rd.r());
      for (std::size_t k = 0; k < rd.r(); ++k) CHECK(again.components[k].tree == rd.components[k].tree);
    }
  }
}
