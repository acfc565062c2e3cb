#include <doctest.h>

#include <cmath>

#include "gwtrap/error.hpp"
#include "gwtrap/sampler.hpp"
#include "gwtrap/stats.hpp"

using namespace gwtrap;

namespace {

const OffspringLaw kRefH = OffspringLaw::truncated_geometric(1.0 / 3.0, 12);
const BiasLaw kRefNu = BiasLaw::uniform(1.2, 2.0);

}  // namespace

TEST_SUITE("gw_sampler") {
  TEST_CASE("offspring law validation") {
    CHECK_THROWS_AS(OffspringLaw({0.2, 0.3}), Error);
    CHECK_THROWS_AS(OffspringLaw({0.2, 0.0, 0.8}), Error);  // m = 1.6
    CHECK_THROWS_AS(OffspringLaw({1.2, -0.2}), Error);
    CHECK(kRefH.mean() == doctest::Approx(0.49999184606371862146).epsilon(1e-14));
    CHECK_THROWS_AS(BiasLaw::uniform(0.8, 2.0), Error);
  }

  TEST_CASE("h_0 = 1 gives the singleton") {
    const OffspringLaw dead({1.0});
    RngStream rng(1, 1);
    for (int i = 0; i < 100; ++i) CHECK(sample_tree(dead, kRefNu, rng).size() == 1);
    CHECK_THROWS_AS(sample_nontrivial(dead, kRefNu, rng), Error);
  }

  TEST_CASE("mean tree size") {
    // E|V(T)| = 1/(1 - m_h), frozen from the high-precision oracle.
    constexpr double kExpected = 1.999967384786759227;
    RngStream rng(1, 2);
    const int n = 100'000;
    std::vector<double> sizes;
    for (int i = 0; i < n; ++i) sizes.push_back(static_cast<double>(sample_tree(kRefH, kRefNu, rng).size()));
    const auto m = mean_with_error(sizes);
    CHECK(std::abs(m.mean - kExpected) < 3.0 * m.std_error);
  }

  TEST_CASE("depth cdf") {
    const OffspringLaw h({0.6, 0.3, 0.1});
    CHECK(depth_cdf(h, 0) == doctest::Approx(0.6));
    CHECK(depth_cdf(h, 1) == doctest::Approx(0.816).epsilon(1e-15));
    double prev = 0.0;
    for (std::size_t n = 0; n < 200; ++n) {
      const double g = depth_cdf(h, n);
      CHECK(g >= prev);
      CHECK(g <= 1.0);
      prev = g;
    }
    CHECK(prev == doctest::Approx(1.0));
  }

  TEST_CASE("empirical depth law") {
    const OffspringLaw h({0.6, 0.3, 0.1});
    RngStream rng(1, 3);
    const int n = 100'000;
    std::vector<std::uint64_t> counts(6, 0);
    for (int i = 0; i < n; ++i) {
      const auto d = sample_tree(h, kRefNu, rng).depth();
      ++counts[std::min<std::size_t>(d, 5)];
    }
    for (std::size_t d = 0; d < 5; ++d) {
      const double p = depth_pmf(h, d);
      const double se = std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(static_cast<double>(counts[d]) / n - p) < 3.0 * se);
    }
  }

  TEST_CASE("alpha") {
    const auto two = estimate_alpha(OffspringLaw::two_point(0.4));
    CHECK(two.alpha == doctest::Approx(0.6).epsilon(1e-10));
    // High-precision pgf iteration oracle.
    const auto a = estimate_alpha(OffspringLaw({0.6, 0.3, 0.1}));
    CHECK(a.alpha == doctest::Approx(0.3421838456606899147).epsilon(1e-7));
    const auto ref = estimate_alpha(kRefH);
    CHECK(ref.alpha == doctest::Approx(0.25001641084723090562).epsilon(1e-7));
    CHECK(ref.alpha > 0.0);
    CHECK(ref.alpha <= 1.0);
    CHECK_THROWS_AS(estimate_alpha(OffspringLaw({1.0})), Error);
  }

  TEST_CASE("conditioned sampling") {
    RngStream rng(1, 4);
    const auto zero = sample_conditioned(kRefH, kRefNu, 0.0, rng, 10);
    CHECK(zero.attempts == 1);
    for (int i = 0; i < 50; ++i) {
      CHECK(sample_conditioned(kRefH, kRefNu, 15.0, rng, 10'000'000).tree.total_weight() > 15.0);
    }
    CHECK_THROWS_AS(sample_conditioned(kRefH, kRefNu, 1e9, rng, 100), Error);
    CHECK_THROWS_AS(sample_conditioned(kRefH, kRefNu, -1.0, rng, 100), Error);
  }

  TEST_CASE("nontrivial sampling acceptance") {
    RngStream rng(1, 5);
    std::uint64_t attempts = 0;
    const int n = 20'000;
    for (int i = 0; i < n; ++i) {
      const auto s = sample_nontrivial(kRefH, kRefNu, rng);
      CHECK(s.tree.edge_count() >= 1);
      attempts += s.attempts;
    }
    const double rate = n / static_cast<double>(attempts);
    const double p = 1.0 - kRefH.h(0);
    CHECK(std::abs(rate - p) < 3.0 * std::sqrt(p * (1.0 - p) / attempts));
  }

  TEST_CASE("root offspring and bias marginals") {
    RngStream rng(1, 6);
    const int n = 100'000;
    std::vector<std::uint64_t> counts(kRefH.max_offspring() + 1, 0);
    std::vector<double> first_bias;
    for (int i = 0; i < n; ++i) {
      const auto t = sample_tree(kRefH, kRefNu, rng);
      ++counts[t.child_count(kRoot)];
      if (t.child_count(kRoot) > 0) first_bias.push_back(t.bias(t.children(kRoot)[0]));
    }
    std::vector<double> probs(kRefH.pmf().begin(), kRefH.pmf().end());
    CHECK(chi_square_gof(counts, probs, 0).p_value > 0.01);
    const auto ks = ks_one_sample(first_bias, [](double x) { return kRefNu.law().cdf(x); });
    CHECK(ks.p_value > 0.01);
  }

  TEST_CASE("determinism") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(sample_tree(kRefH, kRefNu, a) == sample_tree(kRefH, kRefNu, b));
  }

  TEST_CASE("node cap") {
    SamplerCaps caps;
    caps.node_cap = 3;
    RngStream rng(1, 8);
    bool capped = false;
    for (int i = 0; i < 1000 && !capped; ++i) {
      try {
        sample_tree(kRefH, kRefNu, rng, caps);
      } catch (const Error& e) {
        capped = e.kind() == ErrorKind::CapExceeded;
      }
    }
    CHECK(capped);
  }
}
