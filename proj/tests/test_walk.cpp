#include <doctest.h>

#include <cmath>

#include "gwtrap/error.hpp"
#include "gwtrap/sampler.hpp"
#include "gwtrap/walk.hpp"

using namespace gwtrap;

namespace {

const OffspringLaw kRefH = OffspringLaw::truncated_geometric(1.0 / 3.0, 12);
const BiasLaw kRefNu = BiasLaw::uniform(1.2, 2.0);

WeightedTree random_tree(std::uint64_t i, double above) {
  RngStream rng(5, i);
  return sample_conditioned(kRefH, kRefNu, above, rng, 10'000'000).tree;
}

double probability_of(const StepLaw& law, VertexId v) {
  for (const auto& [w, p] : law.neighbors) {
    if (w == v) return p;
  }
  return 0.0;
}

}  // namespace

TEST_SUITE("walk_engine") {
  TEST_CASE("step law") {
    const double two[] = {2.0, 3.0};
    const auto star = make_star(two);
    const auto root = step_distribution(star, kRoot);
    CHECK(probability_of(root, VertexId{1}) == doctest::Approx(0.4));
    CHECK(probability_of(root, VertexId{2}) == doctest::Approx(0.6));
    const auto leaf = step_distribution(star, VertexId{1});
    CHECK(leaf.neighbors.size() == 1);
    CHECK(probability_of(leaf, kRoot) == 1.0);

    const double p2[] = {1.5, 2.0};
    const auto path = make_path(p2);
    const auto mid = step_distribution(path, VertexId{1});
    CHECK(probability_of(mid, kRoot) == doctest::Approx(1.0 / 3.0));
    CHECK(probability_of(mid, VertexId{2}) == doctest::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(step_distribution(WeightedTree(), kRoot), Error);
    try {
      step_distribution(WeightedTree(), kRoot);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UndefinedWalk);
    }
  }

  TEST_CASE("step laws sum to one") {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const auto t = random_tree(i, 10.0);
      for (VertexId v : t.preorder()) {
        double sum = 0.0;
        for (const auto& [w, p] : step_distribution(t, v).neighbors) {
          CHECK(p > 0.0);
          sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("forced trajectories") {
    RngStream rng(1, 1);
    const double one[] = {2.0};
    const auto edge = make_path(one);
    const double three[] = {1.5, 2.5, 3.5};
    const auto star = make_star(three);
    for (int i = 0; i < 100; ++i) {
      const auto s = simulate_return(edge, rng);
      CHECK(s.steps == 2);
      CHECK(s.deep);
      CHECK(simulate_return(star, rng).steps == 2);
      const auto c = simulate_return_conditioned_de(edge, rng, 10);
      CHECK(c.steps == 2);
      CHECK(c.rejected_count == 0);
    }
    CHECK_THROWS_AS(simulate_return(WeightedTree(), rng), Error);
  }

  TEST_CASE("exact means on small trees") {
    const double one[] = {2.0};
    const auto edge = make_path(one);
    CHECK(exact_mean_return(edge, VertexId{1}) == doctest::Approx(1.0));
    CHECK(exact_mean_return(edge, kRoot) == doctest::Approx(2.0));
    CHECK(mean_return_closed_form(edge) == doctest::Approx(2.0));
    const double two[] = {2.0, 3.0};
    CHECK(mean_return_closed_form(make_star(two)) == doctest::Approx(2.0));
    CHECK_THROWS_AS(mean_return_closed_form(WeightedTree()), Error);
  }

  TEST_CASE("commute identity and root formula") {
    for (std::uint64_t i = 0; i < 100; ++i) {
      const auto t = random_tree(i, i < 50 ? 1.5 : 50.0);
      CHECK(std::abs(exact_mean_return(t, t.v_child()) - (2.0 * t.omega_star() - 1.0)) < 1e-9);
      CHECK(std::abs(exact_mean_return(t, kRoot) - mean_return_closed_form(t)) < 1e-9);
    }
  }

  TEST_CASE("p_de") {
    const double one[] = {1.7};
    CHECK(compute_p_de(make_path(one)) == 1.0);
    const double two[] = {1.5, 2.0};
    CHECK(compute_p_de(make_path(two)) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(compute_p_de(WeightedTree()), Error);
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto t = random_tree(i, 10.0);
      CHECK(compute_p_de(t) >= 1.0 - 1.0 / kRefNu.q());
    }
  }

  TEST_CASE("hitting probabilities") {
    const double p3[] = {1.5, 2.0, 1.3};
    const auto path = make_path(p3);
    CHECK(exact_hitting_prob(path, VertexId{2}, VertexId{2}, kRoot) == 1.0);
    CHECK(exact_hitting_prob(path, kRoot, VertexId{2}, kRoot) == 0.0);
    const double up = exact_hitting_prob(path, VertexId{1}, kRoot, VertexId{3});
    const double down = exact_hitting_prob(path, VertexId{1}, VertexId{3}, kRoot);
    CHECK(up + down == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(exact_hitting_prob(path, VertexId{1}, VertexId{2}, VertexId{2}), Error);
  }

  TEST_CASE("Monte Carlo agrees with the solvers") {
    for (std::uint64_t i = 0; i < 3; ++i) {
      const auto t = random_tree(100 + i, 10.0);
      Walker w(t);
      RngStream rng(2, i);
      const int n = 100'000;
      double sum = 0.0, sum_sq = 0.0;
      int deep = 0;
      for (int k = 0; k < n; ++k) {
        const auto s = w.simulate_return(rng);
        sum += static_cast<double>(s.steps);
        sum_sq += static_cast<double>(s.steps) * static_cast<double>(s.steps);
        deep += s.deep;
      }
      const double mean = sum / n;
      const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1));
      CHECK(std::abs(mean - exact_mean_return(t, kRoot)) < 3.0 * se);
      double beta_sum = 0.0;
      for (VertexId c : t.children(kRoot)) beta_sum += t.bias(c);
      const double p = t.bias(t.v_child()) / beta_sum * compute_p_de(t);
      CHECK(std::abs(deep / double(n) - p) < 3.0 * std::sqrt(p * (1.0 - p) / n));
    }
  }

  TEST_CASE("conditioned returns are deep") {
    const auto t = random_tree(7, 20.0);
    Walker w(t);
    RngStream rng(2, 9);
    for (int i = 0; i < 200; ++i) CHECK(w.simulate_return_conditioned_de(rng, 1'000'000).deep);
  }

  TEST_CASE("step cap") {
    const auto t = random_tree(8, 50.0);
    Walker w(t, 3);
    RngStream rng(2, 10);
    bool capped = false;
    for (int i = 0; i < 1000 && !capped; ++i) {
      try {
        w.simulate_return(rng);
      } catch (const Error& e) {
        capped = e.kind() == ErrorKind::CapExceeded;
      }
    }
    CHECK(capped);
  }
}
