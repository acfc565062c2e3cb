#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gwtrap/error.hpp"
#include "gwtrap/renewal.hpp"
#include "gwtrap/stats.hpp"

using namespace gwtrap;

namespace {

const OffspringLaw kRefH = OffspringLaw::truncated_geometric(1.0 / 3.0, 12);
const BiasLaw kRefNu = BiasLaw::uniform(1.2, 2.0);

}  // namespace

TEST_SUITE("renewal_calc") {
  TEST_CASE("chi closed forms") {
    const auto half = OffspringLaw::two_point(0.5);
    CHECK(solve_chi(half, BiasLaw::point_mass(2.0)).value == doctest::Approx(1.0).epsilon(1e-12));
    for (double beta : {1.1, 1.5, 3.7}) {
      const auto h = OffspringLaw({0.5, 0.3, 0.2});
      CHECK(std::abs(solve_chi(h, BiasLaw::point_mass(beta)).value -
                     std::log(1.0 / h.mean()) / std::log(beta)) < 1e-10);
    }
    CHECK_THROWS_AS(solve_chi(OffspringLaw({1.0}), kRefNu), Error);
  }

  TEST_CASE("chi for a uniform bias law") {
    // High-precision root of (2^{c+1} - 1.2^{c+1})/(0.8 (c+1)) = 2.
    const auto r = solve_chi(OffspringLaw::two_point(0.5), kRefNu);
    CHECK(r.value == doctest::Approx(1.4599022288763253787).epsilon(1e-12));
    CHECK(std::abs(r.residual) < 1e-12);
    CHECK(solve_chi(kRefH, kRefNu).value == doctest::Approx(1.4599355194160588655).epsilon(1e-12));
  }

  TEST_CASE("chi decreases when atoms increase") {
    const auto h = OffspringLaw({0.5, 0.3, 0.2});
    const auto low = BiasLaw(ScalarLaw::point_mixture({1.5, 2.5}, {0.5, 0.5}), true);
    const auto high = BiasLaw(ScalarLaw::point_mixture({1.6, 2.5}, {0.5, 0.5}), true);
    CHECK(solve_chi(h, high).value < solve_chi(h, low).value);
  }

  TEST_CASE("kappa") {
    CHECK(solve_kappa(ScalarLaw::point_mass(1.0), 0.5).value ==
          doctest::Approx(std::numbers::ln2).epsilon(1e-12));
    CHECK(solve_kappa(ScalarLaw::point_mass(2.5), 0.3).value ==
          doctest::Approx(std::log(1.0 / 0.3) / 2.5).epsilon(1e-12));
    const auto k = solve_kappa(ScalarLaw::uniform(0.5, 1.0), 0.5);
    CHECK(k.value == doctest::Approx(0.91264783134038844733).epsilon(1e-12));
    CHECK(std::abs(k.residual) < 1e-12);
    CHECK_THROWS_AS(solve_kappa(ScalarLaw::point_mass(0.0), 0.5), Error);
    CHECK_THROWS_AS(solve_kappa(ScalarLaw::point_mass(1.0), 1.0), Error);
  }

  TEST_CASE("renewal constants") {
    const auto unit = renewal_constants_c2_c3(ScalarLaw::point_mass(1.0), 0.5, 0.5);
    CHECK(unit.tilted_mean == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(unit.c2 == doctest::Approx(1.0 / (2.0 * std::numbers::ln2)).epsilon(1e-12));
    CHECK(unit.c3 == doctest::Approx(unit.c2).epsilon(1e-15));
    const auto u = renewal_constants_c2_c3(ScalarLaw::uniform(0.5, 1.0), 0.5, 0.5);
    CHECK(u.tilted_mean == doctest::Approx(1.537895670255410587).epsilon(1e-10));
    CHECK(u.c2 == doctest::Approx(0.71247544228670469304).epsilon(1e-10));
  }

  TEST_CASE("count laws") {
    for (const auto& y : {CountLaw::geometric(0.4), CountLaw::shifted_tail(0.4, 0.5),
                          CountLaw::asymptotic_geometric(0.4)}) {
      double mass = 0.0;
      for (std::uint64_t k = 0; k < 200; ++k) mass += y.pmf(k);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(y.survival(0) == 1.0);
      double tail = 0.0;
      for (std::uint64_t k = 5; k < 200; ++k) tail += y.pmf(k);
      CHECK(y.survival(5) == doctest::Approx(tail).epsilon(1e-12));
    }
    CHECK_THROWS_AS(CountLaw::geometric(0.0), Error);
    CHECK_THROWS_AS(CountLaw::shifted_tail(0.5, 2.0), Error);
  }

  TEST_CASE("defective renewal with unit increments") {
    std::vector<double> grid;
    for (int i = 0; i <= 12; ++i) grid.push_back(0.5 * i);
    const std::uint64_t n = 200'000;
    const auto t = simulate_defective_renewal(ScalarLaw::point_mass(1.0), CountLaw::geometric(0.5),
                                              grid, n, 1, RenewalEstimator::Crude, 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double exact = std::pow(0.5, std::ceil(grid[i]));
      CHECK(std::abs(t.survival[i] - exact) <= 3.0 * std::sqrt(exact * (1 - exact) / n) + 1e-15);
    }
  }

  TEST_CASE("zero count gives zero") {
    RngStream rng(1, 1);
    for (int i = 0; i < 100; ++i) {
      CHECK(sample_defective_renewal(ScalarLaw::uniform(0.5, 1.0), CountLaw::constant(0), rng) == 0.0);
    }
    CHECK_THROWS_AS(simulate_defective_renewal(ScalarLaw::uniform(0.5, 1.0), CountLaw::constant(2),
                                               {1.0}, 10, 1, RenewalEstimator::Tilted),
                    Error);
  }

  TEST_CASE("tilted estimator agrees with crude sampling") {
    const auto x = ScalarLaw::uniform(0.5, 1.0);
    const auto y = CountLaw::geometric(0.5);
    const std::vector<double> grid = {2.0, 4.0, 6.0};
    const auto crude = simulate_defective_renewal(x, y, grid, 400'000, 3, RenewalEstimator::Crude, 1);
    const auto tilted = simulate_defective_renewal(x, y, grid, 400'000, 3, RenewalEstimator::Tilted, 1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double se = std::hypot(crude.std_error[i], tilted.std_error[i]);
      CHECK(std::abs(crude.survival[i] - tilted.survival[i]) < 4.0 * se);
    }
  }

  TEST_CASE("results do not depend on worker count") {
    const auto x = ScalarLaw::uniform(0.5, 1.0);
    const auto y = CountLaw::geometric(0.5);
    const auto a = simulate_defective_renewal(x, y, {1.0, 3.0}, 200'000, 5, RenewalEstimator::Crude, 1);
    const auto b = simulate_defective_renewal(x, y, {1.0, 3.0}, 200'000, 5, RenewalEstimator::Crude, 3);
    CHECK(a.n_exceed == b.n_exceed);
  }

  TEST_CASE("d2") {
    const auto h = OffspringLaw::two_point(0.4);
    const double beta = 1.8;
    const auto d = compute_d2(h, BiasLaw::point_mass(beta));
    CHECK(d.d2 == doctest::Approx(0.6 / (d.chi * std::log(beta))).epsilon(1e-9));
    const auto ref = compute_d2(kRefH, kRefNu);
    CHECK(ref.log_moment == doctest::Approx(0.97975477576135990937).epsilon(1e-10));
    CHECK(ref.d2 == doctest::Approx(0.3495864013014535484).epsilon(1e-7));
    // Relabeling atoms leaves the integral unchanged.
    const auto ab = compute_d2(h, BiasLaw(ScalarLaw::point_mixture({1.5, 2.5}, {0.3, 0.7}), true));
    const auto ba = compute_d2(h, BiasLaw(ScalarLaw::point_mixture({2.5, 1.5}, {0.7, 0.3}), true));
    CHECK(ab.d2 == doctest::Approx(ba.d2).epsilon(1e-12));
  }

  TEST_CASE("d1 Monte Carlo") {
    const auto zero = estimate_d1(kRefH, kRefNu, {0}, 100'000, 1, 1);
    const auto lm = compute_d2(kRefH, kRefNu);
    const double scale = 1.0 / (lm.chi * kRefH.mean() * lm.log_moment);
    CHECK(zero.rows[0].mean == doctest::Approx(kRefH.h(0)).epsilon(0.02));
    CHECK(zero.d1 == doctest::Approx(scale * zero.rows[0].mean).epsilon(1e-12));
    const auto a = estimate_d1(kRefH, kRefNu, {2, 4}, 50'000, 9, 1);
    const auto b = estimate_d1(kRefH, kRefNu, {2, 4}, 50'000, 9, 2);
    CHECK(a.d1 == b.d1);
    CHECK(a.rows.size() == 2);
    CHECK_THROWS_AS(estimate_d1(kRefH, kRefNu, {4, 2}, 10, 1, 1), Error);
  }

  TEST_CASE("c1") {
    const double chi = 1.4599355194160588655;
    CHECK(compute_c1(1.0, kRefH, chi) ==
          doctest::Approx(std::pow(2.0, -chi) * 0.29721421320462554862).epsilon(1e-12));
    const auto h = OffspringLaw({0.5, 0.3, 0.2});
    CHECK(compute_c1(2.0, h, 1.0) == doctest::Approx(2.0 * 0.5 / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(compute_c1(0.0, h, 1.0), Error);
  }

  TEST_CASE("geometric-exponential coupling") {
    RngStream rng(1, 2);
    std::vector<std::uint64_t> counts(40, 0);
    std::vector<double> e;
    const double p = 0.5;
    for (int i = 0; i < 100'000; ++i) {
      const auto d = couple_geometric_exponential(p, rng);
      CHECK(d.g == static_cast<std::uint64_t>(std::floor(d.e)));
      ++counts[std::min<std::uint64_t>(d.g, 39)];
      e.push_back(d.e);
    }
    std::vector<double> probs(40);
    for (std::size_t k = 0; k < 40; ++k) probs[k] = (1 - p) * std::pow(p, double(k));
    probs[39] = std::pow(p, 39.0);
    CHECK(chi_square_gof(counts, probs, 0).p_value > 0.01);
    const double rate = std::log(1.0 / p);
    CHECK(ks_one_sample(e, [rate](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-rate * x); })
              .p_value > 0.01);
  }
}
