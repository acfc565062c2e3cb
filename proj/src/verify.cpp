// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>

#include "gwtrap/decomp.hpp"
#include "gwtrap/error.hpp"
#include "gwtrap/parallel.hpp"
#include "gwtrap/renewal.hpp"
#include "gwtrap/sampler.hpp"
#include "gwtrap/walk.hpp"

namespace gwtrap {

namespace {

constexpr std::uint16_t kTagCorpus = 0x7002;
constexpr std::uint16_t kTagMonteCarlo = 0x7004;
constexpr std::uint16_t kTagPool = 0x7005;
constexpr std::uint16_t kTagRenewal = 0x7007;
constexpr std::uint16_t kTagDecomp = 0x7009;
constexpr std::uint16_t kTagCoupling = 0x700D;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CriterionResult criterion(int id, std::string title, double budget_seconds) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  r.budget_seconds = budget_seconds;
  return r;
}

/// Lazily built inputs shared by several criteria.
class Context {
 public:
  explicit Context(const ExperimentConfig& cfg) : cfg_(cfg) {}

  const ExperimentConfig& cfg() const { return cfg_; }

  double chi() {
    if (!chi_) chi_ = solve_chi(cfg_.h, cfg_.nu).value;
    return *chi_;
  }

  /// 50 P* trees followed by 50 trees conditioned on ω(T) > 50.
  const std::vector<WeightedTree>& corpus() {
    if (corpus_.empty()) {
      for (std::uint64_t i = 0; i < 100; ++i) {
        RngStream rng(cfg_.seed, stream_id(kTagCorpus, i));
        corpus_.push_back(i < 50 ? sample_nontrivial(cfg_.h, cfg_.nu, rng).tree
                                 : sample_conditioned(cfg_.h, cfg_.nu, 50.0, rng, 100'000'000).tree);
      }
    }
    return corpus_;
  }

  const std::vector<PoolRecord>& pool() {
    if (pool_.empty()) pool_ = sample_pool(cfg_, cfg_.tail.trees, kTagPool);
    return pool_;
  }

 private:
  const ExperimentConfig& cfg_;
  std::optional<double> chi_;
  std::vector<WeightedTree> corpus_;
  std::vector<PoolRecord> pool_;
};

// --- 1 ---------------------------------------------------------------------------

CriterionResult chi_closed_form(Context&) {
  auto r = criterion(1, "chi closed form for point-mass bias", 1.0);
  const std::vector<OffspringLaw> laws = {OffspringLaw::two_point(0.5),
                                          OffspringLaw::truncated_geometric(1.0 / 3.0, 12),
                                          OffspringLaw({0.5, 0.3, 0.2}),
                                          OffspringLaw({0.9, 0.1}),
                                          OffspringLaw({0.7, 0.1, 0.05, 0.05, 0.1})};
  double worst = 0.0;
  Json rows = Json::array();
  for (const auto& h : laws) {
    for (double beta : {1.05, 1.5, 2.0, 3.7, 10.0}) {
      const double got = solve_chi(h, BiasLaw::point_mass(beta)).value;
      const double want = std::log(1.0 / h.mean()) / std::log(beta);
      worst = std::max(worst, std::abs(got - want));
      rows.push_back({{"m_h", h.mean()}, {"beta", beta}, {"chi", got}, {"closed_form", want}});
    }
  }
  r.passed = worst < 1e-10;
  r.summary = fmt("%zu cases, max |chi - log(1/m)/log beta| = %.3g (< 1e-10)", rows.size(), worst);
  r.detail = {{"max_error", worst}, {"cases", rows}};
  return r;
}

// --- 2, 3 ------------------------------------------------------------------------

CriterionResult commute_identity(Context& ctx) {
  auto r = criterion(2, "commute identity E^{v_child} H = 2 omega_* - 1", 5.0);
  double worst = 0.0;
  for (const auto& t : ctx.corpus()) {
    const double got = exact_mean_return(t, t.v_child());
    worst = std::max(worst, std::abs(got - (2.0 * t.omega_star() - 1.0)));
  }
  r.passed = worst < 1e-9;
  r.summary = fmt("100 trees, max abs error %.3g (< 1e-9)", worst);
  r.detail = {{"trees", ctx.corpus().size()}, {"max_abs_error", worst}};
  return r;
}

CriterionResult root_return(Context& ctx) {
  auto r = criterion(3, "root return E^phi H = 2(omega - 1)/mu(phi)", 5.0);
  double worst = 0.0, worst_ratio = 1.0;
  std::size_t differing = 0;
  Json examples = Json::array();
  for (const auto& t : ctx.corpus()) {
    const double exact = exact_mean_return(t, kRoot);
    const double closed = mean_return_closed_form(t);
    const double offspring = mean_return_offspring_normalized(t);
    worst = std::max(worst, std::abs(exact - closed));
    double mu = 0.0;
    for (VertexId c : t.children(kRoot)) mu += t.bias(c);
    const double n = static_cast<double>(t.child_count(kRoot));
    if (mu != n) {
      ++differing;
      worst_ratio = std::max(worst_ratio, offspring / exact);
      if (examples.size() < 5) {
        examples.push_back({{"omega", t.total_weight()},
                            {"N", n},
                            {"mu_phi", mu},
                            {"exact", exact},
                            {"two_over_N", offspring},
                            {"discrepancy", offspring - exact}});
      }
    }
  }
  r.passed = worst < 1e-9;
  r.summary = fmt("max abs error %.3g (< 1e-9); (2/N)(omega-1) differs on %zu/100 trees "
                  "(mu != N), up to %.3fx the exact mean",
                  worst, differing, worst_ratio);
  r.detail = {{"max_abs_error", worst},
              {"two_over_N_differs", differing},
              {"two_over_N_max_ratio", worst_ratio},
              {"examples", examples}};
  return r;
}

// --- 4 ---------------------------------------------------------------------------

CriterionResult monte_carlo_vs_exact(Context& ctx) {
  auto r = criterion(4, "simulated returns vs exact mean and P(DE)", 120.0);
  const auto& cfg = ctx.cfg();
  constexpr std::uint64_t kWalks = 100'000;
  struct Row {
    double exact, mean, se, p_de, p_hat, p_se;
  };
  auto rows = map_blocks(20, 1, cfg.workers, [&](BlockRange b) {
    RngStream tree_rng(cfg.seed, stream_id(kTagMonteCarlo, 2 * b.index));
    const auto t = sample_conditioned(cfg.h, cfg.nu, 10.0, tree_rng, 100'000'000).tree;
    Walker walker(t);
    RngStream rng(cfg.seed, stream_id(kTagMonteCarlo, 2 * b.index + 1));
    double sum = 0.0, sum_sq = 0.0;
    std::uint64_t deep = 0;
    for (std::uint64_t i = 0; i < kWalks; ++i) {
      const auto s = walker.simulate_return(rng);
      const double x = static_cast<double>(s.steps);
      sum += x;
      sum_sq += x * x;
      deep += s.deep;
    }
    const double n = static_cast<double>(kWalks);
    Row row;
    row.exact = exact_mean_return(t, kRoot);
    row.mean = sum / n;
    row.se = std::sqrt((sum_sq / n - row.mean * row.mean) / (n - 1.0));
    double beta_sum = 0.0;
    for (VertexId c : t.children(kRoot)) beta_sum += t.bias(c);
    row.p_de = t.bias(t.v_child()) / beta_sum * compute_p_de(t);
    row.p_hat = static_cast<double>(deep) / n;
    row.p_se = std::sqrt(row.p_de * (1.0 - row.p_de) / n);
    return row;
  });
  int failures = 0;
  double worst_z = 0.0;
  Json detail = Json::array();
  for (const auto& row : rows) {
    const double z_mean = std::abs(row.mean - row.exact) / row.se;
    const double z_de = std::abs(row.p_hat - row.p_de) / row.p_se;
    failures += (z_mean > 3.0) + (z_de > 3.0);
    worst_z = std::max({worst_z, z_mean, z_de});
    detail.push_back({{"exact_mean", row.exact},
                      {"sample_mean", row.mean},
                      {"z_mean", z_mean},
                      {"p_de_exact", row.p_de},
                      {"p_de_sample", row.p_hat},
                      {"z_de", z_de}});
  }
  r.passed = failures == 0;
  r.summary = fmt("20 trees x 1e5 walks, %d of 40 comparisons beyond 3 se (max |z| = %.2f)",
                  failures, worst_z);
  r.detail = {{"trees", detail}};
  return r;
}

// --- 5, 6 -------------------------------------------------------------------------

CriterionResult weight_tail(Context& ctx) {
  auto r = criterion(5, "omega(T) tail slope vs -chi", 180.0);
  const auto& pool = ctx.pool();
  std::vector<double> values;
  values.reserve(pool.size());
  for (const auto& p : pool) values.push_back(p.omega);
  const auto tail = tail_from_values("omega", std::move(values), pool.size(), ctx.cfg(), ctx.chi());
  const double err = std::abs(tail.fit.slope + ctx.chi());
  r.passed = err <= 0.15;
  r.summary = fmt("%zu trees, window [%g, %g]: slope %.4f +- %.4f, chi %.4f, |slope + chi| = %.4f "
                  "(<= 0.15)",
                  pool.size(), tail.window.first, tail.window.second, tail.fit.slope,
                  tail.fit.slope_std_error, ctx.chi(), err);
  r.detail = to_json(tail);
  return r;
}

CriterionResult base_weight_constant(Context& ctx) {
  auto r = criterion(6, "omega(v_base) tail constant vs d2", 180.0);
  const auto& pool = ctx.pool();
  std::vector<double> values;
  values.reserve(pool.size());
  for (const auto& p : pool) values.push_back(p.omega_base);
  const auto d2 = compute_d2(ctx.cfg().h, ctx.cfg().nu);
  auto tail = tail_from_values("omega_base", std::move(values), pool.size(), ctx.cfg(), d2.chi);
  const double ratio = tail.constant.constant / d2.d2;
  r.passed = std::abs(ratio - 1.0) <= 0.30;
  r.summary = fmt("fitted constant %.4f (rel se %.3f) vs d2 %.4f (alpha %.6f): ratio %.3f "
                  "(within +-30%%); slope %.4f",
                  tail.constant.constant, tail.constant.rel_std_error, d2.d2, d2.alpha, ratio,
                  tail.fit.slope);
  tail.comparison["d2"] = d2.d2;
  tail.comparison["alpha"] = d2.alpha;
  tail.comparison["constant_over_d2"] = ratio;
  r.detail = to_json(tail);
  return r;
}

// --- 7 ---------------------------------------------------------------------------

CriterionResult defective_renewal(Context& ctx) {
  auto r = criterion(7, "defective renewal tails", 120.0);
  const auto& cfg = ctx.cfg();
  const double p = 0.5;

  // X ≡ 1: Z = Y and P(Z >= u) = p^{⌈u⌉}.
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(0.5 * i);
  const std::uint64_t n1 = 1'000'000;
  const auto unit = simulate_defective_renewal(ScalarLaw::point_mass(1.0), CountLaw::geometric(p),
                                               grid, n1, cfg.seed, RenewalEstimator::Crude,
                                               cfg.workers, 0x7070);
  double worst_z = 0.0;
  bool unit_ok = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double exact = std::pow(p, std::ceil(grid[i]));
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(n1));
    const double diff = std::abs(unit.survival[i] - exact);
    if (diff > 3.0 * se + 1e-15) unit_ok = false;
    if (se > 0.0) worst_z = std::max(worst_z, diff / se);
  }

  // X ~ U[0.5, 1]: e^{κu} P(Z >= u) against c₂ at u = 20.
  const auto x = ScalarLaw::uniform(0.5, 1.0);
  const auto constants = renewal_constants_c2_c3(x, p, 1.0 - p);
  const std::uint64_t n2 = 10'000'000;
  const auto far = simulate_defective_renewal(x, CountLaw::geometric(p), {20.0}, n2, cfg.seed,
                                              RenewalEstimator::Tilted, cfg.workers, 0x7071);
  const double scaled = std::exp(constants.kappa * 20.0) * far.survival[0];
  const double scaled_ratio = scaled / constants.c2;
  const bool far_ok = std::abs(scaled_ratio - 1.0) <= 0.10;

  // Asymptotically geometric Y: same decay rate as the geometric case.
  std::vector<double> edges;
  for (int i = 0; i <= 20; ++i) edges.push_back(6.0 + 0.5 * i);
  auto rate_of = [&](const CountLaw& y, std::uint16_t tag) {
    const auto t = simulate_defective_renewal(x, y, edges, n2, cfg.seed, RenewalEstimator::Crude,
                                              cfg.workers, tag);
    std::vector<double> centers, counts;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      centers.push_back(0.5 * (edges[i] + edges[i + 1]));
      counts.push_back(static_cast<double>(t.n_exceed[i] - t.n_exceed[i + 1]));
    }
    return fit_exponential_rate(centers, counts);
  };
  const auto geo = rate_of(CountLaw::geometric(p), 0x7072);
  const auto asym = rate_of(CountLaw::asymptotic_geometric(p), 0x7073);
  const double joint_se = std::hypot(geo.rate_std_error, asym.rate_std_error);
  const double z_rate = std::abs(geo.rate - asym.rate) / joint_se;
  const bool rate_ok = z_rate <= 3.0;

  r.passed = unit_ok && far_ok && rate_ok;
  r.summary = fmt("X=1: max |z| %.2f over %zu grid points; U[0.5,1]: e^{ku}P(Z>=20)/c2 = %.4f "
                  "(c2 %.5f, within +-10%%); decay rates %.4f +- %.4f vs %.4f +- %.4f "
                  "(|z| %.2f <= 3, kappa %.4f)",
                  worst_z, grid.size(), scaled_ratio, constants.c2, geo.rate,
                  geo.rate_std_error, asym.rate, asym.rate_std_error, z_rate, constants.kappa);
  r.detail = {{"unit_increments", {{"passed", unit_ok}, {"max_z", worst_z}, {"samples", n1}}},
              {"uniform_increments",
               {{"passed", far_ok},
                {"kappa", constants.kappa},
                {"c2", constants.c2},
                {"survival_at_20", far.survival[0]},
                {"survival_std_error", far.std_error[0]},
                {"scaled_over_c2", scaled_ratio},
                {"estimator", "exponentially tilted increments"},
                {"samples", n2}}},
              {"asymptotic_count",
               {{"passed", rate_ok},
                {"window", {edges.front(), edges.back()}},
                {"geometric_rate", geo.rate},
                {"geometric_rate_std_error", geo.rate_std_error},
                {"asymptotic_rate", asym.rate},
                {"asymptotic_rate_std_error", asym.rate_std_error},
                {"z", z_rate},
                {"samples", n2}}}};
  return r;
}

// --- 8 ---------------------------------------------------------------------------

CriterionResult exponential_law(Context& ctx) {
  auto r = criterion(8, "exponential limit of deep returns", 600.0);
  const auto res = run_exponential_law(ctx.cfg());
  const double z = std::abs(res.mean - 1.0) / res.mean_std_error;
  const bool enough = res.trees >= ctx.cfg().explaw.min_trees && res.pooled >= 10'000;
  r.passed = enough && res.ks.statistic <= 0.05 && z <= 3.0;
  r.summary = fmt("u = %.2f, %llu trees, n = %llu: KS %.4f (<= 0.05), mean %.4f +- %.4f "
                  "(|z| %.2f <= 3); u = 0 control KS %.4f",
                  res.u, static_cast<unsigned long long>(res.trees),
                  static_cast<unsigned long long>(res.pooled), res.ks.statistic, res.mean,
                  res.mean_std_error, z, res.control_ks.statistic);
  r.detail = to_json(res);
  r.detail.erase("per_tree");
  r.detail["mean_z"] = z;
  r.detail["ks_target_note"] = "0.05 is an acceptance choice for this artifact";
  return r;
}

// --- 9 ---------------------------------------------------------------------------

struct DecompCheck {
  bool outgrowth = true, product = true, fso = true, roundtrip = true;
  double worst_product = 0.0;
};

DecompCheck check_decompositions(const WeightedTree& t) {
  DecompCheck c;
  const std::size_t n = t.size();

  const auto og = outgrowth_decompose(t);
  std::vector<int> seen(n, 0);
  for (const auto& set : og.outgrowths) {
    for (VertexId v : set) ++seen[v.index];
  }
  for (int s : seen) c.outgrowth &= s == 1;
  c.outgrowth &= og.spine == t.root_path(t.find_v_base());
  for (std::size_t i = 0; i < og.spine.size(); ++i) {
    c.outgrowth &= !og.outgrowths[i].empty() && og.outgrowths[i].front() == og.spine[i];
  }
  c.outgrowth &= og.outgrowths.back().size() == 1;

  for (std::size_t k = 0; k <= t.depth(); ++k) {
    const auto w = w_k_terms(t, k);
    const auto split = split_E_k(t, k);
    const double product = t.vertex_weight(split.pivot) * split.e_k.tree.total_weight();
    const double rel = std::abs(w.w - product) / product;
    c.worst_product = std::max(c.worst_product, rel);
    c.product &= rel <= 1e-12 && split.e_k.tree.size() + split.e_k_star.tree.size() == n + 1;
  }

  const auto fso = fso_decompose(t);
  std::vector<int> edge(n, 0);
  for (std::size_t i = 1; i < fso.foundation.size(); ++i) ++edge[fso.foundation[i].index];
  for (std::size_t i = 1; i < fso.spine.size(); ++i) ++edge[fso.spine[i].index];
  for (std::size_t i = 0; i < fso.offshoots.size(); ++i) {
    for (VertexId v : fso.offshoots[i]) {
      if (v != fso.spine[i]) ++edge[v.index];
    }
  }
  for (std::size_t v = 1; v < n; ++v) c.fso &= edge[v] == 1;
  c.fso &= fso.offshoots.back().size() == 1;

  c.roundtrip = concatenate(renewal_decompose(t).components) == t;
  return c;
}

CriterionResult decomposition_exactness(Context& ctx) {
  auto r = criterion(9, "decomposition exactness", 30.0);
  const auto& cfg = ctx.cfg();
  constexpr std::uint64_t kTrees = 10'000;
  auto checks = map_blocks(kTrees, 500, cfg.workers, [&](BlockRange b) {
    RngStream rng(cfg.seed, stream_id(kTagDecomp, b.index));
    std::vector<DecompCheck> out;
    for (std::uint64_t i = b.begin; i < b.end; ++i) {
      const auto t = i % 2 == 0 ? sample_tree(cfg.h, cfg.nu, rng)
                                : sample_conditioned(cfg.h, cfg.nu, 20.0, rng, 100'000'000).tree;
      out.push_back(check_decompositions(t));
    }
    return out;
  });
  std::uint64_t bad[4] = {0, 0, 0, 0};
  double worst = 0.0;
  for (const auto& block : checks) {
    for (const auto& c : block) {
      bad[0] += !c.outgrowth;
      bad[1] += !c.product;
      bad[2] += !c.fso;
      bad[3] += !c.roundtrip;
      worst = std::max(worst, c.worst_product);
    }
  }
  r.passed = bad[0] + bad[1] + bad[2] + bad[3] == 0;
  r.summary = fmt("10000 trees: outgrowth %llu, w_k product %llu (max rel %.2g), FSO %llu, "
                  "renewal round trip %llu failures",
                  static_cast<unsigned long long>(bad[0]), static_cast<unsigned long long>(bad[1]),
                  worst, static_cast<unsigned long long>(bad[2]),
                  static_cast<unsigned long long>(bad[3]));
  r.detail = {{"trees", kTrees},
              {"outgrowth_failures", bad[0]},
              {"product_failures", bad[1]},
              {"max_product_rel_error", worst},
              {"fso_failures", bad[2]},
              {"roundtrip_failures", bad[3]}};
  return r;
}

// --- 10 --------------------------------------------------------------------------

CriterionResult law_identity(Context& ctx) {
  auto r = criterion(10, "law of E_k given D >= k vs T given D = k", 120.0);
  const auto rows = run_law_identity(ctx.cfg());
  bool ok = !rows.empty();
  std::string parts;
  for (const auto& row : rows) {
    ok &= row.size_ks.p_value > 0.01;
    parts += fmt("%sk=%zu p=%.3f", parts.empty() ? "" : ", ", row.k, row.size_ks.p_value);
  }
  r.passed = ok;
  r.summary = "two-sample KS on vertex counts: " + parts + " (each > 0.01)";
  r.detail = to_json(rows);
  return r;
}

// --- 11 --------------------------------------------------------------------------

CriterionResult structure_tails(Context& ctx) {
  auto r = criterion(11, "outgrowth and component size tails", 300.0);
  const auto res = run_structure_tails(ctx.cfg());
  bool ok = true;
  double steepest = -1e300;
  std::string failures;
  for (const auto& at : res.per_u) {
    for (const auto& t : at.tails) {
      const bool good = t.fitted && t.fit.slope < 0.0 && t.monotone;
      if (!good) {
        ok = false;
        failures += fmt(" %s_%zu@u=%g", t.family.c_str(), t.index, at.u);
      }
      if (t.fitted) steepest = std::max(steepest, t.fit.slope);
    }
  }
  r.passed = ok;
  std::string trees;
  for (const auto& at : res.per_u) {
    trees += fmt("%s%llu@%g", trees.empty() ? "" : ", ", static_cast<unsigned long long>(at.trees),
                 at.u);
  }
  r.summary = fmt("%zu u values (trees %s): all slopes negative and survival monotone; "
                  "flattest slope %.3f",
                  res.per_u.size(), trees.c_str(), steepest);
  if (!ok) r.summary += "; failing:" + failures;
  r.detail = to_json(res);
  return r;
}

// --- 12 --------------------------------------------------------------------------

CriterionResult renewal_components(Context& ctx) {
  auto r = criterion(12, "renewal component structure", 180.0);
  const auto res = run_renewal_component_stats(ctx.cfg());
  const bool geo = res.geometric_fit.p_value > 0.01;
  const bool corr = std::abs(res.size_correlation) < 0.02;
  const bool cor = res.regeneration_ks.p_value > 0.01;
  r.passed = geo && corr && cor;
  r.summary = fmt("r-1 geometric (q %.4f) chi-square p %.3f; corr(|C1|,|C2|) = %.4f over %llu "
                  "pairs; regeneration KS p %.3f over %llu pairs",
                  res.continue_probability, res.geometric_fit.p_value, res.size_correlation,
                  static_cast<unsigned long long>(res.pairs), res.regeneration_ks.p_value,
                  static_cast<unsigned long long>(res.regeneration_pairs));
  r.detail = to_json(res);
  return r;
}

// --- 13 --------------------------------------------------------------------------

CriterionResult coupling(Context& ctx) {
  auto r = criterion(13, "geometric-exponential coupling", 5.0);
  bool ok = true;
  Json rows = Json::array();
  std::string parts;
  std::uint64_t tag = 0;
  for (double p : {0.2, 0.5, 0.9}) {
    RngStream rng(ctx.cfg().seed, stream_id(kTagCoupling, tag++));
    constexpr std::uint64_t kDraws = 100'000;
    std::vector<double> es;
    std::vector<std::uint64_t> counts;
    bool bounded = true;
    for (std::uint64_t i = 0; i < kDraws; ++i) {
      const auto d = couple_geometric_exponential(p, rng);
      bounded &= std::abs(static_cast<double>(d.g) - d.e) <= 1.0;
      if (d.g >= counts.size()) counts.resize(d.g + 1, 0);
      ++counts[d.g];
      es.push_back(d.e);
    }
    std::vector<double> probs(counts.size());
    for (std::size_t k = 0; k < probs.size(); ++k) {
      probs[k] = (1.0 - p) * std::pow(p, static_cast<double>(k));
    }
    probs.back() = std::pow(p, static_cast<double>(probs.size() - 1));
    const auto chi = chi_square_gof(counts, probs, 0);
    const double rate = -std::log(p);
    const auto ks = ks_one_sample(std::move(es), [rate](double v) {
      return v <= 0.0 ? 0.0 : -std::expm1(-rate * v);
    });
    const bool pass = bounded && chi.p_value > 0.01 && ks.p_value > 0.01;
    ok &= pass;
    parts += fmt("%sp=%.1f: chi2 p %.3f, KS p %.3f", parts.empty() ? "" : "; ", p, chi.p_value,
                 ks.p_value);
    rows.push_back({{"p", p},
                    {"bounded", bounded},
                    {"chi_square_p", chi.p_value},
                    {"ks_p", ks.p_value},
                    {"ks", ks.statistic}});
  }
  r.passed = ok;
  r.summary = "1e5 draws each, |G - E| <= 1 always; " + parts;
  r.detail = {{"cases", rows}};
  return r;
}

}  // namespace

namespace {

Json tail_constants(Context& ctx) {
  const auto& cfg = ctx.cfg();
  const auto& pool = ctx.pool();
  const auto d2 = compute_d2(cfg.h, cfg.nu);
  const auto ret = run_return_tail(cfg, &pool);
  std::vector<double> omega;
  omega.reserve(pool.size());
  for (const auto& p : pool) omega.push_back(p.omega);
  const auto weight = tail_from_values("omega", std::move(omega), pool.size(), cfg, d2.chi);
  const auto d1 = estimate_d1(cfg.h, cfg.nu, cfg.d1.k_list, cfg.d1.samples, cfg.seed, cfg.workers);

  auto empirical = [](const TailResult& t) {
    return Json{{"value", t.constant.constant},
                {"rel_std_error", t.constant.rel_std_error},
                {"window", {t.window.first, t.window.second}},
                {"provenance", "fixed-slope prefactor fit of the empirical tail"}};
  };
  Json rows = Json::array();
  for (const auto& r : d1.rows) {
    rows.push_back({{"k", r.k}, {"mean", r.mean}, {"std_error", r.std_error}, {"hits", r.hits}});
  }
  Json j;
  j["chi"] = {{"value", d2.chi}, {"provenance", "root of the moment equation (bisection)"}};
  j["alpha"] = {{"value", d2.alpha}, {"provenance", "pgf iteration"}};
  j["d2"] = {{"value", d2.d2}, {"provenance", "closed form with quadrature"}};
  j["d1"] = {{"value", d1.d1},
             {"std_error", d1.std_error},
             {"stabilized", d1.stabilized},
             {"samples", d1.samples},
             {"rows", rows},
             {"provenance", "Monte Carlo over the depth-k slices"}};
  j["c1_published"] = {{"value", ret.c1_published},
                       {"provenance", "published closed form applied to the Monte Carlo d1"}};
  j["c1_heuristic_offspring_normalized"] = {
      {"value", ret.c1_heuristic_offspring},
      {"provenance", "one-big-jump heuristic for (2/N)(omega - 1)"}};
  j["c1_heuristic_exact"] = {
      {"value", ret.c1_heuristic_exact},
      {"provenance", "one-big-jump heuristic for 2(omega - 1)/mu(root), Monte Carlo ratio moment"}};
  j["empirical"] = {{"omega", empirical(weight)},
                    {"mean_return", empirical(ret.exact)},
                    {"mean_return_offspring_normalized", empirical(ret.offspring_normalized)}};
  j["childless_roots"] = ret.childless_roots;
  j["note"] = "c1 candidates are reported side by side; none is gated";
  return j;
}

}  // namespace

VerifyRun run_verify_all(const VerifyOptions& options) {
  using Check = CriterionResult (*)(Context&);
  const Check checks[] = {chi_closed_form,     commute_identity,        root_return,
                          monte_carlo_vs_exact, weight_tail,            base_weight_constant,
                          defective_renewal,   exponential_law,         decomposition_exactness,
                          law_identity,        structure_tails,         renewal_components,
                          coupling};
  Context ctx(options.cfg);
  VerifyRun run;
  auto& out = run.criteria;
  for (int id = 1; id <= 13; ++id) {
    if (!options.only.empty() && !options.only.contains(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = checks[id - 1](ctx);
    } catch (const std::exception& e) {
      r.id = id;
      r.title = "criterion " + std::to_string(id);
      r.passed = false;
      r.summary = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
      r.passed = false;
      r.summary += fmt("; over the %.0f s runtime budget", r.budget_seconds);
    }
    if (options.on_result) options.on_result(r);
    out.push_back(std::move(r));
  }
  if (options.report_constants) {
    try {
      run.constants = tail_constants(ctx);
    } catch (const std::exception& e) {
      run.constants = {{"error", e.what()}};
    }
  }
  return run;
}

std::string format_line(const CriterionResult& r) {
  return fmt("[%s] %2d %s: %s (%.1f s)", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(),
             r.summary.c_str(), r.seconds);
}

Json verify_report(const VerifyRun& run) {
  Json j;
  bool all = true;
  Json items = Json::array();
  for (const auto& r : run.criteria) {
    all &= r.passed;
    items.push_back({{"id", r.id},
                     {"title", r.title},
                     {"passed", r.passed},
                     {"summary", r.summary},
                     {"seconds", r.seconds},
                     {"budget_seconds", r.budget_seconds},
                     {"detail", r.detail}});
  }
  j["passed"] = all;
  j["criteria"] = items;
  j["constants"] = run.constants;
  return j;
}

}  // namespace gwtrap
