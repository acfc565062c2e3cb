// SPDX-License-Identifier: Apache-2.0
#include "gwtrap/experiments.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "gwtrap/decomp.hpp"
#include "gwtrap/error.hpp"
#include "gwtrap/parallel.hpp"
#include "gwtrap/renewal.hpp"
#include "gwtrap/sampler.hpp"
#include "gwtrap/walk.hpp"

namespace gwtrap {

namespace {

// Stream tags, one per experiment phase.
constexpr std::uint16_t kTagTailPool = 0x0100;
constexpr std::uint16_t kTagExpPool = 0x0200;
constexpr std::uint16_t kTagExpWalk = 0x0201;
constexpr std::uint16_t kTagExpControl = 0x0202;
constexpr std::uint16_t kTagStructure = 0x0300;
constexpr std::uint16_t kTagRenewalR = 0x0400;
constexpr std::uint16_t kTagRenewalPairs = 0x0401;
constexpr std::uint16_t kTagRegeneration = 0x0402;
constexpr std::uint16_t kTagLawIdentity = 0x0500;
constexpr std::uint16_t kTagHeuristic = 0x0600;

constexpr std::uint64_t kPoolBlock = 4096;

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) {
    throw Error(ErrorKind::InvalidArgument, std::string(where) + ": expected an object");
  }
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.contains(key)) {
      throw Error(ErrorKind::InvalidArgument,
                  std::string(where) + ": unknown key \"" + key + "\"");
    }
  }
}

template <class T>
void read(const Json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

void require_positive(std::uint64_t v, const char* what) {
  if (v == 0) throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be positive");
}

std::vector<double> parse_grid(const Json& g) {
  if (g.is_array()) {
    auto v = g.get<std::vector<double>>();
    if (v.empty() || !std::is_sorted(v.begin(), v.end())) {
      throw Error(ErrorKind::InvalidArgument, "tail.grid must be a nonempty increasing list");
    }
    return v;
  }
  check_keys(g, {"lo", "hi", "points"}, "tail.grid");
  return log_grid(g.at("lo").get<double>(), g.at("hi").get<double>(),
                  g.at("points").get<std::size_t>());
}

/// Runs `fn(rng, out)` `per_block` times in each of a sequence of blocks and
/// keeps the first `target` items in block order.
template <class T, class Fn>
std::vector<T> collect_in_order(std::uint64_t seed, std::uint16_t tag, std::uint64_t target,
                                std::uint64_t per_block, unsigned workers, Fn fn,
                                std::uint64_t max_blocks = std::uint64_t{1} << 24) {
  constexpr std::uint64_t kRound = 64;
  std::vector<T> out;
  out.reserve(target);
  std::uint64_t next = 0;
  while (out.size() < target) {
    if (next >= max_blocks) {
      throw Error(ErrorKind::BudgetExhausted,
                  "collect: budget of " + std::to_string(max_blocks * per_block) +
                      " attempts exhausted with " + std::to_string(out.size()) + " of " +
                      std::to_string(target) + " samples");
    }
    const std::uint64_t base = next;
    auto parts = map_blocks(kRound, 1, workers, [&](BlockRange r) {
      RngStream rng(seed, stream_id(tag, base + r.index));
      std::vector<T> local;
      for (std::uint64_t i = 0; i < per_block; ++i) fn(rng, local);
      return local;
    });
    next += kRound;
    for (auto& part : parts) {
      for (auto& item : part) {
        if (out.size() == target) break;
        out.push_back(std::move(item));
      }
    }
  }
  return out;
}

std::uint32_t as_u32(std::size_t v) { return static_cast<std::uint32_t>(v); }

}  // namespace

// --- config --------------------------------------------------------------------

OffspringLaw parse_offspring(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "truncated_geometric") {
    check_keys(j, {"kind", "ratio", "max_k"}, "offspring");
    return OffspringLaw::truncated_geometric(j.at("ratio").get<double>(),
                                             j.at("max_k").get<std::size_t>());
  }
  if (kind == "two_point") {
    check_keys(j, {"kind", "p"}, "offspring");
    return OffspringLaw::two_point(j.at("p").get<double>());
  }
  if (kind == "pmf") {
    check_keys(j, {"kind", "pmf"}, "offspring");
    return OffspringLaw(j.at("pmf").get<std::vector<double>>());
  }
  throw Error(ErrorKind::InvalidArgument, "offspring: unknown kind \"" + kind + "\"");
}

ScalarLaw parse_scalar(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    check_keys(j, {"kind", "a", "b", "non_lattice"}, "law");
    return ScalarLaw::uniform(j.at("a").get<double>(), j.at("b").get<double>());
  }
  if (kind == "log_uniform") {
    check_keys(j, {"kind", "a", "b", "non_lattice"}, "law");
    return ScalarLaw::log_uniform(j.at("a").get<double>(), j.at("b").get<double>());
  }
  if (kind == "point_mass") {
    check_keys(j, {"kind", "value", "non_lattice"}, "law");
    return ScalarLaw::point_mass(j.at("value").get<double>());
  }
  if (kind == "point_mixture") {
    check_keys(j, {"kind", "atoms", "weights", "non_lattice"}, "law");
    return ScalarLaw::point_mixture(j.at("atoms").get<std::vector<double>>(),
                                    j.at("weights").get<std::vector<double>>());
  }
  throw Error(ErrorKind::InvalidArgument, "law: unknown kind \"" + kind + "\"");
}

BiasLaw parse_bias(const Json& j) {
  ScalarLaw law = parse_scalar(j);
  const bool non_lattice = j.value("non_lattice", law.is_continuous());
  return BiasLaw(std::move(law), non_lattice);
}

ExperimentConfig parse_config(const Json& j) {
  try {
    check_keys(j, {"seed", "workers", "out", "offspring", "bias", "tail", "explaw",
                   "structure", "renewal", "law_identity", "d1"},
               "config");
    ExperimentConfig c;
    read(j, "seed", c.seed);
    read(j, "workers", c.workers);
    read(j, "out", c.out_dir);
    if (j.contains("offspring")) {
      c.offspring_spec = j.at("offspring");
      c.h = parse_offspring(c.offspring_spec);
    }
    if (j.contains("bias")) {
      c.bias_spec = j.at("bias");
      c.nu = parse_bias(c.bias_spec);
    }
    if (j.contains("tail")) {
      const auto& t = j.at("tail");
      check_keys(t, {"trees", "grid", "window"}, "tail");
      read(t, "trees", c.tail.trees);
      if (t.contains("grid")) c.tail.grid = parse_grid(t.at("grid"));
      if (t.contains("window")) {
        if (t.at("window").is_null()) {
          c.tail.window.reset();
        } else {
          const auto w = t.at("window").get<std::vector<double>>();
          if (w.size() != 2 || !(w[0] > 0.0 && w[1] > w[0])) {
            throw Error(ErrorKind::InvalidArgument, "tail.window must be [lo, hi] with 0 < lo < hi");
          }
          c.tail.window = std::pair{w[0], w[1]};
        }
      }
    }
    if (j.contains("explaw")) {
      const auto& e = j.at("explaw");
      check_keys(e, {"budget", "min_trees", "walks_per_tree", "control_trees", "max_attempts"},
                 "explaw");
      read(e, "budget", c.explaw.budget);
      read(e, "min_trees", c.explaw.min_trees);
      read(e, "walks_per_tree", c.explaw.walks_per_tree);
      read(e, "control_trees", c.explaw.control_trees);
      read(e, "max_attempts", c.explaw.max_attempts);
    }
    if (j.contains("structure")) {
      const auto& s = j.at("structure");
      check_keys(s, {"trees", "u_grid", "B", "k_max", "min_count", "bare_bound_threshold"},
                 "structure");
      read(s, "trees", c.structure.trees);
      read(s, "u_grid", c.structure.u_grid);
      read(s, "B", c.structure.B);
      read(s, "k_max", c.structure.k_max);
      read(s, "min_count", c.structure.min_count);
      read(s, "bare_bound_threshold", c.structure.bare_bound_threshold);
    }
    if (j.contains("renewal")) {
      const auto& r = j.at("renewal");
      check_keys(r, {"samples", "pairs", "regeneration_u", "regeneration_samples"}, "renewal");
      read(r, "samples", c.renewal.samples);
      read(r, "pairs", c.renewal.pairs);
      read(r, "regeneration_u", c.renewal.regeneration_u);
      read(r, "regeneration_samples", c.renewal.regeneration_samples);
    }
    if (j.contains("law_identity")) {
      const auto& l = j.at("law_identity");
      check_keys(l, {"samples", "k_list"}, "law_identity");
      read(l, "samples", c.law_identity.samples);
      read(l, "k_list", c.law_identity.k_list);
    }
    if (j.contains("d1")) {
      const auto& d = j.at("d1");
      check_keys(d, {"k_list", "samples"}, "d1");
      read(d, "k_list", c.d1.k_list);
      read(d, "samples", c.d1.samples);
    }

    require_positive(c.tail.trees, "tail.trees");
    require_positive(c.explaw.budget, "explaw.budget");
    require_positive(c.explaw.min_trees, "explaw.min_trees");
    require_positive(c.explaw.walks_per_tree, "explaw.walks_per_tree");
    require_positive(c.structure.trees, "structure.trees");
    require_positive(c.renewal.samples, "renewal.samples");
    require_positive(c.law_identity.samples, "law_identity.samples");
    require_positive(c.d1.samples, "d1.samples");
    if (c.explaw.budget <= c.explaw.min_trees) {
      throw Error(ErrorKind::InvalidArgument, "explaw.budget must exceed explaw.min_trees");
    }
    if (c.structure.u_grid.empty() || !std::is_sorted(c.structure.u_grid.begin(),
                                                      c.structure.u_grid.end())) {
      throw Error(ErrorKind::InvalidArgument, "structure.u_grid must be nonempty and increasing");
    }
    if (c.structure.u_grid.front() <= std::numbers::e) {
      throw Error(ErrorKind::InvalidArgument,
                  "structure.u_grid values must exceed e (B-bareness needs ω(T) > e)");
    }
    if (!(c.structure.B > 0.0)) throw Error(ErrorKind::InvalidArgument, "structure.B must be > 0");
    if (!(c.renewal.regeneration_u > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "renewal.regeneration_u must be > 0");
    }
    if (c.d1.k_list.empty() || !std::is_sorted(c.d1.k_list.begin(), c.d1.k_list.end())) {
      throw Error(ErrorKind::InvalidArgument, "d1.k_list must be nonempty and increasing");
    }
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(e.byte, "config " + path + ": " + e.what());
  }
  return parse_config(j);
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out"] = c.out_dir;
  j["offspring"] = c.offspring_spec;
  j["bias"] = c.bias_spec;
  j["tail"] = {{"trees", c.tail.trees}, {"grid", c.tail.grid}};
  j["tail"]["window"] = c.tail.window ? Json{c.tail.window->first, c.tail.window->second}
                                      : Json(nullptr);
  j["explaw"] = {{"budget", c.explaw.budget},
                 {"min_trees", c.explaw.min_trees},
                 {"walks_per_tree", c.explaw.walks_per_tree},
                 {"control_trees", c.explaw.control_trees},
                 {"max_attempts", c.explaw.max_attempts}};
  j["structure"] = {{"trees", c.structure.trees},
                    {"u_grid", c.structure.u_grid},
                    {"B", c.structure.B},
                    {"k_max", c.structure.k_max},
                    {"min_count", c.structure.min_count},
                    {"bare_bound_threshold", c.structure.bare_bound_threshold}};
  j["renewal"] = {{"samples", c.renewal.samples},
                  {"pairs", c.renewal.pairs},
                  {"regeneration_u", c.renewal.regeneration_u},
                  {"regeneration_samples", c.renewal.regeneration_samples}};
  j["law_identity"] = {{"samples", c.law_identity.samples},
                       {"k_list", c.law_identity.k_list}};
  j["d1"] = {{"k_list", c.d1.k_list}, {"samples", c.d1.samples}};
  return j;
}

// --- pools and tails -------------------------------------------------------------

std::vector<PoolRecord> sample_pool(const ExperimentConfig& cfg, std::uint64_t trees,
                                    std::uint16_t tag) {
  auto blocks = map_blocks(trees, kPoolBlock, cfg.workers, [&](BlockRange r) {
    RngStream rng(cfg.seed, stream_id(tag, r.index));
    std::vector<PoolRecord> out;
    out.reserve(r.end - r.begin);
    for (std::uint64_t i = r.begin; i < r.end; ++i) {
      const auto t = sample_tree(cfg.h, cfg.nu, rng);
      PoolRecord rec;
      rec.omega = t.total_weight();
      rec.omega_base = t.vertex_weight(t.find_v_base());
      rec.depth = as_u32(t.depth());
      rec.root_children = as_u32(t.child_count(kRoot));
      if (rec.root_children > 0) {
        rec.mean_return = exact_mean_return(t, kRoot);
        rec.mean_return_offspring = mean_return_offspring_normalized(t);
      }
      out.push_back(rec);
    }
    return out;
  });
  std::vector<PoolRecord> pool;
  pool.reserve(trees);
  for (auto& b : blocks) pool.insert(pool.end(), b.begin(), b.end());
  return pool;
}

TailResult tail_from_values(std::string quantity, std::vector<double> values,
                            std::uint64_t total, const ExperimentConfig& cfg, double chi) {
  TailResult r;
  r.quantity = std::move(quantity);
  r.chi = chi;
  r.table = survival_on_grid(std::move(values), cfg.tail.grid, total);
  if (cfg.tail.window) {
    r.window = *cfg.tail.window;
    r.window_from_config = true;
    std::uint64_t top = 0;
    for (std::size_t i = 0; i < r.table.grid.size(); ++i) {
      if (r.table.grid[i] <= r.window.second) top = r.table.n_exceed[i];
    }
    if (top < 100) {
      r.warnings.push_back("only " + std::to_string(top) +
                           " exceedances at the top of the configured fit window");
    }
  } else {
    r.window = default_fit_window(r.table);
    if (r.table.n_exceed.back() < 100) {
      r.warnings.push_back("fewer than 100 exceedances at the largest grid point; window shrunk");
    }
  }
  r.fit = fit_power_law(r.table, r.window.first, r.window.second);
  r.constant = fit_prefactor(r.table, -chi, r.window.first, r.window.second);
  r.comparison["slope_minus_chi"] = r.fit.slope + chi;
  return r;
}

TailResult run_tail_experiment(const ExperimentConfig& cfg, const std::vector<PoolRecord>* pool) {
  std::vector<PoolRecord> own;
  if (!pool) pool = &(own = sample_pool(cfg, cfg.tail.trees, kTagTailPool));
  std::vector<double> values;
  values.reserve(pool->size());
  for (const auto& p : *pool) values.push_back(p.omega);
  const double chi = solve_chi(cfg.h, cfg.nu).value;
  auto r = tail_from_values("omega", std::move(values), pool->size(), cfg, chi);
  const auto d1 = estimate_d1(cfg.h, cfg.nu, cfg.d1.k_list, cfg.d1.samples, cfg.seed, cfg.workers);
  r.comparison["d1"] = d1.d1;
  r.comparison["d1_std_error"] = d1.std_error;
  r.comparison["d1_stabilized"] = d1.stabilized;
  r.comparison["constant_over_d1"] = r.constant.constant / d1.d1;
  return r;
}

TailResult run_base_weight_tail(const ExperimentConfig& cfg, const std::vector<PoolRecord>* pool) {
  std::vector<PoolRecord> own;
  if (!pool) pool = &(own = sample_pool(cfg, cfg.tail.trees, kTagTailPool));
  std::vector<double> values;
  values.reserve(pool->size());
  for (const auto& p : *pool) values.push_back(p.omega_base);
  const auto d2 = compute_d2(cfg.h, cfg.nu);
  auto r = tail_from_values("omega_base", std::move(values), pool->size(), cfg, d2.chi);
  r.comparison["alpha"] = d2.alpha;
  r.comparison["d2"] = d2.d2;
  r.comparison["constant_over_d2"] = r.constant.constant / d2.d2;
  return r;
}

ReturnTailResult run_return_tail(const ExperimentConfig& cfg, const std::vector<PoolRecord>* pool) {
  std::vector<PoolRecord> own;
  if (!pool) pool = &(own = sample_pool(cfg, cfg.tail.trees, kTagTailPool));
  ReturnTailResult out;
  std::vector<double> exact, offspring;
  for (const auto& p : *pool) {
    if (p.root_children == 0) {
      ++out.childless_roots;
      continue;
    }
    exact.push_back(p.mean_return);
    offspring.push_back(p.mean_return_offspring);
  }
  const double chi = solve_chi(cfg.h, cfg.nu).value;
  out.exact = tail_from_values("mean_return", std::move(exact), pool->size(), cfg, chi);
  out.offspring_normalized = tail_from_values("mean_return_offspring_normalized",
                                              std::move(offspring), pool->size(), cfg, chi);

  const auto d1 = estimate_d1(cfg.h, cfg.nu, cfg.d1.k_list, cfg.d1.samples, cfg.seed, cfg.workers);
  out.d1 = d1.d1;
  out.d1_std_error = d1.std_error;
  out.c1_published = compute_c1(d1.d1, cfg.h, chi);

  // One big jump below the root: given N = k, ω - 1 exceeds x through a
  // single child with probability ≈ k d₁ E β^χ x^{-χ} = k d₁ x^{-χ}/m_h.
  double sum_offspring = 0.0, sum_exact = 0.0;
  for (std::size_t k = 1; k <= cfg.h.max_offspring(); ++k) {
    const double kd = static_cast<double>(k);
    sum_offspring += cfg.h.h(k) * std::pow(kd, 1.0 - chi);
    // For 2(ω - 1)/μ(φ) the jump through child 1 carries E (β_1/μ(φ))^χ.
    RngStream rng(cfg.seed, stream_id(kTagHeuristic, k));
    constexpr int kDraws = 100'000;
    double acc = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double b1 = cfg.nu.sample(rng);
      double mu = b1;
      for (std::size_t j = 1; j < k; ++j) mu += cfg.nu.sample(rng);
      acc += std::pow(b1 / mu, chi);
    }
    sum_exact += cfg.h.h(k) * kd * acc / kDraws;
  }
  out.c1_heuristic_offspring = std::pow(2.0, chi) * d1.d1 * sum_offspring / cfg.h.mean();
  out.c1_heuristic_exact = std::pow(2.0, chi) * d1.d1 * sum_exact;
  for (auto* t : {&out.exact, &out.offspring_normalized}) {
    t->comparison["c1_published"] = out.c1_published;
    t->comparison["constant_over_c1_published"] = t->constant.constant / out.c1_published;
  }
  out.exact.comparison["c1_heuristic"] = out.c1_heuristic_exact;
  out.offspring_normalized.comparison["c1_heuristic"] = out.c1_heuristic_offspring;
  return out;
}

// --- exponential law -------------------------------------------------------------

namespace {

struct WalkBatch {
  std::vector<double> normalized;
  TreeRatio ratio;
};

WalkBatch normalized_returns(const WeightedTree& t, std::uint64_t walks, std::uint64_t seed,
                             std::uint64_t stream, std::uint64_t max_attempts) {
  WalkBatch b;
  Walker walker(t);
  RngStream rng(seed, stream);
  b.ratio.omega = t.total_weight();
  b.ratio.omega_star = t.omega_star();
  b.ratio.p_de = compute_p_de(t);
  const double scale = 2.0 * b.ratio.omega_star / b.ratio.p_de;
  for (std::uint64_t i = 0; i < walks; ++i) {
    const auto s = walker.simulate_return_conditioned_de(rng, max_attempts);
    b.ratio.rejected += s.rejected_count;
    b.normalized.push_back(static_cast<double>(s.steps) / scale);
  }
  const auto m = mean_with_error(b.normalized);
  b.ratio.ratio_mean = m.mean;
  b.ratio.ratio_std_error = m.std_error;
  return b;
}

double unit_exponential_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }

}  // namespace

ExpLawResult run_exponential_law(const ExperimentConfig& cfg) {
  const auto& e = cfg.explaw;
  auto pass = [&](auto keep) {
    return map_blocks(e.budget, kPoolBlock, cfg.workers, [&](BlockRange r) {
      RngStream rng(cfg.seed, stream_id(kTagExpPool, r.index));
      using Item = decltype(keep(std::declval<WeightedTree&&>()));
      std::vector<typename Item::value_type> out;
      for (std::uint64_t i = r.begin; i < r.end; ++i) {
        if (auto v = keep(sample_tree(cfg.h, cfg.nu, rng))) out.push_back(std::move(*v));
      }
      return out;
    });
  };
  std::vector<double> weights;
  weights.reserve(e.budget);
  for (auto& b : pass([](WeightedTree&& t) { return std::optional<double>(t.total_weight()); })) {
    weights.insert(weights.end(), b.begin(), b.end());
  }
  std::nth_element(weights.begin(), weights.begin() + static_cast<std::ptrdiff_t>(e.min_trees),
                   weights.end(), std::greater<>());
  ExpLawResult out;
  out.u = weights[e.min_trees];
  const double u = out.u;
  std::vector<WeightedTree> trees;
  for (auto& b : pass([u](WeightedTree&& t) {
         return t.total_weight() > u && t.depth() >= 1 ? std::optional<WeightedTree>(std::move(t))
                                                        : std::nullopt;
       })) {
    for (auto& t : b) trees.push_back(std::move(t));
  }
  out.trees = trees.size();

  auto batches = map_blocks(trees.size(), 1, cfg.workers, [&](BlockRange r) {
    return normalized_returns(trees[r.index], e.walks_per_tree, cfg.seed,
                              stream_id(kTagExpWalk, r.index), e.max_attempts);
  });
  std::vector<double> pooled, tree_means;
  for (auto& b : batches) {
    pooled.insert(pooled.end(), b.normalized.begin(), b.normalized.end());
    tree_means.push_back(b.ratio.ratio_mean);
    out.per_tree.push_back(b.ratio);
  }
  out.pooled = pooled.size();
  const auto between = mean_with_error(tree_means);
  out.mean = between.mean;
  out.mean_std_error = between.std_error;
  out.ks = ks_one_sample(std::move(pooled), unit_exponential_cdf);

  auto control = map_blocks(e.control_trees, 1, cfg.workers, [&](BlockRange r) {
    RngStream rng(cfg.seed, stream_id(kTagExpControl, 2 * r.index));
    const auto t = sample_nontrivial(cfg.h, cfg.nu, rng).tree;
    return normalized_returns(t, e.walks_per_tree, cfg.seed,
                              stream_id(kTagExpControl, 2 * r.index + 1), e.max_attempts);
  });
  std::vector<double> control_pooled;
  for (auto& b : control) {
    control_pooled.insert(control_pooled.end(), b.normalized.begin(), b.normalized.end());
  }
  if (!control_pooled.empty()) {
    out.control_mean = mean_with_error(control_pooled).mean;
    out.control_ks = ks_one_sample(std::move(control_pooled), unit_exponential_cdf);
  }
  return out;
}

// --- structure -------------------------------------------------------------------

namespace {

struct StructureRecord {
  double omega = 0.0;
  std::array<std::uint32_t, 3> outgrowth{};  ///< |V(J_0)|, |V(J_1)|, |V(J_2)|
  std::array<std::uint32_t, 3> component{};  ///< |V(C_1)|, |V(C_2)|, |V(C_3)|
  bool bare = false;
  bool bare_bounds_checked = false;
  bool bare_base_bound = false;
  bool bare_depth_bound = false;
};

SizeTail size_tail(std::string family, std::size_t index, const std::vector<std::uint32_t>& sizes,
                   const ExperimentConfig::Structure& s) {
  SizeTail t;
  t.family = std::move(family);
  t.index = index;
  const double n = static_cast<double>(sizes.size());
  t.count.assign(s.k_max, 0);
  for (auto v : sizes) {
    for (std::size_t k = 1; k <= std::min<std::size_t>(v, s.k_max); ++k) ++t.count[k - 1];
  }
  std::vector<double> x, y, w;
  for (std::size_t k = 1; k <= s.k_max; ++k) {
    const double sk = static_cast<double>(t.count[k - 1]) / n;
    t.survival.push_back(sk);
    if (k >= 2 && sk > t.survival[k - 2]) t.monotone = false;
    // Sizes every sample reaches carry no tail information.
    if (t.count[k - 1] >= s.min_count && t.count[k - 1] < sizes.size()) {
      x.push_back(static_cast<double>(k));
      y.push_back(std::log(sk));
      // Var(log ŝ) ≈ (1 - s)/(n s).
      w.push_back(n * sk / (1.0 - sk));
    }
  }
  if (x.size() >= 3) {
    t.fit = fit_line(x, y, w);
    t.fitted = true;
  } else {
    t.note = "fewer than 3 sizes reach " + std::to_string(s.min_count) + " samples";
  }
  return t;
}

}  // namespace

StructureResult run_structure_tails(const ExperimentConfig& cfg) {
  const auto& s = cfg.structure;
  const double u_min = s.u_grid.front();
  const double log_q = std::log(cfg.nu.Q());
  auto blocks = map_blocks(s.trees, kPoolBlock, cfg.workers, [&](BlockRange r) {
    RngStream rng(cfg.seed, stream_id(kTagStructure, r.index));
    std::vector<StructureRecord> out;
    for (std::uint64_t i = r.begin; i < r.end; ++i) {
      const auto t = sample_tree(cfg.h, cfg.nu, rng);
      if (!(t.total_weight() > u_min)) continue;
      StructureRecord rec;
      rec.omega = t.total_weight();
      const auto og = outgrowth_decompose(t);
      for (std::size_t j = 0; j < 3 && j < og.outgrowths.size(); ++j) {
        rec.outgrowth[j] = as_u32(og.outgrowths[j].size());
      }
      const auto rd = renewal_decompose(t);
      for (std::size_t j = 0; j < 3 && j < rd.components.size(); ++j) {
        rec.component[j] = as_u32(rd.components[j].tree.size());
      }
      rec.bare = is_b_bare(t, s.B);
      if (rec.bare && rec.omega >= s.bare_bound_threshold) {
        const auto b = check_bare_bounds(t, s.B, std::exp(log_q));
        rec.bare_bounds_checked = true;
        rec.bare_base_bound = b.base_weight_bound;
        rec.bare_depth_bound = b.depth_bound;
      }
      out.push_back(rec);
    }
    return out;
  });
  std::vector<StructureRecord> kept;
  for (auto& b : blocks) kept.insert(kept.end(), b.begin(), b.end());

  StructureResult result;
  result.pool = s.trees;
  for (double u : s.u_grid) {
    StructureAtU at;
    at.u = u;
    std::array<std::vector<std::uint32_t>, 3> og, comp;
    std::uint64_t bare = 0;
    for (const auto& rec : kept) {
      if (!(rec.omega > u)) continue;
      ++at.trees;
      for (std::size_t j = 0; j < 3; ++j) {
        og[j].push_back(rec.outgrowth[j]);
        comp[j].push_back(rec.component[j]);
      }
      bare += rec.bare;
      at.bare_bounds_checked += rec.bare_bounds_checked;
      at.bare_base_bound_ok += rec.bare_base_bound;
      at.bare_depth_bound_ok += rec.bare_depth_bound;
    }
    if (at.trees == 0) {
      throw Error(ErrorKind::BudgetExhausted,
                  "structure: no tree with weight above " + std::to_string(u) +
                      "; raise structure.trees");
    }
    at.bare_fraction = static_cast<double>(bare) / static_cast<double>(at.trees);
    for (std::size_t j = 0; j < 3; ++j) at.tails.push_back(size_tail("J", j, og[j], s));
    for (std::size_t j = 0; j < 3; ++j) at.tails.push_back(size_tail("C", j + 1, comp[j], s));
    result.per_u.push_back(std::move(at));
  }
  return result;
}

// --- renewal components -------------------------------------------------------------

RenewalStatsResult run_renewal_component_stats(const ExperimentConfig& cfg) {
  if (!(cfg.h.h(0) < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "renewal stats: h_0 = 1, no nontrivial trees");
  }
  const auto& rc = cfg.renewal;
  RenewalStatsResult out;

  const auto r_values = collect_in_order<std::uint32_t>(
      cfg.seed, kTagRenewalR, rc.samples, 1024, cfg.workers,
      [&](RngStream& rng, std::vector<std::uint32_t>& acc) {
        const auto t = sample_nontrivial(cfg.h, cfg.nu, rng).tree;
        acc.push_back(as_u32(find_cutpoints(t).size()));
      });
  out.samples = r_values.size();
  const std::uint32_t l_max = *std::max_element(r_values.begin(), r_values.end());
  out.r_minus_one_counts.assign(l_max + 1, 0);
  double total = 0.0;
  for (auto l : r_values) {
    ++out.r_minus_one_counts[l];
    total += l;
  }
  const double mean = total / static_cast<double>(r_values.size());
  const double q = mean / (1.0 + mean);
  out.continue_probability = q;
  std::vector<double> probs(l_max + 1);
  for (std::uint32_t k = 0; k <= l_max; ++k) probs[k] = (1.0 - q) * std::pow(q, k);
  probs[l_max] = std::pow(q, l_max);
  out.geometric_fit = chi_square_gof(out.r_minus_one_counts, probs, 1);

  const auto pairs = collect_in_order<std::pair<double, double>>(
      cfg.seed, kTagRenewalPairs, rc.pairs, 1024, cfg.workers,
      [&](RngStream& rng, std::vector<std::pair<double, double>>& acc) {
        const auto t = sample_nontrivial(cfg.h, cfg.nu, rng).tree;
        if (find_cutpoints(t).size() < 2) return;
        const auto d = renewal_decompose(t);
        acc.emplace_back(static_cast<double>(d.components[0].tree.size()),
                         static_cast<double>(d.components[1].tree.size()));
      });
  out.pairs = pairs.size();
  std::vector<double> a, b;
  for (const auto& [x, y] : pairs) {
    a.push_back(x);
    b.push_back(y);
  }
  out.size_correlation = pearson_correlation(a, b);

  // Past the first cutpoint, a P_{h,ν,u} tree looks like a fresh tree
  // conditioned on ω > u', with u' from the weight already spent.
  out.regeneration_u = rc.regeneration_u;
  const double u = rc.regeneration_u;
  const auto cor = collect_in_order<std::pair<double, double>>(
      cfg.seed, kTagRegeneration, rc.regeneration_samples, 1024, cfg.workers,
      [&](RngStream& rng, std::vector<std::pair<double, double>>& acc) {
        const auto t = sample_tree(cfg.h, cfg.nu, rng);
        if (!(t.total_weight() > u)) return;
        const auto cuts = find_cutpoints(t);
        if (cuts.empty()) return;
        const VertexId c1 = cuts.front();
        const double wc = t.vertex_weight(c1);
        const double tail = t.subtree_weight(c1);
        const double spent = t.total_weight() - wc * tail;
        const double u_prime = std::max((u - spent) / wc, 0.0);
        const auto fresh = sample_where(
            cfg.h, cfg.nu, rng,
            [u_prime](const WeightedTree& s) {
              return s.edge_count() >= 1 && s.total_weight() > u_prime;
            },
            cfg.explaw.max_attempts);
        acc.emplace_back(tail, fresh.tree.total_weight());
      });
  out.regeneration_pairs = cor.size();
  std::vector<double> observed, fresh;
  for (const auto& [x, y] : cor) {
    observed.push_back(x);
    fresh.push_back(y);
  }
  out.regeneration_ks = ks_two_sample(std::move(observed), std::move(fresh));
  return out;
}

// --- law identity -------------------------------------------------------------------

std::vector<LawIdentityRow> run_law_identity(const ExperimentConfig& cfg) {
  std::vector<LawIdentityRow> rows;
  using Item = std::pair<double, double>;  // (size, weight)
  for (std::size_t k : cfg.law_identity.k_list) {
    const auto tag_a = static_cast<std::uint16_t>(kTagLawIdentity + 2 * k);
    const auto tag_b = static_cast<std::uint16_t>(kTagLawIdentity + 2 * k + 1);
    const auto ek = collect_in_order<Item>(
        cfg.seed, tag_a, cfg.law_identity.samples, 4096, cfg.workers,
        [&](RngStream& rng, std::vector<Item>& acc) {
          const auto t = sample_tree(cfg.h, cfg.nu, rng);
          if (t.depth() < k) return;
          const auto e = split_E_k(t, k).e_k.tree;
          acc.emplace_back(static_cast<double>(e.size()), e.total_weight());
        });
    const auto whole = collect_in_order<Item>(
        cfg.seed, tag_b, cfg.law_identity.samples, 4096, cfg.workers,
        [&](RngStream& rng, std::vector<Item>& acc) {
          const auto t = sample_tree(cfg.h, cfg.nu, rng);
          if (t.depth() != k) return;
          acc.emplace_back(static_cast<double>(t.size()), t.total_weight());
        });
    LawIdentityRow row;
    row.k = k;
    std::vector<double> sa, sb, wa, wb;
    for (const auto& [s, w] : ek) {
      sa.push_back(s);
      wa.push_back(w);
    }
    for (const auto& [s, w] : whole) {
      sb.push_back(s);
      wb.push_back(w);
    }
    row.mean_size_ek = mean_with_error(sa).mean;
    row.mean_size_t = mean_with_error(sb).mean;
    row.size_ks = ks_two_sample(std::move(sa), std::move(sb));
    row.weight_ks = ks_two_sample(std::move(wa), std::move(wb));
    rows.push_back(row);
  }
  return rows;
}

// --- persistence ------------------------------------------------------------------

Json to_json(const LineFit& f) {
  return {{"slope", f.slope},
          {"intercept", f.intercept},
          {"residual", f.residual},
          {"slope_std_error", f.slope_std_error},
          {"points", f.points}};
}

namespace {

Json to_json(const KsResult& k) {
  return {{"n", k.n}, {"statistic", k.statistic}, {"p_value", k.p_value}};
}

Json to_json(const ChiSquareResult& c) {
  return {{"statistic", c.statistic}, {"dof", c.dof}, {"p_value", c.p_value}, {"bins", c.bins}};
}

}  // namespace

Json to_json(const TailResult& r) {
  Json j;
  j["quantity"] = r.quantity;
  j["samples"] = r.table.samples;
  j["chi"] = r.chi;
  j["window"] = {r.window.first, r.window.second};
  j["window_from_config"] = r.window_from_config;
  j["fit"] = to_json(r.fit);
  j["constant"] = {{"value", r.constant.constant},
                   {"rel_std_error", r.constant.rel_std_error},
                   {"points", r.constant.points}};
  j["comparison"] = r.comparison;
  j["warnings"] = r.warnings;
  return j;
}

Json to_json(const ReturnTailResult& r) {
  return {{"exact", to_json(r.exact)},
          {"offspring_normalized", to_json(r.offspring_normalized)},
          {"childless_roots", r.childless_roots},
          {"d1", r.d1},
          {"d1_std_error", r.d1_std_error},
          {"c1_published", r.c1_published},
          {"c1_heuristic_offspring", r.c1_heuristic_offspring},
          {"c1_heuristic_exact", r.c1_heuristic_exact}};
}

Json to_json(const ExpLawResult& r) {
  Json per_tree = Json::array();
  for (const auto& t : r.per_tree) {
    per_tree.push_back({{"omega", t.omega},
                        {"omega_star", t.omega_star},
                        {"p_de", t.p_de},
                        {"ratio_mean", t.ratio_mean},
                        {"ratio_std_error", t.ratio_std_error},
                        {"rejected", t.rejected}});
  }
  return {{"u", r.u},
          {"trees", r.trees},
          {"pooled", r.pooled},
          {"ks", to_json(r.ks)},
          {"reference_law", "Exp(1)"},
          {"mean", r.mean},
          {"mean_std_error", r.mean_std_error},
          {"control", {{"ks", to_json(r.control_ks)}, {"mean", r.control_mean}}},
          {"per_tree", per_tree}};
}

Json to_json(const StructureResult& r) {
  Json per_u = Json::array();
  for (const auto& at : r.per_u) {
    Json tails = Json::array();
    for (const auto& t : at.tails) {
      tails.push_back({{"family", t.family},
                       {"index", t.index},
                       {"fitted", t.fitted},
                       {"fit", to_json(t.fit)},
                       {"monotone", t.monotone},
                       {"note", t.note},
                       {"survival", t.survival}});
    }
    per_u.push_back({{"u", at.u},
                     {"trees", at.trees},
                     {"bare_fraction", at.bare_fraction},
                     {"bare_bounds_checked", at.bare_bounds_checked},
                     {"bare_base_bound_ok", at.bare_base_bound_ok},
                     {"bare_depth_bound_ok", at.bare_depth_bound_ok},
                     {"tails", tails}});
  }
  return {{"pool", r.pool}, {"per_u", per_u}};
}

Json to_json(const RenewalStatsResult& r) {
  return {{"samples", r.samples},
          {"continue_probability", r.continue_probability},
          {"r_minus_one_counts", r.r_minus_one_counts},
          {"geometric_fit", to_json(r.geometric_fit)},
          {"pairs", r.pairs},
          {"size_correlation", r.size_correlation},
          {"regeneration", {{"u", r.regeneration_u}, {"pairs", r.regeneration_pairs},
                         {"ks", to_json(r.regeneration_ks)}}}};
}

Json to_json(const std::vector<LawIdentityRow>& rows) {
  Json j = Json::array();
  for (const auto& r : rows) {
    j.push_back({{"k", r.k},
                 {"size_ks", to_json(r.size_ks)},
                 {"weight_ks", to_json(r.weight_ks)},
                 {"mean_size_ek", r.mean_size_ek},
                 {"mean_size_t", r.mean_size_t}});
  }
  return j;
}

std::string tail_csv(const TailTable& t) {
  std::ostringstream os;
  os << "u,n_exceed,survival,stderr\n";
  char buf[128];
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%llu,%.17g,%.17g\n", t.grid[i],
                  static_cast<unsigned long long>(t.n_exceed[i]), t.survival[i], t.std_error[i]);
    os << buf;
  }
  return os.str();
}

void write_outputs(const ExperimentConfig& cfg, const std::string& name, const Json& summary,
                   const TailTable* table) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  if (table) {
    std::ofstream csv(dir / (name + ".csv"));
    csv << tail_csv(*table);
    if (!csv) throw Error(ErrorKind::InvalidArgument, "cannot write " + name + ".csv");
  }
  Json doc;
  doc["config"] = config_to_json(cfg);
  // Results do not depend on the worker count; keep the files byte-identical.
  doc["config"].erase("workers");
  doc["result"] = summary;
  std::ofstream js(dir / (name + ".json"));
  js << doc.dump(2) << "\n";
  if (!js) throw Error(ErrorKind::InvalidArgument, "cannot write " + name + ".json");
}

}  // namespace gwtrap
