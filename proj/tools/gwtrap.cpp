// SPDX-License-Identifier: Apache-2.0
//
// gwtrap: command-line harness for the tree sampler, walk engine,
// decompositions and desk-scale experiments.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gwtrap/decomp.hpp"
#include "gwtrap/error.hpp"
#include "gwtrap/experiments.hpp"
#include "gwtrap/renewal.hpp"
#include "gwtrap/sampler.hpp"
#include "gwtrap/verify.hpp"
#include "gwtrap/walk.hpp"

using namespace gwtrap;

namespace {

constexpr std::uint16_t kTagCliSample = 0x0800;
constexpr std::uint16_t kTagCliWalk = 0x0801;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;

  ExperimentConfig load() const {
    ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : load_config(config);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out) cfg.out_dir = *out;
    return cfg;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--workers", c.workers, "worker threads, 0 = all cores");
  cmd->add_option("--out", c.out, "output directory");
}

void print(const Json& j) { std::cout << j.dump(2) << "\n"; }

Json tree_summary(const WeightedTree& t) {
  double beta_sum = 0.0;
  for (VertexId c : t.children(kRoot)) beta_sum += t.bias(c);
  Json j = {{"vertices", t.size()},
            {"depth", t.depth()},
            {"omega", t.total_weight()},
            {"root_children", t.child_count(kRoot)},
            {"omega_base", t.vertex_weight(t.find_v_base())}};
  if (t.depth() > 0) {
    j["omega_star"] = t.omega_star();
    j["mean_return_root"] = exact_mean_return(t, kRoot);
    j["mean_return_formula"] = mean_return_closed_form(t);
    j["mean_return_offspring_normalized"] = mean_return_offspring_normalized(t);
    j["mean_return_v_child"] = exact_mean_return(t, t.v_child());
    j["p_de"] = compute_p_de(t);
    j["p_de_from_root"] = t.bias(t.v_child()) / beta_sum * compute_p_de(t);
  }
  return j;
}

WeightedTree draw_tree(const ExperimentConfig& cfg, std::optional<double> above,
                       std::uint64_t index, std::uint16_t tag) {
  RngStream rng(cfg.seed, stream_id(tag, index));
  if (above) return sample_conditioned(cfg.h, cfg.nu, *above, rng, cfg.explaw.max_attempts).tree;
  return sample_nontrivial(cfg.h, cfg.nu, rng, cfg.explaw.max_attempts).tree;
}

std::vector<std::uint32_t> ids(const std::vector<VertexId>& v) {
  std::vector<std::uint32_t> out;
  out.reserve(v.size());
  for (VertexId x : v) out.push_back(x.index);
  return out;
}

int run_chi(const ExperimentConfig& cfg) {
  const auto d2 = compute_d2(cfg.h, cfg.nu);
  Json j = {{"m_h", cfg.h.mean()},
            {"chi", d2.chi},
            {"alpha", d2.alpha},
            {"log_moment", d2.log_moment},
            {"d2", d2.d2},
            {"bias_q", cfg.nu.q()},
            {"bias_Q", cfg.nu.Q()}};
  if (const auto& w = cfg.nu.lattice_warning()) j["warning"] = *w;
  write_outputs(cfg, "chi", j);
  print(j);
  return 0;
}

int run_sample(const ExperimentConfig& cfg, std::uint64_t count, std::optional<double> above,
               bool dump) {
  Json trees = Json::array();
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto t = draw_tree(cfg, above, i, kTagCliSample);
    Json s = tree_summary(t);
    if (dump) s["tree"] = Json::parse(serialize(t));
    trees.push_back(std::move(s));
  }
  Json j = {{"count", count}, {"trees", trees}};
  if (above) j["conditioned_above"] = *above;
  write_outputs(cfg, "sample", j);
  print(j);
  return 0;
}

WeightedTree tree_from(const ExperimentConfig& cfg, const std::string& path,
                       std::optional<double> above, std::uint64_t index, std::uint16_t tag) {
  if (path.empty()) return draw_tree(cfg, above, index, tag);
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open tree file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(text);
}

int run_walk(const ExperimentConfig& cfg, const std::string& tree_file,
             std::optional<double> above, std::uint64_t walks, bool conditioned) {
  const auto t = tree_from(cfg, tree_file, above, 0, kTagCliWalk);
  Walker walker(t);
  RngStream rng(cfg.seed, stream_id(kTagCliWalk, 1));
  double sum = 0.0, sum_sq = 0.0;
  std::uint64_t deep = 0, rejected = 0;
  for (std::uint64_t i = 0; i < walks; ++i) {
    const auto s = conditioned ? walker.simulate_return_conditioned_de(rng, cfg.explaw.max_attempts)
                               : walker.simulate_return(rng);
    const double x = static_cast<double>(s.steps);
    sum += x;
    sum_sq += x * x;
    deep += s.deep;
    rejected += s.rejected_count;
  }
  const double n = static_cast<double>(walks);
  const double mean = sum / n;
  Json j = tree_summary(t);
  j["walks"] = walks;
  j["deep_excursion_conditioned"] = conditioned;
  j["sample_mean"] = mean;
  j["sample_std_error"] = walks > 1 ? std::sqrt((sum_sq / n - mean * mean) / (n - 1.0)) : 0.0;
  j["deep_fraction"] = static_cast<double>(deep) / n;
  if (conditioned) {
    j["rejected"] = rejected;
    if (t.depth() > 0) {
      j["normalized_mean"] = mean * compute_p_de(t) / (2.0 * t.omega_star());
    }
  }
  write_outputs(cfg, "walk", j);
  print(j);
  return 0;
}

int run_decomp(const ExperimentConfig& cfg, const std::string& tree_file,
               std::optional<double> above) {
  const auto t = tree_from(cfg, tree_file, above, 0, kTagCliSample);
  Json j = tree_summary(t);

  const auto og = outgrowth_decompose(t);
  Json outgrowths = Json::array();
  for (const auto& set : og.outgrowths) outgrowths.push_back(set.size());
  j["outgrowths"] = {{"spine", ids(og.spine)}, {"sizes", outgrowths}};

  const auto fso = fso_decompose(t);
  Json offshoots = Json::array();
  for (const auto& set : fso.offshoots) offshoots.push_back(set.size());
  j["fso"] = {{"v_max", fso.v_max.index},
              {"v_fbp", fso.v_fbp.index},
              {"foundation", ids(fso.foundation)},
              {"spine", ids(fso.spine)},
              {"offshoot_sizes", offshoots}};

  const auto rd = renewal_decompose(t);
  Json comps = Json::array();
  for (const auto& c : rd.components) {
    comps.push_back({{"vertices", c.tree.size()}, {"depth", c.tree.depth()}});
  }
  j["renewal"] = {{"cutpoints", ids(rd.cutpoints)},
                  {"components", comps},
                  {"round_trip", concatenate(rd.components) == t}};
  if (t.total_weight() > std::numbers::e) j["bare"] = is_b_bare(t, cfg.structure.B);
  write_outputs(cfg, "decomp", j);
  print(j);
  return 0;
}

void report_tail(const TailResult& r) {
  std::printf("%-34s slope %.4f +- %.4f (chi %.4f)  constant %.4g  window [%g, %g]\n",
              r.quantity.c_str(), r.fit.slope, r.fit.slope_std_error, r.chi, r.constant.constant,
              r.window.first, r.window.second);
  for (const auto& w : r.warnings) std::printf("  warning: %s\n", w.c_str());
}

int run_tail(const ExperimentConfig& cfg) {
  const auto pool = sample_pool(cfg, cfg.tail.trees, 0x0100);
  const auto weight = run_tail_experiment(cfg, &pool);
  const auto base = run_base_weight_tail(cfg, &pool);
  const auto ret = run_return_tail(cfg, &pool);
  write_outputs(cfg, "tail_omega", to_json(weight), &weight.table);
  write_outputs(cfg, "tail_omega_base", to_json(base), &base.table);
  write_outputs(cfg, "tail_mean_return", to_json(ret), &ret.exact.table);
  write_outputs(cfg, "tail_mean_return_offspring_normalized", to_json(ret.offspring_normalized),
                &ret.offspring_normalized.table);
  report_tail(weight);
  report_tail(base);
  report_tail(ret.exact);
  report_tail(ret.offspring_normalized);
  std::printf("d1 %.5g +- %.2g  c1 published %.5g  heuristic (exact) %.5g  heuristic (2/N) %.5g\n",
              ret.d1, ret.d1_std_error, ret.c1_published, ret.c1_heuristic_exact,
              ret.c1_heuristic_offspring);
  return 0;
}

int run_explaw(const ExperimentConfig& cfg) {
  const auto r = run_exponential_law(cfg);
  write_outputs(cfg, "explaw", to_json(r));
  std::printf("u %.3f  trees %llu  pooled %llu  KS %.4f (p %.3g)  mean %.4f +- %.4f  "
              "control KS %.4f\n",
              r.u, static_cast<unsigned long long>(r.trees),
              static_cast<unsigned long long>(r.pooled), r.ks.statistic, r.ks.p_value, r.mean,
              r.mean_std_error, r.control_ks.statistic);
  return 0;
}

int run_structure(const ExperimentConfig& cfg) {
  const auto r = run_structure_tails(cfg);
  write_outputs(cfg, "structure", to_json(r));
  for (const auto& at : r.per_u) {
    std::printf("u %g: %llu trees, B-bare fraction %.4f\n", at.u,
                static_cast<unsigned long long>(at.trees), at.bare_fraction);
    for (const auto& t : at.tails) {
      std::printf("  %s_%zu slope %s monotone %s%s%s\n", t.family.c_str(), t.index,
                  t.fitted ? std::to_string(t.fit.slope).c_str() : "n/a",
                  t.monotone ? "yes" : "no", t.note.empty() ? "" : "  ", t.note.c_str());
    }
  }
  return 0;
}

int run_renewal_stats(const ExperimentConfig& cfg) {
  const auto r = run_renewal_component_stats(cfg);
  const auto law = run_law_identity(cfg);
  Json j = to_json(r);
  j["law_identity"] = to_json(law);
  write_outputs(cfg, "renewal_stats", j);
  std::printf("r-1 geometric: q %.4f chi-square p %.3g\n", r.continue_probability,
              r.geometric_fit.p_value);
  std::printf("corr(|C1|,|C2|) %.4f over %llu pairs\n", r.size_correlation,
              static_cast<unsigned long long>(r.pairs));
  std::printf("regeneration KS p %.3g over %llu pairs (u %g)\n", r.regeneration_ks.p_value,
              static_cast<unsigned long long>(r.regeneration_pairs), r.regeneration_u);
  for (const auto& row : law) {
    std::printf("law identity k=%zu: size KS p %.3g, weight KS p %.3g\n", row.k,
                row.size_ks.p_value, row.weight_ks.p_value);
  }
  return 0;
}

int run_verify(const ExperimentConfig& cfg, const std::vector<int>& only, bool constants) {
  VerifyOptions options;
  options.cfg = cfg;
  options.only = {only.begin(), only.end()};
  options.report_constants = constants;
  options.on_result = [](const CriterionResult& r) {
    std::cout << format_line(r) << std::endl;
  };
  const auto run = run_verify_all(options);
  const Json report = verify_report(run);
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream out(std::filesystem::path(cfg.out_dir) / "verify.json");
  out << report.dump(2) << "\n";
  std::size_t passed = 0;
  for (const auto& r : run.criteria) passed += r.passed;
  std::printf("%zu/%zu criteria passed\n", passed, run.criteria.size());
  return report.at("passed").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Biased random walks on subcritical Galton-Watson trees"};
  app.require_subcommand(1);
  Common common;

  auto* chi = app.add_subcommand("chi", "tail exponent and base-weight constants for the laws");
  add_common(chi, common);

  std::uint64_t count = 1;
  std::optional<double> above;
  bool dump = false;
  auto* sample = app.add_subcommand("sample", "sample trees and print summaries");
  add_common(sample, common);
  sample->add_option("--count", count, "number of trees")->check(CLI::PositiveNumber);
  sample->add_option("--above", above, "condition on total weight above this value");
  sample->add_flag("--dump", dump, "include the serialized trees");

  std::string tree_file;
  std::uint64_t walks = 10000;
  bool deep = false;
  auto* walk = app.add_subcommand("walk", "simulate returns to the root on one tree");
  add_common(walk, common);
  walk->add_option("--tree", tree_file, "tree JSON (default: sample one)")->check(CLI::ExistingFile);
  walk->add_option("--above", above, "condition the sampled tree on total weight");
  walk->add_option("--walks", walks, "number of returns")->check(CLI::PositiveNumber);
  walk->add_flag("--deep", deep, "condition each return on a deep excursion");

  auto* decomp = app.add_subcommand("decomp", "outgrowth, FSO and renewal decompositions");
  add_common(decomp, common);
  decomp->add_option("--tree", tree_file, "tree JSON (default: sample one)")->check(CLI::ExistingFile);
  decomp->add_option("--above", above, "condition the sampled tree on total weight");

  auto* tail = app.add_subcommand("tail", "weight, base-weight and return-time tails");
  add_common(tail, common);
  auto* explaw = app.add_subcommand("explaw", "exponential limit of deep-excursion returns");
  add_common(explaw, common);
  auto* structure = app.add_subcommand("structure", "outgrowth and renewal component size tails");
  add_common(structure, common);
  auto* renewal = app.add_subcommand("renewal-stats", "renewal component statistics");
  add_common(renewal, common);

  std::vector<int> only;
  bool no_constants = false;
  auto* verify = app.add_subcommand("verify-all", "run every acceptance check; exit 1 on failure");
  add_common(verify, common);
  verify->add_option("--only", only, "criterion ids to run")->delimiter(',')->check(CLI::Range(1, 13));
  verify->add_flag("--no-constants", no_constants, "skip the tail-constant report");

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = common.load();
    if (*chi) return run_chi(cfg);
    if (*sample) return run_sample(cfg, count, above, dump);
    if (*walk) return run_walk(cfg, tree_file, above, walks, deep);
    if (*decomp) return run_decomp(cfg, tree_file, above);
    if (*tail) return run_tail(cfg);
    if (*explaw) return run_explaw(cfg);
    if (*structure) return run_structure(cfg);
    if (*renewal) return run_renewal_stats(cfg);
    if (*verify) return run_verify(cfg, only, !no_constants);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gwtrap: %s\n", e.what());
    return 2;
  }
  return 0;
}
