// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration and the desk-scale experiments: weight and
// return-time tails, the exponential limit of deep returns, outgrowth and
// renewal component statistics. Every run is a pure function of the config.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gwtrap/laws.hpp"
#include "gwtrap/stats.hpp"

namespace gwtrap {

using Json = nlohmann::ordered_json;

OffspringLaw parse_offspring(const Json& j);
BiasLaw parse_bias(const Json& j);
ScalarLaw parse_scalar(const Json& j);

struct ExperimentConfig {
  Json offspring_spec = {{"kind", "truncated_geometric"}, {"ratio", 1.0 / 3.0}, {"max_k", 12}};
  Json bias_spec = {{"kind", "uniform"}, {"a", 1.2}, {"b", 2.0}};
  OffspringLaw h = OffspringLaw::truncated_geometric(1.0 / 3.0, 12);
  BiasLaw nu = BiasLaw::uniform(1.2, 2.0);
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out_dir = "results";

  struct Tail {
    std::uint64_t trees = 1'000'000;
    std::vector<double> grid = log_grid(1.0, 1000.0, 31);
    std::optional<std::pair<double, double>> window = std::pair{30.0, 300.0};
  } tail;

  struct ExpLaw {
    std::uint64_t budget = 1'000'000;
    std::uint64_t min_trees = 1000;
    std::uint64_t walks_per_tree = 20;
    std::uint64_t control_trees = 1000;
    std::uint64_t max_attempts = 1'000'000;
  } explaw;

  struct Structure {
    std::uint64_t trees = 3'000'000;
    std::vector<double> u_grid = {10.0, 30.0, 100.0};
    double B = 2.0;
    std::size_t k_max = 60;
    std::uint64_t min_count = 10;
    double bare_bound_threshold = 10.0 * std::exp(std::numbers::e);
  } structure;

  struct Renewal {
    std::uint64_t samples = 100'000;
    std::uint64_t pairs = 100'000;
    double regeneration_u = 10.0;
    std::uint64_t regeneration_samples = 20'000;
  } renewal;

  struct LawIdentity {
    std::uint64_t samples = 100'000;
    std::vector<std::size_t> k_list = {1, 2, 3};
  } law_identity;

  struct D1 {
    std::vector<std::size_t> k_list = {4, 6, 8};
    std::uint64_t samples = 1'000'000;
  } d1;
};

/// Missing keys keep their defaults; laws and budgets are validated here.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);
Json config_to_json(const ExperimentConfig& cfg);

/// Per-tree summaries from one pass over unconditioned trees.
struct PoolRecord {
  double omega = 0.0;
  double omega_base = 0.0;
  /// E^φ H_φ; 0 for a childless root.
  double mean_return = 0.0;
  /// (2/N)(ω - 1); 0 for a childless root.
  double mean_return_offspring = 0.0;
  std::uint32_t depth = 0;
  std::uint32_t root_children = 0;
};

std::vector<PoolRecord> sample_pool(const ExperimentConfig& cfg, std::uint64_t trees,
                                    std::uint16_t tag);

struct TailResult {
  std::string quantity;
  TailTable table;
  std::pair<double, double> window;
  bool window_from_config = false;
  std::vector<std::string> warnings;
  double chi = 0.0;
  LineFit fit;
  /// Prefactor with the slope held at -χ.
  PrefactorFit constant;
  Json comparison = Json::object();
};

TailResult tail_from_values(std::string quantity, std::vector<double> values,
                            std::uint64_t total, const ExperimentConfig& cfg, double chi);

/// ω(T) tail; compares the fitted constant with a Monte Carlo d₁.
TailResult run_tail_experiment(const ExperimentConfig& cfg,
                               const std::vector<PoolRecord>* pool = nullptr);
/// ω(v_base) tail; compares the fitted constant with d₂.
TailResult run_base_weight_tail(const ExperimentConfig& cfg,
                                const std::vector<PoolRecord>* pool = nullptr);

struct ReturnTailResult {
  TailResult exact;
  TailResult offspring_normalized;
  std::uint64_t childless_roots = 0;
  double d1 = 0.0;
  double d1_std_error = 0.0;
  double c1_published = 0.0;
  /// One-big-jump heuristics for each quantity, reported next to c₁.
  double c1_heuristic_offspring = 0.0;
  double c1_heuristic_exact = 0.0;
};

ReturnTailResult run_return_tail(const ExperimentConfig& cfg,
                                 const std::vector<PoolRecord>* pool = nullptr);

struct TreeRatio {
  double omega = 0.0;
  double omega_star = 0.0;
  double p_de = 0.0;
  double ratio_mean = 0.0;
  double ratio_std_error = 0.0;
  std::uint64_t rejected = 0;
};

struct ExpLawResult {
  double u = 0.0;
  std::uint64_t trees = 0;
  std::uint64_t pooled = 0;
  KsResult ks;
  double mean = 0.0;
  /// Between-tree standard error of the pooled mean.
  double mean_std_error = 0.0;
  KsResult control_ks;
  double control_mean = 0.0;
  std::vector<TreeRatio> per_tree;
};

ExpLawResult run_exponential_law(const ExperimentConfig& cfg);

struct SizeTail {
  std::string family;  ///< "J" or "C"
  std::size_t index = 0;
  std::vector<double> survival;  ///< P(size >= k), k = 1..k_max
  std::vector<std::uint64_t> count;
  LineFit fit;
  bool fitted = false;
  bool monotone = true;
  std::string note;
};

struct StructureAtU {
  double u = 0.0;
  std::uint64_t trees = 0;
  std::vector<SizeTail> tails;
  double bare_fraction = 0.0;
  std::uint64_t bare_bounds_checked = 0;
  std::uint64_t bare_base_bound_ok = 0;
  std::uint64_t bare_depth_bound_ok = 0;
};

struct StructureResult {
  std::vector<StructureAtU> per_u;
  std::uint64_t pool = 0;
};

StructureResult run_structure_tails(const ExperimentConfig& cfg);

struct RenewalStatsResult {
  std::uint64_t samples = 0;
  double continue_probability = 0.0;  ///< fitted P*(r(T) >= 2)
  std::vector<std::uint64_t> r_minus_one_counts;
  ChiSquareResult geometric_fit;
  std::uint64_t pairs = 0;
  double size_correlation = 0.0;
  std::uint64_t regeneration_pairs = 0;
  KsResult regeneration_ks;
  double regeneration_u = 0.0;
};

RenewalStatsResult run_renewal_component_stats(const ExperimentConfig& cfg);

struct LawIdentityRow {
  std::size_t k = 0;
  KsResult size_ks;
  KsResult weight_ks;
  double mean_size_ek = 0.0;
  double mean_size_t = 0.0;
};

/// |V(E_k)| under D(T) >= k against |V(T)| under D(T) = k.
std::vector<LawIdentityRow> run_law_identity(const ExperimentConfig& cfg);

// --- persistence ---------------------------------------------------------------

Json to_json(const LineFit& f);
Json to_json(const TailResult& r);
Json to_json(const ReturnTailResult& r);
Json to_json(const ExpLawResult& r);
Json to_json(const StructureResult& r);
Json to_json(const RenewalStatsResult& r);
Json to_json(const std::vector<LawIdentityRow>& rows);

/// CSV with columns u, n_exceed, survival, stderr.
std::string tail_csv(const TailTable& t);

/// Writes `name`.csv (when given) and `name`.json under cfg.out_dir.
void write_outputs(const ExperimentConfig& cfg, const std::string& name, const Json& summary,
                   const TailTable* table = nullptr);

}  // namespace gwtrap
