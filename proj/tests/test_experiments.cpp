#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gwtrap/error.hpp"
#include "gwtrap/experiments.hpp"

using namespace gwtrap;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig small_config(unsigned workers, const std::string& out) {
  ExperimentConfig cfg = parse_config(Json{{"seed", 7},
                                           {"workers", workers},
                                           {"out", out},
                                           {"tail", {{"trees", 20000}}},
                                           {"d1", {{"samples", 20000}}}});
  return cfg;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("defaults round-trip through JSON") {
    const ExperimentConfig def;
    const auto j = config_to_json(def);
    const auto back = parse_config(j);
    CHECK(config_to_json(back) == j);
    CHECK(back.h.mean() == doctest::Approx(def.h.mean()));
    CHECK(parse_config(Json::object()).tail.trees == def.tail.trees);
  }

  TEST_CASE("partial configs keep the other defaults") {
    const auto c = parse_config(Json{{"seed", 42}, {"explaw", {{"walks_per_tree", 5}}}});
    CHECK(c.seed == 42);
    CHECK(c.explaw.walks_per_tree == 5);
    CHECK(c.explaw.budget == ExperimentConfig{}.explaw.budget);
    const auto two = parse_config(Json{{"offspring", {{"kind", "two_point"}, {"p", 0.6}}}});
    CHECK(two.h.mean() == doctest::Approx(0.6));
    const auto nowin = parse_config(Json{{"tail", {{"window", nullptr}}}});
    CHECK_FALSE(nowin.tail.window.has_value());
  }

  TEST_CASE("invalid configs are rejected") {
    CHECK_THROWS_AS(parse_config(Json{{"sede", 1}}), Error);
    CHECK_THROWS_AS(parse_config(Json{{"tail", {{"tres", 1}}}}), Error);
    CHECK_THROWS_AS(parse_config(Json{{"tail", {{"trees", 0}}}}), Error);
    CHECK_THROWS_AS(parse_config(Json{{"tail", {{"grid", {3.0, 2.0}}}}}), Error);
    CHECK_THROWS_AS(parse_config(Json{{"tail", {{"window", {5.0, 1.0}}}}}), Error);
    CHECK_THROWS_AS(parse_config(Json{{"offspring", {{"kind", "poisson"}}}}), Error);
    CHECK_THROWS_AS(parse_config(Json{{"offspring", {{"kind", "two_point"}, {"p", 1.0}}}}),
                    Error);
    CHECK_THROWS_AS(parse_config(Json{{"bias", {{"kind", "uniform"}, {"a", 0.5}, {"b", 2.0}}}}),
                    Error);
    CHECK_THROWS_AS(parse_config(Json{{"d1", {{"k_list", {6, 4}}}}}), Error);
    CHECK_THROWS_AS(parse_config(Json{{"seed", "x"}}), Error);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
  }

  TEST_CASE("malformed config files raise ParseError") {
    const auto path = std::filesystem::temp_directory_path() / "gwtrap_bad_config.json";
    {
      std::ofstream out(path);
      out << "{\"seed\": ";
    }
    CHECK_THROWS_AS(load_config(path.string()), ParseError);
    std::filesystem::remove(path);
  }

  TEST_CASE("tail CSV layout") {
    TailTable t;
    t.grid = {1.0, 2.5};
    t.n_exceed = {10, 3};
    t.survival = {1.0, 0.3};
    t.std_error = {0.0, 0.1};
    const auto csv = tail_csv(t);
    CHECK(csv.rfind("u,n_exceed,survival,stderr\n", 0) == 0);
    CHECK(csv.find("\n1,10,1,0\n") != std::string::npos);
    CHECK(csv.find("\n2.5,3,") != std::string::npos);
  }

  TEST_CASE("pool summaries") {
    const auto cfg = small_config(2, "unused");
    const auto pool = sample_pool(cfg, 5000, 0x0100);
    REQUIRE(pool.size() == 5000);
    std::uint64_t childless = 0;
    for (const auto& r : pool) {
      CHECK(r.omega >= 1.0);
      if (r.root_children == 0) {
        ++childless;
        CHECK(r.omega == 1.0);
        CHECK(r.mean_return == 0.0);
      } else {
        CHECK(r.mean_return > 0.0);
        CHECK(r.omega_base >= 1.0);
      }
    }
    CHECK(childless > 0);
  }

  TEST_CASE("tail survival starts at one") {
    const auto cfg = small_config(2, "unused");
    const auto r = run_tail_experiment(cfg);
    REQUIRE(!r.table.grid.empty());
    CHECK(r.table.grid.front() == 1.0);
    CHECK(r.table.survival.front() == 1.0);
    for (std::size_t i = 1; i < r.table.survival.size(); ++i) {
      CHECK(r.table.survival[i] <= r.table.survival[i - 1]);
    }
  }

  TEST_CASE("outputs are byte-identical across worker counts") {
    const auto base = std::filesystem::temp_directory_path() / "gwtrap_outputs_test";
    std::filesystem::remove_all(base);
    std::string csv[2], json[2];
    const unsigned workers[2] = {1, 3};
    for (int i = 0; i < 2; ++i) {
      const auto dir = base;
      const auto cfg = small_config(workers[i], dir.string());
      const auto r = run_tail_experiment(cfg);
      write_outputs(cfg, "tail_omega", to_json(r), &r.table);
      csv[i] = slurp(dir / "tail_omega.csv");
      json[i] = slurp(dir / "tail_omega.json");
    }
    CHECK(!csv[0].empty());
    CHECK(csv[0] == csv[1]);
    CHECK(json[0] == json[1]);
    const auto doc = Json::parse(json[0]);
    CHECK(doc.contains("config"));
    CHECK(doc.contains("result"));
    CHECK_FALSE(doc["config"].contains("workers"));
    std::filesystem::remove_all(base);
  }
}
