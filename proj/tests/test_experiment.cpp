#include <doctest.h>

#include <sstream>

#include "sparselab/experiment.hpp"

using namespace sparselab;

namespace {

std::string csv_of(const SweepConfig& cfg) {
  std::ostringstream out;
  write_csv(out, run_sweep(cfg));
  return out.str();
}

}  // namespace

TEST_CASE("empty sweep") {
  SweepConfig cfg;
  cfg.trials = 0;
  cfg.c_grid = {0.5, 2.0};
  const auto r = run_sweep(cfg);
  std::ostringstream out;
  write_csv(out, r);
  CHECK(out.str() == "system,n,alpha_s,C,p,trial,seed,stat_name,stat_value,pass,millis\n");
  REQUIRE(r.summary["points"].size() == 2);
  CHECK(r.summary["points"][0]["frequency"].is_null());
  CHECK(r.summary["points"][0]["trials"] == 0);
}

TEST_CASE("sweeps are byte-identical across thread counts") {
  SweepConfig cfg;
  cfg.system = SystemDescriptor::ap(1009, 3);
  cfg.c_grid = {0.5, 4.0};
  cfg.trials = 6;
  cfg.seed = 9;
  const auto serial = csv_of(cfg);
  cfg.threads = 4;
  CHECK(csv_of(cfg) == serial);
  cfg.threads = 1;
  CHECK(csv_of(cfg) == serial);
  cfg.target = "density";
  const auto dens = csv_of(cfg);
  cfg.threads = 3;
  CHECK(csv_of(cfg) == dens);
  cfg.target = "colouring";
  const auto col = csv_of(cfg);
  cfg.threads = 1;
  CHECK(csv_of(cfg) == col);
}

TEST_CASE("trial seeds") {
  CHECK(trial_seed(1, 0, 0) != trial_seed(1, 0, 1));
  CHECK(trial_seed(1, 0, 1) != trial_seed(1, 1, 0));
  CHECK(trial_seed(1, 2, 3) == trial_seed(1, 2, 3));
  SweepConfig cfg;
  cfg.trials = 2;
  cfg.c_grid = {1.0, 2.0};
  const auto a = run_sweep(cfg);
  // reordering the grid keeps each (C index, trial) seed
  CHECK(a.records[2].seed == trial_seed(1, 1, 0));
}

TEST_CASE("count concentration improves with C") {
  SweepConfig cfg;
  cfg.system = SystemDescriptor::ap(10007, 3);
  cfg.c_grid = {0.25, 8.0};
  cfg.trials = 20;
  const auto r = run_sweep(cfg);
  const double low = r.summary["points"][0]["frequency"];
  const double high = r.summary["points"][1]["frequency"];
  CHECK(high > low);
  CHECK(high >= 0.9);
  const auto ci = r.summary["points"][1]["ci"];
  CHECK(ci[0].get<double>() <= high);
  CHECK(ci[1].get<double>() >= high);
}

TEST_CASE("bootstrap interval") {
  const std::vector<bool> all(50, true);
  CHECK(bootstrap_interval(all, 1) == std::pair<double, double>{1.0, 1.0});
  std::vector<bool> half(100);
  for (std::size_t i = 0; i < half.size(); ++i) half[i] = i % 2;
  const auto [lo, hi] = bootstrap_interval(half, 2);
  CHECK(lo < 0.5);
  CHECK(hi > 0.5);
  CHECK(hi - lo < 0.3);
}

TEST_CASE("config round trip") {
  SweepConfig cfg;
  cfg.system = SystemDescriptor::copies(12, PatternHypergraph::complete_graph(3));
  cfg.c_grid = {1.0, 3.0};
  cfg.target = "colouring";
  const auto back = SweepConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  cfg.target = "bogus";
  CHECK_THROWS_AS(run_sweep(cfg), std::invalid_argument);
}

TEST_CASE("checks") {
  const nlohmann::json ap101 = SystemDescriptor::ap(101, 3).to_json();
  auto sys = run_check("system", {{"system", ap101}});
  CHECK(sys.pass);
  CHECK(sys.report["homogeneity"]["homogeneous"] == true);
  CHECK(sys.report["two_dof"]["two_dof"] == true);
  CHECK(sys.report["pair_profile"]["sigma"] == 1);
  CHECK(sys.report["fiber_size"] == 100);

  auto ex = run_check("oracle", {{"name", "extremal"}, {"n", 5}, {"pattern", "K3"}, {"expect", 6}});
  CHECK(ex.pass);
  CHECK(ex.report["value"] == 6);
  CHECK_FALSE(run_check("oracle", {{"name", "extremal"}, {"n", 5}, {"pattern", "K3"}, {"expect", 7}}).pass);
  auto tail = run_check("oracle", {{"name", "tail-bound"},
                                   {"kind", "chernoff"},
                                   {"params", {{"delta", 1.0}, {"p", 0.5}, {"size", 8.0}}}});
  CHECK(tail.report["value"].get<double>() == doctest::Approx(2.0 * std::exp(-1.0)));

  auto props = run_check("properties", {{"system", ap101}, {"p", 0.5}, {"m", 3}, {"samples", 5}});
  CHECK(props.report["reports"].size() == 4);
  auto conds = run_check("conditions", {{"system", ap101}, {"p", 1.0}, {"trials", 1}, {"sample_x", 4}});
  CHECK(conds.report["reports"][0]["pass"] == true);
  auto dm = run_check("dense-model", {{"system", ap101}, {"p", 0.3}, {"m", 4}, {"family_size", 32}});
  CHECK(dm.report["model"]["achieved_norm"].get<double>() >= 0.0);
  CHECK_FALSE(dm.report["model"].contains("g"));

  CHECK_THROWS_AS(run_check("nope", nlohmann::json::object()), std::invalid_argument);
  CHECK_THROWS_AS(run_check("oracle", {{"name", "nope"}}), std::invalid_argument);
}
