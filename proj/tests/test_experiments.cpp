#include "swing/experiments.hpp"

#include "swing/config.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace swing;

namespace {

std::string base_config_text(const char* engine, const char* sigma, const char* extra_contract) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf), R"({
    "contract": {"n_exercise": 15, "q_max": 6, "Q_min": 50, "Q_max": 80, "strike": 20.0,
                 "constraint": "firm", "payoff": "fixed_strike"%s},
    "model": {"factor_count": 1, "alpha": [0.4], "sigma": [%s], "rho": 0.0, "f0": 20.0},
    "solver": {"m": 1, "paths": 4000, "seed": 77, "quad_nodes": 32},
    "engine": {"engine": "%s"},
    "sweep": {"f0_min": 10.0, "f0_max": 30.0, "f0_step": 5.0},
    "scenarios": [{"name": "base"}]
  })",
                extra_contract, sigma, engine);
  return buf;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  const ExperimentConfig cfg = parse_config(base_config_text("grid", "0.2", ""));
  CHECK(cfg.contract.n_exercise == 15);
  CHECK(cfg.contract.maturity == doctest::Approx(15.0 / 365.0));
  CHECK(cfg.model.vols[0] == 0.2);
  CHECK(cfg.engine == EngineKind::Grid);
  CHECK(cfg.sweep.points().size() == 5);

  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("{}"), ConfigError);

  // rho outside the admissible open interval is rejected at parse time
  std::string bad = base_config_text("grid", "0.2", "");
  const auto pos = bad.find("\"factor_count\": 1");
  bad.replace(pos, 17, "\"factor_count\": 3");
  const auto apos = bad.find("\"alpha\": [0.4]");
  bad.replace(apos, 14, "\"alpha\": [0.4, 0.4, 0.4]");
  const auto spos = bad.find("\"sigma\": [0.2]");
  bad.replace(spos, 14, "\"sigma\": [0.2, 0.2, 0.2]");
  const auto rpos = bad.find("\"rho\": 0.0");
  bad.replace(rpos, 10, "\"rho\": -0.6");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  // scenario overrides validate too
  std::string bad_scen = base_config_text("grid", "0.2", "");
  const auto scen = bad_scen.find("[{\"name\": \"base\"}]");
  bad_scen.replace(scen, 18, "[{\"name\": \"x\", \"sigma\": [0.1, 0.2]}]");
  CHECK_THROWS_AS(parse_config(bad_scen), ConfigError);
}

TEST_CASE("zero-volatility sweep matches the closed form in every column") {
  ExperimentConfig cfg = parse_config(base_config_text("grid", "0.0", ""));
  const auto rows = run_sweep_scenario(cfg, cfg.scenarios[0]);
  REQUIRE(rows.size() == 5);
  for (const SweepRow& r : rows) {
    const double exact =
        80.0 * std::max(r.f0 - 20.0, 0.0) - 50.0 * std::max(20.0 - r.f0, 0.0);
    CHECK(r.price == doctest::Approx(exact).epsilon(1e-10));
    CHECK(r.delta == doctest::Approx(r.f0 > 20.0 ? 80.0 : 50.0).epsilon(1e-10));
  }
}

TEST_CASE("sweep row count and ordering") {
  ExperimentConfig cfg = parse_config(base_config_text("grid", "0.2", ""));
  cfg.sweep = SweepSpec{5.0, 35.0, 2.5};
  const auto rows = run_sweep_scenario(cfg, cfg.scenarios[0]);
  CHECK(static_cast<int>(rows.size()) ==
        static_cast<int>(std::floor((35.0 - 5.0) / 2.5)) + 1);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].f0 > rows[i - 1].f0);
}

TEST_CASE("csv output is byte-stable and well-formed") {
  ExperimentConfig cfg = parse_config(base_config_text("lsmc", "0.2", ""));
  cfg.out_dir = "test_out_csv";
  const auto paths1 = run_sweep(cfg);
  REQUIRE(paths1.size() == 1);
  std::ifstream f1(paths1[0]);
  std::string text1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  f1.close();

  const auto paths2 = run_sweep(cfg);
  std::ifstream f2(paths2[0]);
  std::string text2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  f2.close();

  CHECK(text1 == text2);
  CHECK(text1.rfind("f0,price,delta\n", 0) == 0);
  CHECK(std::count(text1.begin(), text1.end(), '\n') == 6);  // header + 5 rows

  // a different seed changes the MC prices
  ExperimentConfig other = cfg;
  other.solver.seed = 78;
  const auto rows_a = run_sweep_scenario(cfg, cfg.scenarios[0]);
  const auto rows_b = run_sweep_scenario(other, other.scenarios[0]);
  bool same = true;
  for (std::size_t i = 0; i < rows_a.size(); ++i)
    same = same && rows_a[i].price == rows_b[i].price;
  CHECK(!same);

  std::filesystem::remove_all("test_out_csv");
}

TEST_CASE("grid delta column is non-decreasing in f0 for convex payoffs") {
  ExperimentConfig cfg = parse_config(base_config_text("grid", "0.4", ""));
  cfg.sweep = SweepSpec{5.0, 35.0, 2.5};
  const auto rows = run_sweep_scenario(cfg, cfg.scenarios[0]);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].delta >= rows[i - 1].delta - 1e-6);
}

TEST_CASE("volatility scenarios are ordered by price") {
  ExperimentConfig cfg = parse_config(base_config_text("grid", "0.2", ""));
  cfg.scenarios = {Scenario{"lo", std::vector<double>{0.2}, {}, {}, {}, {}, {}},
                   Scenario{"hi", std::vector<double>{0.7}, {}, {}, {}, {}, {}}};
  const auto lo = run_sweep_scenario(cfg, cfg.scenarios[0]);
  const auto hi = run_sweep_scenario(cfg, cfg.scenarios[1]);
  for (std::size_t i = 0; i < lo.size(); ++i) CHECK(hi[i].price > lo[i].price);
}

TEST_CASE("penalty experiment forces pen mode and stays above firm") {
  ExperimentConfig cfg = parse_config(base_config_text("grid", "0.3", ""));
  cfg.contract.penalty_a = 0.0;
  cfg.contract.penalty_b = 0.0;
  cfg.out_dir = "test_out_pen";
  const auto files = run_penalty_experiment(cfg);
  REQUIRE(files.size() == 1);

  ExperimentConfig pen = cfg;
  pen.contract.mode = ConstraintMode::Pen;
  const auto pen_rows = run_sweep_scenario(pen, pen.scenarios[0]);
  const auto firm_rows = run_sweep_scenario(cfg, cfg.scenarios[0]);
  for (std::size_t i = 0; i < pen_rows.size(); ++i)
    CHECK(pen_rows[i].price >= firm_rows[i].price - 1e-9);

  std::filesystem::remove_all("test_out_pen");
}

TEST_CASE("penalized prices are increasing in the volatility parameter") {
  ExperimentConfig cfg = parse_config(base_config_text("grid", "0.3", ""));
  cfg.contract.mode = ConstraintMode::Pen;
  cfg.contract.penalty_a = 0.2;
  cfg.contract.penalty_b = 0.2;
  cfg.scenarios = {Scenario{"lo", std::vector<double>{0.3}, {}, {}, {}, {}, {}},
                   Scenario{"hi", std::vector<double>{0.7}, {}, {}, {}, {}, {}}};
  const auto lo = run_sweep_scenario(cfg, cfg.scenarios[0]);
  const auto hi = run_sweep_scenario(cfg, cfg.scenarios[1]);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i].f0 >= 15.0) {
      CHECK(hi[i].price > lo[i].price);
    } else {
      // deep out of the money the optimal plan is to pay the deficit penalty
      // -A Q_min E[S_T], identical for every volatility; only grid bias is
      // left, so the comparison holds to a discretization tolerance
      CHECK(hi[i].price >= lo[i].price - 1e-4 * (1.0 + std::abs(lo[i].price)));
    }
  }
}

TEST_CASE("verification suite passes on the reference config and flags bad fields") {
  ExperimentConfig cfg = parse_config(base_config_text("grid", "0.2", ""));
  cfg.solver.path_count = 8000;
  const VerificationReport rep = run_verification_suite(cfg);
  CHECK(rep.all_pass());
  CHECK(rep.checks.size() == 9);
  CHECK(rep.to_text().find("FAIL") == std::string::npos);
}

TEST_CASE("scenario selection failure carries the scenario name") {
  ExperimentConfig cfg = parse_config(base_config_text("grid", "0.2", ""));
  cfg.scenarios[0].name = "needs_lsmc";
  cfg.scenarios[0].payoff = PayoffKind::IndexedStrike;
  CHECK_THROWS_WITH_AS(run_sweep(cfg), doctest::Contains("needs_lsmc"), ConfigError);
}
