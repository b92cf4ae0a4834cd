#pragma once

#include "swing/bdpp.hpp"
#include "swing/contract.hpp"
#include "swing/errors.hpp"
#include "swing/market_models.hpp"
#include "swing/schemes.hpp"

#include <optional>
#include <string>
#include <vector>

namespace swing {

enum class EngineKind { Grid, Lsmc };

struct SweepSpec {
  double f0_min = 0.0;
  double f0_max = 0.0;
  double f0_step = 1.0;

  std::vector<double> points() const;
};

// One scenario overrides a subset of the model/contract knobs; everything
// else comes from the base blocks.
struct Scenario {
  std::string name;
  std::optional<std::vector<double>> sigma;
  std::optional<double> rho;
  std::optional<ConstraintMode> mode;
  std::optional<PayoffKind> payoff;
  std::optional<double> penalty_a;
  std::optional<double> penalty_b;
};

struct ExperimentConfig {
  ContractSpec contract;
  ModelSpec model;
  SchemeConfig solver;
  GridSpec x_grid;
  int quad_nodes = 32;
  EngineKind engine = EngineKind::Grid;
  int basis_degree = 3;
  double q_step = 1.0;
  BangBang bang_bang = BangBang::Off;
  // "verify": run the endpoint-vs-enumeration oracle on the configured
  // contract first and enable bang-bang only when it reproduces enumeration.
  bool bang_bang_verify = false;
  SweepSpec sweep;
  std::vector<Scenario> scenarios;
  std::string out_dir = ".";

  ContractSpec contract_for(const Scenario& s) const;
  ModelSpec model_for(const Scenario& s) const;
  void validate() const;  // throws ConfigError
};

// Parses the JSON config document with blocks contract/model/solver/engine/
// sweep/scenarios; every block validates at parse time.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace swing
