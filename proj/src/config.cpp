#include "swing/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace swing {

namespace {

using nlohmann::json;

ConstraintMode parse_mode(const std::string& s) {
  if (s == "firm") return ConstraintMode::Firm;
  if (s == "pen") return ConstraintMode::Pen;
  throw ConfigError("constraint must be 'firm' or 'pen', got '" + s + "'");
}

PayoffKind parse_payoff(const std::string& s) {
  if (s == "fixed_strike") return PayoffKind::FixedStrike;
  if (s == "indexed_strike") return PayoffKind::IndexedStrike;
  if (s == "call") return PayoffKind::Call;
  throw ConfigError("payoff must be 'fixed_strike', 'indexed_strike' or 'call', got '" + s + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

template <typename T>
T require(const json& j, const char* block, const char* key) {
  if (!j.contains(key))
    throw ConfigError(std::string(block) + " block is missing key '" + key + "'");
  return j.at(key).get<T>();
}

}  // namespace

std::vector<double> SweepSpec::points() const {
  const int count = static_cast<int>(std::floor((f0_max - f0_min) / f0_step)) + 1;
  std::vector<double> out;
  out.reserve(std::max(count, 0));
  for (int i = 0; i < count; ++i) out.push_back(f0_min + f0_step * i);
  return out;
}

ContractSpec ExperimentConfig::contract_for(const Scenario& s) const {
  ContractSpec c = contract;
  if (s.mode) c.mode = *s.mode;
  if (s.payoff) c.payoff = *s.payoff;
  if (s.penalty_a) c.penalty_a = *s.penalty_a;
  if (s.penalty_b) c.penalty_b = *s.penalty_b;
  c.validate();
  return c;
}

ModelSpec ExperimentConfig::model_for(const Scenario& s) const {
  ModelSpec m = model;
  if (s.sigma) {
    if (static_cast<int>(s.sigma->size()) != m.factor_count)
      throw ConfigError("scenario '" + s.name + "': sigma override has the wrong length");
    m.vols = *s.sigma;
  }
  if (s.rho) m.rho = *s.rho;
  m.validate();
  return m;
}

void ExperimentConfig::validate() const {
  try {
    contract.validate();
    model.validate();
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (sweep.points().empty()) throw ConfigError("sweep range is empty");
  if (scenarios.empty()) throw ConfigError("scenario list is empty");
  if (quad_nodes < 8) throw ConfigError("quad_nodes must be >= 8");
  if (basis_degree < 0) throw ConfigError("basis_degree must be >= 0");
  if (!(q_step > 0.0)) throw ConfigError("q_step must be > 0");
  for (const Scenario& s : scenarios) {
    contract_for(s);
    model_for(s);
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  try {
    ExperimentConfig cfg;

    const json& jc = j.at("contract");
    cfg.contract.n_exercise = require<int>(jc, "contract", "n_exercise");
    cfg.contract.q_max = require<double>(jc, "contract", "q_max");
    cfg.contract.Q_min = require<double>(jc, "contract", "Q_min");
    cfg.contract.Q_max = require<double>(jc, "contract", "Q_max");
    cfg.contract.strike = require<double>(jc, "contract", "strike");
    cfg.contract.mode = parse_mode(get_or<std::string>(jc, "constraint", "firm"));
    cfg.contract.penalty_a = get_or<double>(jc, "penalty_A", 0.0);
    cfg.contract.penalty_b = get_or<double>(jc, "penalty_B", 0.0);
    cfg.contract.payoff = parse_payoff(get_or<std::string>(jc, "payoff", "fixed_strike"));
    cfg.contract.index_window = get_or<int>(jc, "index_window", 0);
    // daily exercise rights: T = n/365 unless stated
    cfg.contract.maturity =
        get_or<double>(jc, "maturity", cfg.contract.n_exercise / 365.0);

    const json& jm = j.at("model");
    cfg.model.factor_count = require<int>(jm, "model", "factor_count");
    cfg.model.mean_reversions = require<std::vector<double>>(jm, "model", "alpha");
    cfg.model.vols = require<std::vector<double>>(jm, "model", "sigma");
    cfg.model.rho = get_or<double>(jm, "rho", 0.0);
    if (jm.contains("f0") && jm.at("f0").is_array()) {
      cfg.model.f0_values = jm.at("f0").get<std::vector<double>>();
      cfg.model.f0_times.resize(cfg.model.f0_values.size());
      for (std::size_t i = 0; i < cfg.model.f0_values.size(); ++i)
        cfg.model.f0_times[i] = cfg.contract.maturity * static_cast<double>(i) /
                                std::max<std::size_t>(1, cfg.model.f0_values.size() - 1);
      cfg.model.f0 = cfg.model.f0_values.front();
    } else {
      cfg.model.f0 = get_or<double>(jm, "f0", 1.0);
    }

    const json& js = j.at("solver");
    cfg.solver.m = get_or<int>(js, "m", 1);
    cfg.solver.path_count = get_or<int>(js, "paths", 100000);
    cfg.solver.seed = get_or<std::uint64_t>(js, "seed", 0);
    if (js.contains("truncation_lambda"))
      cfg.solver.truncation_lambda = js.at("truncation_lambda").get<double>();
    cfg.quad_nodes = get_or<int>(js, "quad_nodes", 32);
    if (js.contains("x_grid")) {
      const json& jg = js.at("x_grid");
      cfg.x_grid.automatic = false;
      cfg.x_grid.lo = require<double>(jg, "x_grid", "min");
      cfg.x_grid.hi = require<double>(jg, "x_grid", "max");
      cfg.x_grid.points = require<int>(jg, "x_grid", "points");
    }

    if (j.contains("engine")) {
      const json& je = j.at("engine");
      const std::string kind = get_or<std::string>(je, "engine", "grid");
      if (kind == "grid")
        cfg.engine = EngineKind::Grid;
      else if (kind == "lsmc")
        cfg.engine = EngineKind::Lsmc;
      else
        throw ConfigError("engine must be 'grid' or 'lsmc', got '" + kind + "'");
      cfg.basis_degree = get_or<int>(je, "basis_degree", 3);
      cfg.q_step = get_or<double>(je, "q_step", 1.0);
      const std::string bb = get_or<std::string>(je, "bang_bang", "off");
      if (bb == "off") {
        cfg.bang_bang = BangBang::Off;
      } else if (bb == "on") {
        cfg.bang_bang = BangBang::On;
      } else if (bb == "verify") {
        cfg.bang_bang = BangBang::Off;
        cfg.bang_bang_verify = true;
      } else {
        throw ConfigError("bang_bang must be 'on', 'off' or 'verify', got '" + bb + "'");
      }
    }

    const json& jw = j.at("sweep");
    cfg.sweep.f0_min = require<double>(jw, "sweep", "f0_min");
    cfg.sweep.f0_max = require<double>(jw, "sweep", "f0_max");
    cfg.sweep.f0_step = require<double>(jw, "sweep", "f0_step");

    if (j.contains("scenarios")) {
      for (const json& sj : j.at("scenarios")) {
        Scenario s;
        s.name = require<std::string>(sj, "scenario", "name");
        if (sj.contains("sigma")) s.sigma = sj.at("sigma").get<std::vector<double>>();
        if (sj.contains("rho")) s.rho = sj.at("rho").get<double>();
        if (sj.contains("constraint")) s.mode = parse_mode(sj.at("constraint").get<std::string>());
        if (sj.contains("payoff")) s.payoff = parse_payoff(sj.at("payoff").get<std::string>());
        if (sj.contains("penalty_A")) s.penalty_a = sj.at("penalty_A").get<double>();
        if (sj.contains("penalty_B")) s.penalty_b = sj.at("penalty_B").get<double>();
        cfg.scenarios.push_back(std::move(s));
      }
    }
    if (cfg.scenarios.empty()) cfg.scenarios.push_back(Scenario{"base", {}, {}, {}, {}, {}, {}});

    cfg.out_dir = get_or<std::string>(j, "out_dir", ".");

    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config structure error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace swing
