#pragma once

#include "swing/config.hpp"

#include <string>
#include <vector>

namespace swing {

struct SweepRow {
  double f0 = 0.0;
  double price = 0.0;
  double delta = 0.0;
  double std_error = 0.0;  // Monte Carlo engines only; not part of the CSV
};

// Prices the configured contract across the f0 sweep for one scenario.
// Deterministic for a fixed seed; Monte Carlo scenarios reuse one ensemble
// across the sweep (the factor paths do not depend on f0).
std::vector<SweepRow> run_sweep_scenario(const ExperimentConfig& config, const Scenario& scenario);

// CSV rows "f0,price,delta" per scenario, written atomically to
// <out_dir>/<scenario>.csv. Returns the written paths.
std::vector<std::string> run_sweep(const ExperimentConfig& config);

// Pen-mode variant of the sweep; forces mode = pen on every scenario.
std::vector<std::string> run_penalty_experiment(const ExperimentConfig& config);

std::string csv_text(const std::vector<SweepRow>& rows);

struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;
  std::string witness;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  std::string to_text() const;
};

// Runs the model-level checks on the configured setup: Cholesky identity,
// field convexity and order monotonicity, price convexity in f0, value
// domination, truncated-vs-plain gap, truncated Stein identity, Lipschitz
// chain bound, bang-bang against enumeration.
VerificationReport run_verification_suite(const ExperimentConfig& config);

}  // namespace swing
