#pragma once

#include "swing/contract.hpp"
#include "swing/market_models.hpp"
#include "swing/parallel.hpp"
#include "swing/schemes.hpp"

#include <Eigen/Core>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swing {

// Scalar Markov state driving the grid engine: an affine-drift diffusion plus
// the map from the state to the spot at each exercise date. Two stock
// instantiations are provided: the OU factor of the one-factor forward model
// (exponential spot map, exact transition available) and a raw price state
// evolved by a user-supplied volatility field (identity spot map).
struct StateModel1D {
  std::function<double(double)> kappa;  // null means 0
  double zeta = 0.0;
  std::function<double(double, double)> sigma;  // instantaneous sigma(t, x)
  std::function<double(int, double)> spot;      // spot at date k given state x
  std::function<double(int)> forward0;          // F_{0, t_k}, the delta denominator
  double x0 = 0.0;

  // Exact one-interval Gaussian transition x' = a x + b + c Z, when known.
  struct AffineStep {
    double a = 1.0, b = 0.0, c = 0.0;
  };
  std::function<AffineStep(double t0, double dt)> exact_step;

  // Scale for automatic grid construction: std dev of the state at maturity.
  // Zero means the caller must supply an explicit grid.
  double state_std_at_maturity = 0.0;
};

StateModel1D factor_state_model(const ModelSpec& model, const ContractSpec& contract);
StateModel1D price_state_model(std::function<double(double, double)> sigma, double x0);

struct GridSpec {
  bool automatic = true;  // span +- span_stds * state std at maturity around x0
  double span_stds = 6.0;
  double lo = 0.0, hi = 0.0;
  int points = 401;
};

enum class BangBang { Off, On };
enum class TransitionKind { Euler, ExactStep };

struct GridEngineConfig {
  int m = 1;
  int quad_nodes = 32;
  GridSpec x_grid;
  TransitionKind transition = TransitionKind::Euler;
  BangBang bang_bang = BangBang::Off;
  double delta_q = 1.0;
  ExecPolicy exec = ExecPolicy::OpenMP;
};

// Value function of the backward recursion on (x-grid) x (volume lattice),
// one slice per exercise date, together with the continuation values and the
// optimal-control table extracted during the sweep. Volume slices are stored
// as columns so each one is contiguous for the transition kernels.
struct ValueSurface {
  std::vector<double> x_grid;
  int n_dates = 0;
  double delta_q = 1.0;
  std::vector<std::vector<int>> q_units;       // attainable lattice units per date
  std::vector<Eigen::MatrixXd> values;         // [k](x index, Q index), k = 0..n
  std::vector<Eigen::MatrixXd> continuations;  // [k](x index, Q' index at k+1), k = 0..n-1
  std::vector<Eigen::MatrixXi> policy;         // [k](x index, Q index) control units
  long extrapolation_hits = 0;
  int m = 1;
  std::string engine;
  std::string diagnostics;

  int q_count(int k) const { return static_cast<int>(q_units[k].size()); }
  double q_value(int k, int qi) const { return delta_q * q_units[k][qi]; }
  int q_index(int k, int units) const;               // -1 when absent
  double value_at(int k, double Q, double x) const;  // linear in x, exact lattice Q
};

ValueSurface solve_grid(const ModelSpec& model, const ContractSpec& contract,
                        const VolumeGrid& volumes, const GridEngineConfig& config);
ValueSurface solve_grid_1d(const StateModel1D& state, const ContractSpec& contract,
                           const VolumeGrid& volumes, const GridEngineConfig& config);

struct PricingResult {
  double price = 0.0;
  double std_error = 0.0;  // 0 for the grid engine
  double delta = 0.0;
  double delta_std_error = 0.0;
  std::map<double, double> consumption_distribution;  // Q_n -> probability
  double convexity_violation = 0.0;  // worst negative x-second-difference of v_0
  long extrapolation_hits = 0;
};

// Deterministic valuation of a grid surface: reads v_0(x0, 0) and propagates
// the state distribution forward through the optimal policy for the delta and
// the consumption statistics.
PricingResult price(const ValueSurface& surface, const StateModel1D& state,
                    const ContractSpec& contract, const VolumeGrid& volumes,
                    const GridEngineConfig& config);

// Envelope-theorem sensitivity E[sum_k q*_k S_{t_k} / F_{0,t_k}] under the
// optimal policy of the surface.
double delta_envelope(const ValueSurface& surface, const StateModel1D& state,
                      const ContractSpec& contract, const VolumeGrid& volumes,
                      const GridEngineConfig& config);

// ---------------------------------------------------------------------------
// Regression Monte Carlo engine
// ---------------------------------------------------------------------------

struct LsmcConfig {
  int basis_degree = 3;
  double ridge = 1e-10;
  BangBang bang_bang = BangBang::Off;
  ExecPolicy exec = ExecPolicy::OpenMP;
  bool exact_factor_steps = false;
};

// Continuation-value regressions per (date, volume node).
struct LsmcSurface {
  int n_dates = 0;
  double delta_q = 1.0;
  std::vector<std::vector<int>> q_units;  // reachable lattice units per date
  std::vector<Eigen::MatrixXd> coeffs;    // [k](basis, Q' index at k+1), k = 0..n-1
  int basis_degree = 3;
  std::vector<int> degree_used;           // per date, after any rank-driven reduction
  std::string diagnostics;
};

LsmcSurface solve_lsmc(const ModelSpec& model, const ContractSpec& contract,
                       const VolumeGrid& volumes, const SchemeConfig& scheme,
                       const LsmcConfig& config);

// Low-biased price: the regressed policy re-simulated on an independent
// ensemble (seed + 1).
PricingResult price(const LsmcSurface& surface, const ModelSpec& model,
                    const ContractSpec& contract, const VolumeGrid& volumes,
                    const SchemeConfig& scheme, const LsmcConfig& config);

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

// Volume lattice units attainable per date; with bang-bang restriction, the
// closure of {0} under endpoint controls (the only nodes a bang-bang pricing
// run visits -- a strict sub-lattice when q_max > delta_q).
std::vector<std::vector<int>> reachable_unit_sets(const VolumeGrid& volumes, int n,
                                                  BangBang bang_bang);

struct BangBangReport {
  // largest |v_bb - v_enum| over the nodes reachable from Q_0 = 0 under
  // endpoint controls (the domain of the endpoint-optimality property)
  double max_discrepancy = 0.0;
  int worst_date = -1;
  double worst_Q = 0.0;
  double worst_x = 0.0;
  // same comparison over every attainable volume node; genuinely nonzero for
  // penalty contracts at nodes offset from the q_max lattice, where a kink of
  // the penalty can sit strictly inside the admissible interval
  double max_discrepancy_all = 0.0;
  double worst_Q_all = 0.0;
};

// Endpoint-restricted controls against full integer enumeration on the same
// engine.
BangBangReport bang_bang_vs_enumeration(const StateModel1D& state, const ContractSpec& contract,
                                        const VolumeGrid& volumes, const GridEngineConfig& config);

struct RefinementRow {
  int m = 0;
  double price = 0.0;
};

// Grid-engine prices across Euler refinements, plus the exact-transition
// reference price when the state model carries one.
struct RefinementStudy {
  std::vector<RefinementRow> rows;
  std::optional<double> exact_price;
};

RefinementStudy m_refinement_study(const ModelSpec& model, const ContractSpec& contract,
                                   const VolumeGrid& volumes, GridEngineConfig config,
                                   std::span<const int> ms);

}  // namespace swing
