#pragma once

#include <span>
#include <string>
#include <vector>

namespace swing {

enum class ConstraintMode { Firm, Pen };
enum class PayoffKind { FixedStrike, IndexedStrike, Call };

// Take-or-pay contract data. Per-date purchases live in [0, q_max]; the
// cumulative purchase must end in [Q_min, Q_max] (Firm) or is charged the
// terminal penalty (Pen). Volumes satisfy the integrality assumption: q_max,
// Q_min, Q_max are integers and Q_max - Q_min is a multiple of q_max.
struct ContractSpec {
  int n_exercise = 0;
  double maturity = 0.0;  // years; daily exercise rights give n/365
  double q_max = 0.0;
  double Q_min = 0.0;
  double Q_max = 0.0;
  double strike = 0.0;
  ConstraintMode mode = ConstraintMode::Firm;
  double penalty_a = 0.0;
  double penalty_b = 0.0;
  PayoffKind payoff = PayoffKind::FixedStrike;
  // Indexed strike: average over the last index_window exercise dates,
  // 0 means the full past {0, ..., k-1}.
  int index_window = 0;

  double exercise_time(int k) const { return maturity * k / n_exercise; }
  void validate() const;  // throws std::invalid_argument
};

// Attainable cumulative volumes per date and admissible controls per
// (date, cumulative) pair, discretized on the delta_q lattice.
class VolumeGrid {
 public:
  static VolumeGrid build(const ContractSpec& contract, double delta_q = 1.0);

  double delta_q() const { return delta_q_; }
  int dates() const { return n_; }

  double lower(int k) const;  // Q^d(t_k); Pen mode: 0
  double upper(int k) const;  // Q^u(t_k); Pen mode: k q_max

  // Lattice offsets in delta_q units; attainable Q = {delta_q * u}.
  int lower_units(int k) const;
  int upper_units(int k) const;
  std::vector<double> attainable(int k) const;

  struct Interval {
    double lo, hi;
    bool empty() const { return lo > hi; }
  };
  Interval admissible(int k, double Q) const;
  std::vector<double> admissible_controls(int k, double Q) const;

  // Engine-facing view on the delta_q lattice.
  int q_max_units() const;
  struct UnitRange {
    int lo, hi;
    bool empty() const { return lo > hi; }
  };
  UnitRange admissible_units(int k, int Q_units) const;

 private:
  int n_ = 0;
  double delta_q_ = 1.0;
  double q_max_ = 0.0;
  ConstraintMode mode_ = ConstraintMode::Firm;
  std::vector<int> lo_units_, hi_units_;
};

VolumeGrid build_volume_grid(const ContractSpec& contract, double delta_q = 1.0);

// Per-date profit of purchasing q at the given spot. `reference` is the
// strike for FixedStrike/Call and the index average for IndexedStrike.
double payoff_value(PayoffKind kind, double q, double spot, double reference);

// Average of past spots over the index window I_k (defaults to the full
// past); at k = 0 the empty window is read as the current spot, making the
// date-0 indexed payoff vanish.
double index_average(std::span<const double> spots, int k, int window);

// Terminal condition: 0 in Firm mode, otherwise
// -spot * (A (Qn - Q_min)_- + B (Qn - Q_max)_+).
double penalty_value(const ContractSpec& contract, double terminal_spot, double Qn);

}  // namespace swing
