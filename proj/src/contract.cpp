#include "swing/contract.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace swing {

namespace {

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-9; }

}  // namespace

void ContractSpec::validate() const {
  if (n_exercise < 1) throw std::invalid_argument("ContractSpec: n_exercise must be >= 1");
  if (!(maturity > 0.0)) throw std::invalid_argument("ContractSpec: maturity must be > 0");
  if (!(q_max > 0.0)) throw std::invalid_argument("ContractSpec: q_max must be > 0");
  if (!(Q_min >= 0.0 && Q_max >= Q_min))
    throw std::invalid_argument("ContractSpec: need 0 <= Q_min <= Q_max");
  if (!is_integer(q_max) || !is_integer(Q_min) || !is_integer(Q_max))
    throw std::invalid_argument("ContractSpec: q_max, Q_min, Q_max must be integers");
  const double mult = (Q_max - Q_min) / q_max;
  if (!is_integer(mult))
    throw std::invalid_argument("ContractSpec: Q_max - Q_min must be a multiple of q_max");
  if (penalty_a < 0.0 || penalty_b < 0.0)
    throw std::invalid_argument("ContractSpec: penalties must be >= 0");
  if (mode == ConstraintMode::Firm && Q_min > n_exercise * q_max)
    throw std::invalid_argument("ContractSpec: Q_min unreachable with n_exercise * q_max");
  if (index_window < 0)
    throw std::invalid_argument("ContractSpec: index_window must be >= 0");
}

VolumeGrid VolumeGrid::build(const ContractSpec& contract, double delta_q) {
  contract.validate();
  if (!(delta_q > 0.0)) throw std::invalid_argument("build_volume_grid: delta_q must be > 0");
  const double ratio = contract.q_max / delta_q;
  if (!is_integer(ratio))
    throw std::invalid_argument("build_volume_grid: delta_q must divide q_max");
  if (!is_integer(contract.Q_min / delta_q) || !is_integer(contract.Q_max / delta_q))
    throw std::invalid_argument("build_volume_grid: delta_q must divide Q_min and Q_max");

  VolumeGrid g;
  g.n_ = contract.n_exercise;
  g.delta_q_ = delta_q;
  g.q_max_ = contract.q_max;
  g.mode_ = contract.mode;
  g.lo_units_.resize(g.n_ + 1);
  g.hi_units_.resize(g.n_ + 1);

  const long qbar = std::lround(contract.q_max / delta_q);
  const long Qlo = std::lround(contract.Q_min / delta_q);
  const long Qhi = std::lround(contract.Q_max / delta_q);
  for (int k = 0; k <= g.n_; ++k) {
    if (contract.mode == ConstraintMode::Firm) {
      g.lo_units_[k] = static_cast<int>(std::max<long>(0, Qlo - (g.n_ - k) * qbar));
      g.hi_units_[k] = static_cast<int>(std::min<long>(static_cast<long>(k) * qbar, Qhi));
    } else {
      g.lo_units_[k] = 0;
      g.hi_units_[k] = static_cast<int>(static_cast<long>(k) * qbar);
    }
  }
  return g;
}

VolumeGrid build_volume_grid(const ContractSpec& contract, double delta_q) {
  return VolumeGrid::build(contract, delta_q);
}

double VolumeGrid::lower(int k) const { return delta_q_ * lo_units_[k]; }
double VolumeGrid::upper(int k) const { return delta_q_ * hi_units_[k]; }
int VolumeGrid::lower_units(int k) const { return lo_units_[k]; }
int VolumeGrid::upper_units(int k) const { return hi_units_[k]; }

std::vector<double> VolumeGrid::attainable(int k) const {
  std::vector<double> out;
  out.reserve(hi_units_[k] - lo_units_[k] + 1);
  for (int u = lo_units_[k]; u <= hi_units_[k]; ++u) out.push_back(delta_q_ * u);
  return out;
}

VolumeGrid::Interval VolumeGrid::admissible(int k, double Q) const {
  if (k < 0 || k >= n_) throw std::invalid_argument("VolumeGrid: date out of range");
  if (mode_ == ConstraintMode::Pen) return {0.0, q_max_};
  const double lo = std::max(0.0, lower(k + 1) - Q);
  const double hi = std::min(q_max_, upper(k + 1) - Q);
  return {lo, hi};
}

int VolumeGrid::q_max_units() const { return static_cast<int>(std::lround(q_max_ / delta_q_)); }

VolumeGrid::UnitRange VolumeGrid::admissible_units(int k, int Q_units) const {
  if (k < 0 || k >= n_) throw std::invalid_argument("VolumeGrid: date out of range");
  const int qbar = q_max_units();
  if (mode_ == ConstraintMode::Pen) return {0, qbar};
  return {std::max(0, lo_units_[k + 1] - Q_units), std::min(qbar, hi_units_[k + 1] - Q_units)};
}

std::vector<double> VolumeGrid::admissible_controls(int k, double Q) const {
  const Interval iv = admissible(k, Q);
  std::vector<double> out;
  if (iv.empty()) return out;
  const int lo = static_cast<int>(std::lround(iv.lo / delta_q_));
  const int hi = static_cast<int>(std::lround(iv.hi / delta_q_));
  out.reserve(hi - lo + 1);
  for (int u = lo; u <= hi; ++u) out.push_back(delta_q_ * u);
  return out;
}

double payoff_value(PayoffKind kind, double q, double spot, double reference) {
  if (q < 0.0) throw std::invalid_argument("payoff_value: q must be >= 0");
  switch (kind) {
    case PayoffKind::FixedStrike:
    case PayoffKind::IndexedStrike:
      return q * (spot - reference);
    case PayoffKind::Call:
      return q * std::max(spot - reference, 0.0);
  }
  return 0.0;
}

double index_average(std::span<const double> spots, int k, int window) {
  if (k == 0) return spots.empty() ? 0.0 : spots[0];
  const int first = window > 0 ? std::max(0, k - window) : 0;
  if (first >= k) throw std::invalid_argument("index_average: empty index window");
  double acc = 0.0;
  for (int i = first; i < k; ++i) acc += spots[i];
  return acc / (k - first);
}

double penalty_value(const ContractSpec& contract, double terminal_spot, double Qn) {
  if (Qn < 0.0) throw std::invalid_argument("penalty_value: Qn must be >= 0");
  if (contract.mode == ConstraintMode::Firm) return 0.0;
  const double deficit = std::max(contract.Q_min - Qn, 0.0);
  const double excess = std::max(Qn - contract.Q_max, 0.0);
  return -terminal_spot * (contract.penalty_a * deficit + contract.penalty_b * excess);
}

}  // namespace swing
