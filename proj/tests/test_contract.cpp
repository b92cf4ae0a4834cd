#include "swing/contract.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace swing;

namespace {

ContractSpec reference_contract(ConstraintMode mode = ConstraintMode::Firm) {
  ContractSpec c;
  c.n_exercise = 15;
  c.maturity = 15.0 / 365.0;
  c.q_max = 6;
  c.Q_min = 50;
  c.Q_max = 80;
  c.strike = 20.0;
  c.mode = mode;
  c.penalty_a = 0.2;
  c.penalty_b = 0.2;
  return c;
}

}  // namespace

TEST_CASE("firm volume grid bounds") {
  const VolumeGrid g = build_volume_grid(reference_contract());

  // full lower/upper envelopes of the 15-date contract
  const double lower_expect[] = {0, 0, 0, 0, 0, 0, 0, 2, 8, 14, 20, 26, 32, 38, 44, 50};
  const double upper_expect[] = {0, 6, 12, 18, 24, 30, 36, 42, 48, 54, 60, 66, 72, 78, 80, 80};
  for (int k = 0; k <= 15; ++k) {
    CHECK(g.lower(k) == lower_expect[k]);
    CHECK(g.upper(k) == upper_expect[k]);
  }
  CHECK(g.lower(7) == 2);  // max(0, 50 - 8*6)
  CHECK(g.upper(1) == 6);  // min(6, 80)

  // date 0 has the single node Q = 0
  CHECK(g.attainable(0) == std::vector<double>{0.0});

  // terminal attainable set sits inside [Q_min, Q_max]
  CHECK(g.lower(15) >= 50);
  CHECK(g.upper(15) <= 80);
}

TEST_CASE("pen volume grid is unconstrained below k q_max") {
  const VolumeGrid g = build_volume_grid(reference_contract(ConstraintMode::Pen));
  for (int k = 0; k <= 15; ++k) {
    CHECK(g.lower(k) == 0);
    CHECK(g.upper(k) == 6.0 * k);
  }
  const auto iv = g.admissible(7, 13.0);
  CHECK(iv.lo == 0.0);
  CHECK(iv.hi == 6.0);
}

TEST_CASE("firm admissible sets are nonempty everywhere on the grid") {
  const ContractSpec c = reference_contract();
  const VolumeGrid g = build_volume_grid(c);
  for (int k = 0; k < c.n_exercise; ++k) {
    for (double Q : g.attainable(k)) {
      const auto iv = g.admissible(k, Q);
      CHECK(!iv.empty());
      CHECK(iv.lo >= 0.0);
      CHECK(iv.hi <= c.q_max);
      // reachability closed under admissible controls
      for (double q : g.admissible_controls(k, Q)) {
        CHECK(Q + q >= g.lower(k + 1) - 1e-12);
        CHECK(Q + q <= g.upper(k + 1) + 1e-12);
      }
    }
  }
}

TEST_CASE("grid construction rejects a step that does not divide q_max") {
  CHECK_THROWS_AS(build_volume_grid(reference_contract(), 0.7), std::invalid_argument);
  CHECK_NOTHROW(build_volume_grid(reference_contract(), 0.5));
  CHECK_NOTHROW(build_volume_grid(reference_contract(), 2.0));
}

TEST_CASE("payoff values") {
  CHECK(payoff_value(PayoffKind::FixedStrike, 6.0, 25.0, 20.0) == 30.0);
  CHECK(payoff_value(PayoffKind::FixedStrike, 6.0, 15.0, 20.0) == -30.0);
  CHECK(payoff_value(PayoffKind::Call, 6.0, 15.0, 20.0) == 0.0);
  CHECK(payoff_value(PayoffKind::Call, 6.0, 25.0, 20.0) == 30.0);
  CHECK(payoff_value(PayoffKind::IndexedStrike, 2.0, 25.0, 22.0) == 6.0);
  CHECK_THROWS_AS(payoff_value(PayoffKind::FixedStrike, -1.0, 25.0, 20.0), std::invalid_argument);

  // affine in q: payoff(q) = q * payoff(1), exactly
  for (double spot : {12.0, 20.0, 31.5}) {
    for (double q : {0.0, 1.0, 3.0, 6.0}) {
      CHECK(payoff_value(PayoffKind::FixedStrike, q, spot, 20.0) ==
            q * payoff_value(PayoffKind::FixedStrike, 1.0, spot, 20.0));
      CHECK(payoff_value(PayoffKind::Call, q, spot, 20.0) ==
            q * payoff_value(PayoffKind::Call, 1.0, spot, 20.0));
    }
  }
}

TEST_CASE("index averages") {
  const std::vector<double> spots{10.0, 12.0, 14.0, 16.0};
  CHECK(index_average(spots, 0, 0) == 10.0);  // empty window reads the current spot
  CHECK(index_average(spots, 3, 0) == 12.0);  // full past
  CHECK(index_average(spots, 3, 2) == 13.0);  // last two
}

TEST_CASE("penalty values") {
  const ContractSpec pen = reference_contract(ConstraintMode::Pen);
  CHECK(penalty_value(pen, 20.0, 60.0) == 0.0);
  CHECK(penalty_value(pen, 20.0, 40.0) == doctest::Approx(-40.0));  // -20 * 0.2 * 10
  CHECK(penalty_value(pen, 20.0, 90.0) == doctest::Approx(-40.0));
  CHECK(penalty_value(reference_contract(ConstraintMode::Firm), 20.0, 40.0) == 0.0);

  // concave piecewise-linear in Q with kinks exactly at Q_min and Q_max
  auto p = [&](double Q) { return penalty_value(pen, 20.0, Q); };
  for (double Q = 1.0; Q <= 99.0; Q += 1.0)
    CHECK(p(Q - 1.0) - 2.0 * p(Q) + p(Q + 1.0) <= 1e-12);
  CHECK(p(49.0) - 2.0 * p(50.0) + p(51.0) < -1e-9);
  CHECK(p(79.0) - 2.0 * p(80.0) + p(81.0) < -1e-9);
  for (double Q : {55.0, 70.0}) CHECK(p(Q - 1.0) - 2.0 * p(Q) + p(Q + 1.0) == 0.0);

  CHECK(penalty_value(pen, 20.0, 50.0) == 0.0);
  CHECK(penalty_value(pen, 20.0, 80.0) == 0.0);
}

TEST_CASE("contract validation") {
  ContractSpec c = reference_contract();
  CHECK_NOTHROW(c.validate());
  c.Q_max = 79;  // 79 - 50 not a multiple of 6
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = reference_contract();
  c.q_max = 5.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = reference_contract();
  c.Q_min = 100;  // unreachable: 15 * 6 = 90 < 100
  c.Q_max = 130;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}
