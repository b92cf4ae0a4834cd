#include "swing/convex_order.hpp"

#include "swing/rng.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>

using namespace swing;

namespace {

// closed-form E(sigma Z - k)_+ for Z ~ N(0,1)
double normal_call(double sigma, double k) {
  const double u = k / sigma;
  return sigma * normal_pdf(u) - k * (1.0 - normal_cdf(u));
}

std::vector<double> normal_samples(double sigma, int n, std::uint64_t seed, std::uint32_t dim) {
  const CounterRng rng(seed);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = sigma * rng.normal(i, 0, dim);
  return out;
}

VolField scalar_field(std::function<double(double)> sigma) {
  auto f = [sigma](double, const Eigen::VectorXd& x) {
    return Eigen::MatrixXd::Constant(1, 1, sigma(x(0)));
  };
  return VolField(1, 1, f, VolStructure::Scalar);
}

}  // namespace

TEST_CASE("psd order on matrix pairs") {
  Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd D(2, 2);
  D << 2, 0, 0, 1;

  CHECK(psd_order(I2, D).holds());  // D D^T - I = diag(3, 0) is psd

  const OrderVerdict fail = psd_order(D, I2);
  CHECK(!fail.holds());
  CHECK(fail.worst_violation == doctest::Approx(3.0).epsilon(1e-12));

  // d = q = 1 reduces to |a| <= |b|
  Eigen::MatrixXd a(1, 1), b(1, 1);
  a << -0.5;
  b << 0.7;
  CHECK(psd_order(a, b).holds());
  CHECK(!psd_order(b, a).holds());

  Eigen::MatrixXd bad(1, 2);
  CHECK_THROWS_AS(psd_order(a, bad), std::invalid_argument);
}

TEST_CASE("psd order is reflexive and transitive") {
  const CounterRng rng(5);
  const Eigen::MatrixXd pad = Eigen::MatrixXd::Zero(2, 3);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::MatrixXd A(2, 3), E1(2, 3), E2(2, 3);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) {
        A(i, j) = rng.normal(trial, 0, i * 3 + j);
        E1(i, j) = 0.5 * rng.normal(trial, 1, i * 3 + j);
        E2(i, j) = 0.5 * rng.normal(trial, 2, i * 3 + j);
      }
    CHECK(psd_order(A, A, 0.0).holds());  // reflexive

    // append columns so B B^T = A A^T + E E^T >= A A^T; zero columns pad the
    // smaller matrices to a common shape without touching A A^T
    Eigen::MatrixXd A9(2, 9), B9(2, 9), C9(2, 9);
    A9 << A, pad, pad;
    B9 << A, E1, pad;
    C9 << A, E1, E2;
    CHECK(psd_order(A9, B9, 0.0).holds());
    CHECK(psd_order(B9, C9, 0.0).holds());
    CHECK(psd_order(A9, C9, 1e-12).holds());  // transitive within tolerance
  }
}

TEST_CASE("gaussian convex order check") {
  Eigen::MatrixXd A = 0.5 * Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd B = 1.5 * Eigen::MatrixXd::Identity(2, 2);
  CHECK(gaussian_convex_order_check(A, B, 20000, 6, 8, 42).holds());

  // A = 0: Jensen, E f(0) <= E f(B Z)
  CHECK(gaussian_convex_order_check(Eigen::MatrixXd::Zero(2, 2), B, 20000, 6, 8, 43).holds());

  // augmenting with an extra psd part keeps the order across the family
  const CounterRng rng(44);
  Eigen::MatrixXd M(2, 2), E(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      M(i, j) = rng.normal(0, 0, i * 2 + j);
      E(i, j) = rng.normal(0, 1, i * 2 + j);
    }
  Eigen::MatrixXd padded(2, 4), aug(2, 4);
  padded << M, Eigen::MatrixXd::Zero(2, 2);
  aug << M, E;
  CHECK(gaussian_convex_order_check(padded, aug, 20000, 6, 8, 45).holds());

  // reversed scaling fails
  CHECK(!gaussian_convex_order_check(B, A, 20000, 6, 8, 46).holds());

  // half-normal mean ratio: E|s Z| / E|t Z| = s/t for scalar scalings
  const CounterRng mc(47);
  const int n = 400000;
  double ea = 0.0, eb = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = mc.normal(i, 0, 0);
    ea += std::abs(0.5 * z);
    eb += std::abs(1.5 * z);
  }
  CHECK(ea / eb == doctest::Approx(0.5 / 1.5).epsilon(1e-3));
  CHECK(ea / n == doctest::Approx(0.5 * std::sqrt(2.0 / 3.14159265358979)).epsilon(5e-3));
}

TEST_CASE("one-dimensional convex order tester") {
  // E(Z - 0)_+ = 0.39894, E(2Z - 0)_+ = 0.79788
  CHECK(normal_call(1.0, 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(normal_call(2.0, 0.0) == doctest::Approx(0.7978845608028654).epsilon(1e-14));

  const int n = 200000;
  const std::vector<double> u = normal_samples(1.0, n, 7, 0);
  const std::vector<double> v = normal_samples(2.0, n, 7, 1);
  std::vector<double> ks;
  for (double k = -4.0; k <= 4.0; k += 0.5) ks.push_back(k);

  // sample means of the potentials agree with the closed form
  for (double k : {-1.0, 0.0, 1.5}) {
    double acc = 0.0;
    for (double x : v) acc += std::max(x - k, 0.0);
    CHECK(acc / n == doctest::Approx(normal_call(2.0, k)).epsilon(0.02));
  }

  CHECK(convex_order_1d(u, v, ks, ConvexOrderMode::Cvx).holds());
  CHECK(!convex_order_1d(v, u, ks, ConvexOrderMode::Cvx).holds());
  CHECK(convex_order_1d(u, v, ks, ConvexOrderMode::Icx).holds());
  CHECK(convex_order_1d(v, u, ks, ConvexOrderMode::Dcx).holds() == false);

  // identical samples: worst violation 0
  const OrderVerdict same = convex_order_1d(u, u, ks, ConvexOrderMode::Cvx);
  CHECK(same.holds());
  CHECK(same.worst_violation == 0.0);

  // mean mismatch rejected in cvx mode even with ordered potentials
  std::vector<double> shifted = u;
  for (double& x : shifted) x += 0.8;
  CHECK(!convex_order_1d(u, shifted, ks, ConvexOrderMode::Cvx).holds());
  CHECK(convex_order_1d(u, shifted, ks, ConvexOrderMode::Icx).holds());
}

TEST_CASE("variance consistency of the convex order verdicts") {
  // whenever the tester accepts U <= V, sample variances must be ordered too
  std::vector<double> ks;
  for (double k = -5.0; k <= 5.0; k += 0.5) ks.push_back(k);
  const int n = 100000;
  for (double sv : {1.2, 1.8, 3.0}) {
    const std::vector<double> u = normal_samples(1.0, n, 13, 0);
    const std::vector<double> v = normal_samples(sv, n, 13, 1);
    if (!convex_order_1d(u, v, ks, ConvexOrderMode::Cvx).holds()) continue;
    double vu = 0.0, vv = 0.0;
    for (double x : u) vu += x * x;
    for (double x : v) vv += x * x;
    CHECK(vu / n <= vv / n + 3.0 * std::sqrt(2.0 / n) * sv * sv);
  }
}

TEST_CASE("matrix field convexity certification") {
  // linear scalar field
  CHECK(check_matrix_field_convexity(scalar_field([](double x) { return 0.7 * x; }),
                                     std::vector<double>{-3, -2, -1, 0, 1, 2, 3},
                                     std::vector<double>{0.25, 0.5, 0.75}, 1e-10)
            .holds());

  // kinked non-convex scalar field: |sigma| fails near x = +-1
  std::vector<double> xs;
  for (double x = -3.0; x <= 3.0; x += 0.05) xs.push_back(x);
  const OrderVerdict kinked = check_matrix_field_convexity(
      scalar_field([](double x) { return std::sqrt(2.0 - std::min(x * x, 1.0)); }), xs,
      std::vector<double>{0.5}, 1e-10);
  CHECK(!kinked.holds());

  // the multi-factor forward field is certified through its factorization
  ModelSpec m;
  m.factor_count = 3;
  m.mean_reversions = {0.8, 0.8, 0.8};
  m.vols = {0.7, 0.7, 0.7};
  m.rho = 0.3;
  m.f0 = 20.0;
  std::vector<double> times;
  for (int k = 0; k <= 15; ++k) times.push_back(k / 365.0);
  const VolField field = vol_field_multifactor(m, 15.0 / 365.0, times);
  CHECK(check_matrix_field_convexity(field, xs, std::vector<double>{0.3, 0.5, 0.9}, 1e-10)
            .holds());

  // opaque fields cannot be certified
  VolField opaque(1, 1, [](double, const Eigen::VectorXd& x) {
    return Eigen::MatrixXd::Constant(1, 1, x(0));
  }, VolStructure::Opaque);
  CHECK(check_matrix_field_convexity(opaque, xs, std::vector<double>{0.5}, 1e-10).status ==
        OrderStatus::Indeterminate);
}

TEST_CASE("scalar certification agrees with direct convexity of |sigma| on a corpus") {
  std::vector<double> xs;
  for (double x = -3.0; x <= 3.0; x += 0.02) xs.push_back(x);
  const std::vector<double> lams{0.25, 0.5, 0.75};

  struct Field {
    std::function<double(double)> f;
    bool convex_abs;
  };
  std::vector<Field> corpus;
  for (double c : {0.1, 0.5, 1.0, 2.0})
    corpus.push_back({[c](double x) { return c * x; }, true});
  for (double c : {0.3, 0.7})
    corpus.push_back({[c](double x) { return c * std::abs(x) + 0.1; }, true});
  for (double c : {0.5, 1.5})
    corpus.push_back({[c](double x) { return c * x * x + 0.2; }, true});
  for (double c : {0.2, 0.6})
    corpus.push_back({[c](double x) { return std::max(c * (x - 1.0), 0.0) + 0.05; }, true});
  corpus.push_back({[](double x) { return std::sqrt(1.0 + x * x); }, true});
  corpus.push_back({[](double x) { return std::exp(0.3 * x); }, true});
  corpus.push_back({[](double x) { return 2.0 + std::sin(0.2 * x); }, false});
  corpus.push_back({[](double x) { return std::sqrt(2.0 - std::min(x * x, 1.0)); }, false});
  corpus.push_back({[](double x) { return std::sqrt(std::abs(x)) + 0.1; }, false});
  corpus.push_back({[](double x) { return std::min(std::abs(x), 1.0) + 0.1; }, false});
  for (double c : {0.4, 0.9})
    corpus.push_back({[c](double x) { return 1.0 / (1.0 + std::exp(-c * x)); }, false});
  corpus.push_back({[](double) { return 0.3; }, true});
  corpus.push_back({[](double x) { return std::cosh(0.4 * x); }, true});
  corpus.push_back({[](double x) { return -0.5 * x; }, true});  // |sigma| still convex
  CHECK(corpus.size() >= 20);

  for (const Field& fld : corpus) {
    const OrderVerdict verdict =
        check_matrix_field_convexity(scalar_field(fld.f), xs, lams, 1e-9);
    // direct midpoint test of |sigma| on the same grid
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (std::size_t j = i + 1; j < xs.size(); ++j)
        for (double lam : lams) {
          const double mid = lam * xs[i] + (1 - lam) * xs[j];
          worst = std::min(worst, lam * std::abs(fld.f(xs[i])) +
                                      (1 - lam) * std::abs(fld.f(xs[j])) -
                                      std::abs(fld.f(mid)));
        }
    const bool direct = -worst <= 1e-9;
    CHECK(verdict.holds() == direct);
    CHECK(verdict.holds() == fld.convex_abs);
  }
}

TEST_CASE("semi-convexity estimation") {
  auto report = estimate_semiconvexity([](double x) { return x; }, -3.0, 3.0, 2001);
  CHECK(report.a_sigma == 0.0);

  report = estimate_semiconvexity([](double) { return 0.7; }, -3.0, 3.0, 2001);
  CHECK(report.a_sigma == 0.0);

  // sigma^2 = 2 - min(x^2, 1): second derivative -2 on (-1, 1), a = 1
  report = estimate_semiconvexity(
      [](double x) { return std::sqrt(2.0 - std::min(x * x, 1.0)); }, -3.0, 3.0, 6001);
  CHECK(report.a_sigma == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(std::abs(report.argmin_x) < 1.0 + 1e-2);

  // scale covariance: a(c sigma) = c^2 a(sigma); the grid is kept at 2001
  // nodes so second-difference cancellation stays well under the tolerance
  auto sig = [](double x) { return std::sqrt(2.0 - std::min(x * x, 1.0)); };
  const double base = estimate_semiconvexity(sig, -3.0, 3.0, 2001).a_sigma;
  for (double c : {0.5, 2.0, 3.7}) {
    auto scaled = [c, sig](double x) { return c * sig(x); };
    const double got = estimate_semiconvexity(scaled, -3.0, 3.0, 2001).a_sigma;
    CHECK(got == doctest::Approx(c * c * base).epsilon(1e-10));
  }

  CHECK_THROWS_AS(estimate_semiconvexity([](double) { return 1.0; }, -1.0, 1.0, 100),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      estimate_semiconvexity([](double x) { return std::sqrt(x); }, -1.0, 1.0, 2001),
      std::invalid_argument);
}

TEST_CASE("lipschitz chain bound") {
  // no payoff or penalty slope: zero bound
  std::vector<double> zero_lips(10, 0.0);
  CHECK(lipschitz_chain_bound(0, 2, 0.01, 0.5, 1.0, zero_lips, 0.0).bound == 0.0);

  // hand values: C = 1.1, C^10 = 2.5937... <= e
  const LipschitzChainBound b = lipschitz_chain_bound(
      0, 10, 0.1, 0.5, 1.0, std::vector<double>{1.0}, 0.0);
  CHECK(b.growth_constant == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(b.step_powers[1] == doctest::Approx(2.5937424601).epsilon(1e-10));
  CHECK(b.step_powers[1] <= b.exp_envelope[1]);
  CHECK(b.exp_envelope[1] == doctest::Approx(2.718281828459045).epsilon(1e-12));

  // non-increasing in k (fewer summands)
  std::vector<double> lips(10, 0.7);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 10; ++k) {
    const double bk = lipschitz_chain_bound(k, 4, 0.01, 0.3, 0.8, lips, 0.5).bound;
    CHECK(bk <= prev + 1e-15);
    prev = bk;
  }

  // every power is dominated by its exponential envelope
  const LipschitzChainBound chain =
      lipschitz_chain_bound(0, 8, 0.005, 0.4, 1.2, lips, 0.5);
  for (std::size_t i = 0; i < chain.step_powers.size(); ++i)
    CHECK(chain.step_powers[i] <= chain.exp_envelope[i] * (1.0 + 1e-15));
}

TEST_CASE("drift monotonicity coefficient") {
  CHECK(drift_monotonicity_coefficient([](double x) { return 0.4 * x; }, -3, 3, 2001) == 0.0);
  CHECK(drift_monotonicity_coefficient([](double x) { return -0.5 * x; }, -3, 3, 2001) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // convex piecewise-linear with left slope -2
  CHECK(drift_monotonicity_coefficient(
            [](double x) { return std::max(-2.0 * x, 0.5 * x); }, -3, 3, 2001) ==
        doctest::Approx(2.0).epsilon(1e-9));
}
