#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfglq/odecore.hpp"
#include "mfglq/rng.hpp"

using namespace mfglq;

TEST_CASE("grid function storage and interpolation") {
  const TimeGrid g = make_grid(1.0, 4);
  GridFunction f(g, 2);
  for (int k = 0; k <= 4; ++k) {
    f.at(k, 0) = g.node(k);        // linear ramp
    f.at(k, 1) = 1.0 - g.node(k);  // reversed ramp
  }
  CHECK(f.interp(0.375, 0) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(f.interp(0.375, 1) == doctest::Approx(0.625).epsilon(1e-15));
  // clamping outside the horizon
  CHECK(f.interp(-1.0, 0) == 0.0);
  CHECK(f.interp(2.0, 0) == 1.0);
  CHECK(f.max_abs() == 1.0);
}

TEST_CASE("max_abs_diff is a sup norm") {
  const TimeGrid g = make_grid(1.0, 2);
  GridFunction a(g, 1), b(g, 1);
  a.at(1) = 3.0;
  b.at(1) = 1.0;
  b.at(2) = -0.5;
  CHECK(max_abs_diff(a, b) == 2.0);
}

// dy/dt = y, y(0) = 1: y(1) = e. Classical RK4 at n = 100 is well inside
// 1e-9 of the true value.
TEST_CASE("forward integration reproduces the exponential") {
  const TimeGrid g = make_grid(1.0, 100);
  const GridFunction y = rk4_forward(g, 1.0, [](double, double x) { return x; });
  CHECK(y.at(100) == doctest::Approx(2.718281828459045).epsilon(1e-9));
  CHECK(y.at(0) == 1.0);
}

TEST_CASE("backward integration inverts the forward one") {
  const TimeGrid g = make_grid(1.0, 100);
  const GridFunction y =
      rk4_backward(g, 2.718281828459045, [](double, double x) { return x; });
  CHECK(y.at(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(y.at(100) == 2.718281828459045);
}

TEST_CASE("integration error decays at fourth order") {
  const double exact = 2.718281828459045;
  auto err = [&](int n) {
    const GridFunction y =
        rk4_forward(make_grid(1.0, n), 1.0, [](double, double x) { return x; });
    return std::abs(y.at(n) - exact);
  };
  const double e25 = err(25);
  const double e50 = err(50);
  CHECK(e25 / e50 > 12.0);  // 2^4 = 16 up to higher-order terms
}

TEST_CASE("vector system: uniform rotation") {
  // (x, y)' = (-y, x) rotates (1, 0) to (0, 1) after a quarter turn.
  const TimeGrid g = make_grid(std::acos(-1.0) / 2.0, 100);
  const double init[2] = {1.0, 0.0};
  const GridFunction sol = rk4_forward(
      g, init, [](double, std::span<const double> s, std::span<double> d) {
        d[0] = -s[1];
        d[1] = s[0];
      });
  CHECK(sol.at(100, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  CHECK(sol.at(100, 1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("blow-up raises instead of returning garbage") {
  // dy/dt = y^2 from y(0) = 2 blows up at t = 1/2.
  const TimeGrid g = make_grid(1.0, 1000);
  CHECK_THROWS_AS(rk4_forward(g, 2.0, [](double, double x) { return x * x; }),
                  DivergenceError);
}

// A = 0, B = C = 1, Q = Qbar = 0, Q_T + Qbar_T = 1, T = 1 gives
// the closed form p(t) = 1 / (2 - t).
TEST_CASE("riccati closed form: pure control cost") {
  LqCoefficients c;
  c.Q_T = 1.0;
  const TimeGrid g = make_grid(1.0, 1000);
  const GridFunction p = solve_riccati(c, g);
  CHECK(p.at(0) == doctest::Approx(0.5).epsilon(1e-10));
  for (int k = 0; k <= 1000; k += 125) {
    CHECK(p.at(k) == doctest::Approx(1.0 / (2.0 - g.node(k))).epsilon(1e-10));
  }
}

// B = 0 removes the quadratic term; with A = 0 the equation is
// -dp/dt = Q + Qbar, so p(t) = p_T + (Q + Qbar)(T - t) exactly
// (RK4 integrates constants without truncation error).
TEST_CASE("riccati closed form: no control") {
  LqCoefficients c;
  c.B = 0.0;
  c.Q = 1.5;
  c.Qbar = 0.5;
  c.Q_T = 0.6;
  c.Qbar_T = 0.4;
  const TimeGrid g = make_grid(1.0, 100);
  const GridFunction p = solve_riccati(c, g);
  CHECK(p.at(0) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(p.at(50) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(p.at(100) == 1.0);
}

TEST_CASE("riccati convergence is fourth order") {
  LqCoefficients c;
  c.Q_T = 1.0;
  auto err = [&](int n) {
    return std::abs(solve_riccati(c, make_grid(1.0, n)).at(0) - 0.5);
  };
  CHECK(err(50) / err(100) > 12.0);
}

TEST_CASE("riccati stays nonnegative on validated coefficients") {
  RandomStream rs(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const RandomStream t = rs.child(trial);
    LqCoefficients c;
    c.A = 2.0 * t.uniform(0) - 1.0;
    c.B = 0.5 + t.uniform(1);
    c.C = 0.5 + t.uniform(2);
    c.Q = 2.0 * t.uniform(3);
    c.Qbar = 2.0 * t.uniform(4);
    c.Q_T = 2.0 * t.uniform(5);
    c.Qbar_T = 2.0 * t.uniform(6);
    const TimeGrid g = make_grid(0.5 + t.uniform(7), 400);
    const GridFunction p = solve_riccati(c, g);
    for (int k = 0; k <= 400; ++k) {
      CHECK(p.at(k) >= -1e-10);
    }
  }
}
