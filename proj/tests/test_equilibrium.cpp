#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mfglq/equilibrium.hpp"
#include "mfglq/graphon.hpp"

using namespace mfglq;

namespace {

// A = Abar = 0, B = C = 1, Q = Qbar = 0, Q_T = 1, T = 1. Closed forms:
//   p(t) = 1/(2-t)
//   r(t) = 0
//   z(t) = x0 (2-t)/2
//   s(t) = (sigma^2/2) ln(2-t)
//   v(t) = sigma^2 (2-t) + (v0 - 2 sigma^2) ((2-t)/2)^2
//   J    = p(0)/2 (v0 + x0^2) + s(0)
LqCoefficients oracle_coeffs() {
  LqCoefficients c;
  c.Q_T = 1.0;
  c.sigma = 0.4;
  c.x0_mean = 1.2;
  c.x0_std = 0.7;
  return c;
}

LqCoefficients coupled_coeffs() {
  LqCoefficients c;
  c.A = -0.2;
  c.Abar = 0.5;
  c.Q = 1.0;
  c.Qbar = 0.8;
  c.S = 0.9;
  c.Q_T = 0.5;
  c.Qbar_T = 0.4;
  c.S_T = 0.9;
  c.sigma = 0.3;
  c.x0_mean = 1.0;
  c.x0_std = 0.5;
  return c;
}

}  // namespace

TEST_CASE("single-population closed forms") {
  const PopulationModel m = single_population(oracle_coeffs());
  const TimeGrid g = make_grid(1.0, 1000);

  SolverOptions opts;
  for (const char* method : {"picard", "newton"}) {
    opts.method = method;
    const EquilibriumSolution sol = solve_mfg(m, g, opts);
    REQUIRE(sol.fb.converged);
    CHECK(sol.dim == 1);
    CHECK(sol.game == GameClass::Mfg);

    const double s2 = 0.16, v0 = 0.49;
    for (int k = 0; k <= 1000; k += 100) {
      const double t = g.node(k);
      const double h = 2.0 - t;
      CHECK(sol.p.at(k) == doctest::Approx(1.0 / h).epsilon(1e-10));
      CHECK(std::abs(sol.r.at(k)) <= 1e-12);
      CHECK(sol.z.at(k) == doctest::Approx(1.2 * h / 2.0).epsilon(1e-6));
      CHECK(sol.s.at(k) == doctest::Approx(0.08 * std::log(h)).scale(1.0).epsilon(1e-6));
      const double v = s2 * h + (v0 - 2.0 * s2) * h * h / 4.0;
      CHECK(sol.variance.at(k) == doctest::Approx(v).epsilon(1e-6));
    }
    const double j = 0.25 * (0.49 + 1.44) + 0.08 * std::log(2.0);
    CHECK(sol.value[0] == doctest::Approx(j).epsilon(1e-6));
  }
}

TEST_CASE("mfg solver insists on one population") {
  PopulationModel m = single_population(oracle_coeffs());
  m.coeffs.push_back(oracle_coeffs());
  m.weights = Eigen::MatrixXd::Ones(2, 2) * 0.5;
  CHECK_THROWS_AS(solve_mfg(m, make_grid(1.0, 10)), std::invalid_argument);
  CHECK_NOTHROW(solve_mpmfg(m, make_grid(1.0, 10)));
}

TEST_CASE("one-population mpmfg is exactly the mfg") {
  const PopulationModel m = single_population(coupled_coeffs());
  const TimeGrid g = make_grid(1.0, 200);
  const EquilibriumSolution a = solve_mfg(m, g);
  const EquilibriumSolution b = solve_mpmfg(m, g);
  CHECK(a.z.values == b.z.values);
  CHECK(a.r.values == b.r.values);
  CHECK(a.p.values == b.p.values);
  CHECK(a.s.values == b.s.values);
  CHECK(a.value == b.value);
  CHECK(b.game == GameClass::Mpmfg);
}

TEST_CASE("constant-kernel graphon game collapses to the mfg") {
  // With W = 1 and identical coefficients every index point sees the common
  // mean, which is the single-population fixed point.
  GraphonModel gm;
  gm.coeffs = {coupled_coeffs()};
  gm.graphon = GraphonSpec::constant(1.0);
  gm.m_points = 4;
  const TimeGrid g = make_grid(1.0, 100);

  SolverOptions opts;
  opts.tol = 1e-12;
  const EquilibriumSolution gr = solve_gmfg(gm, g, opts);
  const EquilibriumSolution mf = solve_mfg(single_population(coupled_coeffs()), g, opts);
  REQUIRE(gr.fb.converged);
  CHECK(gr.dim == 4);
  CHECK(gr.game == GameClass::Gmfg);
  for (int k = 0; k <= 100; k += 10) {
    for (int i = 0; i < 4; ++i) {
      CHECK(gr.z.at(k, i) == doctest::Approx(mf.z.at(k)).scale(1.0).epsilon(1e-11));
      CHECK(gr.r.at(k, i) == doctest::Approx(mf.r.at(k)).scale(1.0).epsilon(1e-11));
    }
  }
  for (int i = 0; i < 4; ++i) {
    CHECK(gr.value[i] == doctest::Approx(mf.value[0]).epsilon(1e-10));
  }
}

TEST_CASE("graphon blocks with different costs separate") {
  GraphonModel gm;
  LqCoefficients lo = coupled_coeffs();
  LqCoefficients hi = coupled_coeffs();
  hi.Q = 3.0;
  gm.coeffs = {lo, hi};
  gm.graphon = GraphonSpec::exp_decay(1.0);
  gm.m_points = 8;
  const EquilibriumSolution sol = solve_gmfg(gm, make_grid(1.0, 100));
  REQUIRE(sol.fb.converged);
  // within a block the coefficients agree but the kernel still varies with u
  CHECK(sol.p.at(0, 0) == sol.p.at(0, 3));
  CHECK(sol.p.at(0, 4) == sol.p.at(0, 7));
  CHECK(sol.p.at(0, 0) != sol.p.at(0, 4));
  CHECK(std::abs(sol.z.at(50, 0) - sol.z.at(50, 7)) > 1e-4);
}

TEST_CASE("state variance stays positive") {
  const EquilibriumSolution sol =
      solve_mpmfg(single_population(coupled_coeffs()), make_grid(2.0, 400));
  for (int k = 0; k <= 400; ++k) {
    CHECK(sol.variance.at(k) > 0.0);
  }
}

TEST_CASE("feedback law evaluates the affine rule") {
  const EquilibriumSolution sol =
      solve_mfg(single_population(coupled_coeffs()), make_grid(1.0, 100));
  const double p0 = sol.p.at(0);
  const double r0 = sol.r.at(0);
  CHECK(feedback(sol, 0, 0.0, 2.0) == doctest::Approx(-(p0 * 2.0 + r0)).epsilon(1e-14));

  // halfway between nodes 10 and 11 the coefficients interpolate linearly
  const double t = (10.5 / 100.0);
  const double pm = 0.5 * (sol.p.at(10) + sol.p.at(11));
  const double rm = 0.5 * (sol.r.at(10) + sol.r.at(11));
  CHECK(feedback(sol, 0, t, -1.0) == doctest::Approx(-(pm * -1.0 + rm)).epsilon(1e-12));

  const FeedbackLaw law = feedback_law(sol, 0);
  CHECK(law.action(0.0, 2.0) == feedback(sol, 0, 0.0, 2.0));
  CHECK(feedback_laws(sol).size() == 1);
}

TEST_CASE("feedback rejects out-of-range queries") {
  const EquilibriumSolution sol =
      solve_mfg(single_population(oracle_coeffs()), make_grid(1.0, 10));
  CHECK_THROWS_AS(feedback(sol, 0, -0.1, 0.0), OutOfHorizonError);
  CHECK_THROWS_AS(feedback(sol, 0, 1.0001, 0.0), OutOfHorizonError);
  CHECK_THROWS_AS(feedback(sol, 1, 0.5, 0.0), std::out_of_range);
  CHECK_NOTHROW(feedback(sol, 0, 0.0, 0.0));
  CHECK_NOTHROW(feedback(sol, 0, 1.0, 0.0));
}

TEST_CASE("mean driven by the equilibrium feedback reproduces the stored flow") {
  PopulationModel m = single_population(coupled_coeffs());
  m.coeffs.push_back(oracle_coeffs());
  m.weights = Eigen::MatrixXd(2, 2);
  m.weights << 0.6, 0.4, 0.3, 0.7;
  SolverOptions opts;
  opts.tol = 1e-9;
  const EquilibriumSolution sol = solve_mpmfg(m, make_grid(1.0, 300), opts);
  REQUIRE(sol.fb.converged);
  const GridFunction replay = controlled_mean_flow(sol);
  CHECK(max_abs_diff(replay, sol.z) <= 10.0 * opts.tol);
}

TEST_CASE("solver metadata is propagated") {
  SolverOptions opts;
  opts.tol = 1e-10;
  const EquilibriumSolution sol =
      solve_mfg(single_population(coupled_coeffs()), make_grid(1.0, 100), opts);
  CHECK(sol.fb.converged);
  CHECK(sol.fb.iterations >= 2);
  CHECK(sol.fb.residual <= 1e-10);
}
