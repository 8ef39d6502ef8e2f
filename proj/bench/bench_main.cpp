// Times the OpenMP kernels against the serial reference path (threads = 1).
// Every parallel entry point funnels through parallel_for, so pinning the
// thread count to 1 exercises the plain serial loop. Results are compared
// bitwise to demonstrate that the parallel schedule does not change output.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mfglq/equilibrium.hpp"
#include "mfglq/graphon.hpp"
#include "mfglq/mfc.hpp"
#include "mfglq/parallel.hpp"
#include "mfglq/simulate.hpp"

using namespace mfglq;

namespace {

double time_ms(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

struct Case {
  std::string name;
  std::function<std::vector<double>()> run;  // returns a result fingerprint
};

LqCoefficients base_coeffs() {
  LqCoefficients c;
  c.A = -0.3;
  c.Abar = 0.4;
  c.Q = 1.0;
  c.Qbar = 0.8;
  c.S = 0.9;
  c.Q_T = 0.5;
  c.Qbar_T = 0.4;
  c.S_T = 0.9;
  c.sigma = 0.4;
  c.x0_mean = 1.0;
  c.x0_std = 0.3;
  return c;
}

std::vector<Case> make_cases() {
  std::vector<Case> cases;

  cases.push_back({"graphon solve (M=256, n=2000)", [] {
    GraphonModel gm;
    gm.coeffs = {base_coeffs()};
    gm.graphon = GraphonSpec::min_kernel();
    gm.m_points = 256;
    const auto sol = solve_gmfg(gm, make_grid(1.0, 2000));
    return sol.value;
  }});

  cases.push_back({"ensemble sim (N=2000, reps=32, n=200)", [] {
    PopulationModel pm = single_population(base_coeffs());
    const auto grid = make_grid(1.0, 200);
    const auto sol = solve_mpmfg(pm, grid);
    SimConfig sim;
    sim.n_players = 2000;
    sim.n_reps = 32;
    sim.seed = 7;
    const auto stats = simulate_population(GameModel(pm), feedback_laws(sol), sim);
    std::vector<double> fp = stats.mean.values;
    fp.insert(fp.end(), stats.avg_cost.begin(), stats.avg_cost.end());
    return fp;
  }});

  cases.push_back({"nash gap search (N=600, reps=16)", [] {
    PopulationModel pm = single_population(base_coeffs());
    const auto grid = make_grid(1.0, 100);
    const auto sol = solve_mpmfg(pm, grid);
    SimConfig sim;
    sim.n_players = 600;
    sim.n_reps = 16;
    sim.seed = 11;
    const auto entry = estimate_nash_gap(GameModel(pm), feedback_laws(sol), sim);
    return std::vector<double>{entry.gap, entry.j_equilibrium, entry.j_best};
  }});

  cases.push_back({"policy gradient (n=400)", [] {
    PopulationModel pm = single_population(base_coeffs());
    const auto grid = make_grid(1.0, 400);
    const auto sol = solve_mfg(pm, grid);
    AffinePolicy policy = policy_from_feedback(feedback_law(sol, 0));
    return social_cost_gradient(pm, policy, grid);
  }});

  return cases;
}

}  // namespace

int main() {
  const int max_threads = resolved_threads();
  std::printf("threads available: %d\n\n", max_threads);
  std::printf("%-40s %12s %12s %8s  %s\n", "kernel", "serial ms", "parallel ms",
              "speedup", "bitwise");

  bool all_match = true;
  for (const Case& c : make_cases()) {
    set_threads(1);
    std::vector<double> ref;
    const double serial = time_ms([&] { ref = c.run(); });

    set_threads(max_threads);
    std::vector<double> out;
    const double parallel = time_ms([&] { out = c.run(); });

    const bool match = ref == out;
    all_match = all_match && match;
    std::printf("%-40s %12.1f %12.1f %7.2fx  %s\n", c.name.c_str(), serial,
                parallel, serial / parallel, match ? "identical" : "MISMATCH");
  }
  return all_match ? 0 : 1;
}
