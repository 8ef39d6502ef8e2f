#pragma once

#include <cstdint>
#include <vector>

#include "mfglq/equilibrium.hpp"
#include "mfglq/model.hpp"
#include "mfglq/odecore.hpp"

namespace mfglq {

struct SimConfig {
  int n_players = 100;
  int n_reps = 1;
  std::uint64_t seed = 0;
  int deviation_knots = 5;            // sub-intervals for the deviation search
  std::vector<double> proportions;    // population shares; empty = equal split
  int max_search_evals = 200;         // Nelder-Mead evaluation budget
};

// Ensemble statistics from n_reps independent runs of an N-player system.
// Pooled moments combine all players and replications; standard errors come
// from the spread of per-replication statistics.
struct EnsembleStats {
  TimeGrid grid;
  int dim = 0;
  int n_players = 0;
  int n_reps = 0;
  GridFunction mean;
  GridFunction variance;
  GridFunction mean_se;
  GridFunction variance_se;
  std::vector<double> avg_cost;     // per component, average realized player cost
  std::vector<double> avg_cost_se;  // per component
};

struct NashGapEntry {
  int n_players = 0;
  double gap = 0.0;        // max(0, J(equilibrium) - J(best found deviation))
  double std_error = 0.0;  // from replication-level paired differences
  double j_equilibrium = 0.0;
  double j_best = 0.0;
  std::vector<double> deviation;  // 2 * deviation_knots parameters
  int evaluations = 0;
};

struct NashGapReport {
  std::vector<NashGapEntry> entries;
  bool monotone = true;  // gaps nonincreasing within 2 combined standard errors
};

// Euler-Maruyama simulation of the finite game with every player applying its
// component's feedback law. Interactions use the empirical (weighted) means,
// deviator included. Results are bitwise independent of the thread count.
EnsembleStats simulate_population(const GameModel& model,
                                  const std::vector<FeedbackLaw>& laws,
                                  const SimConfig& config);

// Best-deviation search for player 1 via Nelder-Mead over piecewise-constant
// perturbations of the feedback coefficients, with common random numbers
// across candidates. The reported gap is a lower bound on the true epsilon.
NashGapEntry estimate_nash_gap(const GameModel& model,
                               const std::vector<FeedbackLaw>& laws,
                               const SimConfig& config);

// Runs estimate_nash_gap for each N with a per-N seed derived from
// config.seed.
NashGapReport convergence_sweep(const GameModel& model,
                                const std::vector<FeedbackLaw>& laws,
                                const std::vector<int>& n_players_list,
                                const SimConfig& config);

// Population sizes per component under the largest-remainder allocation.
std::vector<int> allocate_players(int n_players, const std::vector<double>& proportions);

}  // namespace mfglq
