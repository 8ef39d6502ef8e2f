#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "mfglq/fbsolver.hpp"
#include "mfglq/model.hpp"
#include "mfglq/odecore.hpp"

namespace mfglq {

struct OutOfHorizonError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

enum class GameClass { Mfg, Mpmfg, Gmfg };

struct FbMeta {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Complete equilibrium description: value-function coefficients (p, r, s),
// mean flow z, Gaussian state variance, and per-component value
//   J = p(0)/2 * (x0_std^2 + x0_mean^2) + r(0) * x0_mean + s(0).
struct EquilibriumSolution {
  GameClass game = GameClass::Mfg;
  TimeGrid grid;
  int dim = 0;
  std::vector<LqCoefficients> coeffs;  // per component
  Eigen::MatrixXd interaction;         // aggregate operator used by the solve
  GridFunction p, z, r, s, variance;
  std::vector<double> value;
  FbMeta fb;
};

// Node-sampled affine feedback for one component:
// action(t, x) = -B (p(t) x + r(t)) / C with linear interpolation in t.
struct FeedbackLaw {
  TimeGrid grid;
  double B = 1.0, C = 1.0;
  std::vector<double> p, r;
  double action(double t, double x) const;
};

EquilibriumSolution solve_mfg(const PopulationModel& model, const TimeGrid& grid,
                              const SolverOptions& opts = {});
EquilibriumSolution solve_mpmfg(const PopulationModel& model, const TimeGrid& grid,
                                const SolverOptions& opts = {});
EquilibriumSolution solve_gmfg(const GraphonModel& model, const TimeGrid& grid,
                               const SolverOptions& opts = {});

// Equilibrium feedback of one component; throws OutOfHorizonError for t
// outside [0, T].
double feedback(const EquilibriumSolution& sol, int component, double t, double x);

FeedbackLaw feedback_law(const EquilibriumSolution& sol, int component);
std::vector<FeedbackLaw> feedback_laws(const EquilibriumSolution& sol);

// Re-integrates the mean of the controlled state ODE against the stored
// offset r. For a converged solution this reproduces z up to the solver
// tolerance (the consistency property of the equilibrium).
GridFunction controlled_mean_flow(const EquilibriumSolution& sol);

// The fb problem the solution was produced from (Riccati is re-solved).
FbProblem equilibrium_problem(const EquilibriumSolution& sol);

}  // namespace mfglq
