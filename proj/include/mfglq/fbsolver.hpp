#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfglq/model.hpp"
#include "mfglq/odecore.hpp"

namespace mfglq {

struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Coupled forward-backward block: forward mean equations z and backward
// offset equations r, one scalar pair per component (a population or a
// graphon index point). The interaction matrix L turns the mean vector into
// the aggregate felt by each component:
//   dz/dt   = (a - gain*p) z + abar * (L z) - gain * r,        z(0) = z0
//   -dr/dt  = (a - gain*p) r + (p*abar - qbar_s) * (L z),      r(T) = -qbarT_sT * (L z(T))
// with all products componentwise and p the precomputed Riccati solution.
struct FbProblem {
  TimeGrid grid;
  int dim = 0;
  GridFunction p;
  std::vector<double> a, abar, gain, qbar_s, qbarT_sT;
  Eigen::MatrixXd interaction;
  std::vector<double> z0;
};

struct FbSolution {
  GridFunction z;
  GridFunction r;
  int iterations = 0;
  double residual = 0.0;  // picard: last sup-norm iterate change; newton: defect norm
  bool converged = false;
};

struct SolverOptions {
  std::string method = "picard";  // "picard" or "newton"
  double tol = 1e-9;
  int max_iter = 500;
  double damping = 0.5;
};

// Solves the componentwise Riccati equations; component k of the result is
// the solution for coeffs[k]. Components are independent, so they are solved
// in parallel.
GridFunction solve_riccati_batch(const std::vector<LqCoefficients>& coeffs,
                                 const TimeGrid& grid);

// Assembles an FbProblem from per-component coefficients and an interaction
// matrix (identity-like [[1]] for a single population, the weight matrix for
// multiple populations, the scaled kernel matrix for a discretized graphon).
FbProblem make_fb_problem(const std::vector<LqCoefficients>& coeffs,
                          const Eigen::MatrixXd& interaction, const TimeGrid& grid);

// One forward sweep of the mean equation given frozen offset data r
// (interpolated linearly at RK4 half-nodes).
GridFunction forward_mean(const FbProblem& problem, const GridFunction& r);

// One backward sweep of the offset equation given frozen mean data z.
GridFunction backward_offset(const FbProblem& problem, const GridFunction& z);

// Damped alternating iteration: r_{n+1} = (1-theta) r_n + theta * bwd(fwd(r_n)),
// starting from r = 0, until the sup-norm change of (z, r) drops below tol.
// After convergence one extra backward sweep pins the terminal condition.
FbSolution picard_solve(const FbProblem& problem, double damping = 0.5,
                        double tol = 1e-9, int max_iter = 500);

// Stacks all node values of (z, r) into one vector of size 2*dim*(n_steps+1)
// and solves the discretized two-point boundary system directly. The system
// is linear in (z, r) given p, so one Newton step suffices. Dense
// factorization caps the practical size (see kNewtonMaxUnknowns); picard is
// the path for large dim * n_steps.
constexpr int kNewtonMaxUnknowns = 4096;
FbSolution newton_solve(const FbProblem& problem, double tol = 1e-9, int max_iter = 500);

FbSolution solve_fb(const FbProblem& problem, const SolverOptions& opts);

// Defect diagnostic: sup over interior nodes and components of the
// central-difference derivative minus the rhs, plus the boundary defects
// |z(0) - z0| and |r(T) - terminal(z(T))|.
double residual(const FbProblem& problem, const FbSolution& candidate);

}  // namespace mfglq
