#pragma once

#include <utility>
#include <vector>

#include "mfglq/equilibrium.hpp"
#include "mfglq/model.hpp"

namespace mfglq {

// Shared-control policy alpha(t, x) = -(B/C) (pi(t) x + rho(t)) with free
// node-sampled coefficients; the search class for the social optimum.
struct AffinePolicy {
  TimeGrid grid;
  std::vector<double> pi, rho;
};

AffinePolicy policy_from_feedback(const FeedbackLaw& law);

struct OptimizerOptions {
  double tol = 1e-6;     // stop when the gradient sup-norm drops below this
  int max_iter = 2000;
  double fd_step = 1e-6;  // relative central-difference step
};

struct OptimizerMeta {
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

struct SocialCostReport {
  double mfg_social_cost = 0.0;
  double mfc_cost = 0.0;
  double price_of_anarchy = 1.0;
  OptimizerMeta optimizer;
};

// Exact expected cost when the whole population applies the policy: the state
// law stays Gaussian, so the mean/variance pair propagates deterministically
// and every cost expectation is closed-form in (m, v, pi, rho).
double social_cost(const PopulationModel& model, const AffinePolicy& policy,
                   const TimeGrid& grid);

// Central finite-difference gradient of social_cost in the stacked
// [pi; rho] node coordinates.
std::vector<double> social_cost_gradient(const PopulationModel& model,
                                         const AffinePolicy& policy,
                                         const TimeGrid& grid,
                                         double rel_step = 1e-6);

// Gradient descent with backtracking line search, initialized at the MFG
// equilibrium feedback (or at `init` when given).
std::pair<AffinePolicy, OptimizerMeta> optimize(const PopulationModel& model,
                                                const TimeGrid& grid,
                                                const OptimizerOptions& opts = {},
                                                const AffinePolicy* init = nullptr);

SocialCostReport price_of_anarchy(const PopulationModel& model, const TimeGrid& grid,
                                  const SolverOptions& solver_opts = {},
                                  const OptimizerOptions& opt_opts = {});

}  // namespace mfglq
