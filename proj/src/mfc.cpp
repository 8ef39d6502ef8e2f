#include "mfglq/mfc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfglq/odecore.hpp"
#include "mfglq/parallel.hpp"

namespace mfglq {

namespace {

const LqCoefficients& single_coeffs(const PopulationModel& model) {
  if (model.population_count() != 1) {
    throw std::invalid_argument("mfc supports single-population models only");
  }
  return model.coeffs[0];
}

void check_policy(const AffinePolicy& policy, const TimeGrid& grid) {
  const size_t nodes = static_cast<size_t>(grid.n_nodes());
  if (policy.pi.size() != nodes || policy.rho.size() != nodes) {
    throw std::invalid_argument("policy arrays do not match the grid");
  }
}

// Expected running cost at one node under X ~ N(m, v) when the population
// mean equals m:
//   E f = [Q (v + m^2) + Qbar (v + ((1-S) m)^2) + gain E(pi X + rho)^2] / 2.
double running_cost(const LqCoefficients& c, double m, double v, double pi,
                    double rho) {
  const double track = (1.0 - c.S) * m;
  const double control = pi * pi * (v + m * m) + 2.0 * pi * rho * m + rho * rho;
  return 0.5 * (c.Q * (v + m * m) + c.Qbar * (v + track * track) +
                c.gain() * control);
}

double terminal_cost(const LqCoefficients& c, double m, double v) {
  const double track = (1.0 - c.S_T) * m;
  return 0.5 * (c.Q_T * (v + m * m) + c.Qbar_T * (v + track * track));
}

}  // namespace

AffinePolicy policy_from_feedback(const FeedbackLaw& law) {
  return AffinePolicy{law.grid, law.p, law.r};
}

double social_cost(const PopulationModel& model, const AffinePolicy& policy,
                   const TimeGrid& grid) {
  const LqCoefficients& c = single_coeffs(model);
  check_policy(policy, grid);
  const int n = grid.n_steps;
  const double dt = grid.dt();
  const double g = c.gain();
  const double s2 = c.sigma * c.sigma;

  // McKean-Vlasov closure: the population mean is the mean of the flow.
  //   dm/dt = (A + Abar - gain*pi) m - gain*rho
  //   dv/dt = 2 (A - gain*pi) v + sigma^2
  auto rhs = [&](double pi, double rho, double m, double v, double& dm, double& dv) {
    dm = (c.A + c.Abar - g * pi) * m - g * rho;
    dv = 2.0 * (c.A - g * pi) * v + s2;
  };

  std::vector<double> ms(n + 1), vs(n + 1);
  double m = c.x0_mean;
  double v = c.x0_std * c.x0_std;
  ms[0] = m;
  vs[0] = v;
  for (int k = 0; k < n; ++k) {
    const double pim = 0.5 * (policy.pi[k] + policy.pi[k + 1]);
    const double rhom = 0.5 * (policy.rho[k] + policy.rho[k + 1]);
    double dm1, dv1, dm2, dv2, dm3, dv3, dm4, dv4;
    rhs(policy.pi[k], policy.rho[k], m, v, dm1, dv1);
    rhs(pim, rhom, m + 0.5 * dt * dm1, v + 0.5 * dt * dv1, dm2, dv2);
    rhs(pim, rhom, m + 0.5 * dt * dm2, v + 0.5 * dt * dv2, dm3, dv3);
    rhs(policy.pi[k + 1], policy.rho[k + 1], m + dt * dm3, v + dt * dv3, dm4, dv4);
    m += dt / 6.0 * (dm1 + 2.0 * dm2 + 2.0 * dm3 + dm4);
    v += dt / 6.0 * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4);
    if (!std::isfinite(m) || !std::isfinite(v) || std::abs(m) > kBlowupLimit ||
        std::abs(v) > kBlowupLimit) {
      throw DivergenceError("policy destabilizes the mean/variance flow");
    }
    ms[k + 1] = m;
    vs[k + 1] = v;
  }

  double cost = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    cost += w * dt * running_cost(c, ms[k], vs[k], policy.pi[k], policy.rho[k]);
  }
  return cost + terminal_cost(c, ms[n], vs[n]);
}

std::vector<double> social_cost_gradient(const PopulationModel& model,
                                         const AffinePolicy& policy,
                                         const TimeGrid& grid, double rel_step) {
  check_policy(policy, grid);
  const int nodes = grid.n_nodes();
  const int dim = 2 * nodes;
  std::vector<double> grad(dim);
  auto_for(dim, [&](int i) {
    AffinePolicy lo = policy, hi = policy;
    double& xlo = i < nodes ? lo.pi[i] : lo.rho[i - nodes];
    double& xhi = i < nodes ? hi.pi[i] : hi.rho[i - nodes];
    const double h = rel_step * std::max(1.0, std::abs(xlo));
    xlo -= h;
    xhi += h;
    grad[i] = (social_cost(model, hi, grid) - social_cost(model, lo, grid)) /
              (2.0 * h);
  });
  return grad;
}

std::pair<AffinePolicy, OptimizerMeta> optimize(const PopulationModel& model,
                                                const TimeGrid& grid,
                                                const OptimizerOptions& opts,
                                                const AffinePolicy* init) {
  single_coeffs(model);
  AffinePolicy policy;
  if (init != nullptr) {
    policy = *init;
  } else {
    policy = policy_from_feedback(feedback_law(solve_mfg(model, grid), 0));
  }
  check_policy(policy, grid);

  OptimizerMeta meta;
  double cost = social_cost(model, policy, grid);
  double step = 1.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    meta.iterations = it;
    const std::vector<double> grad =
        social_cost_gradient(model, policy, grid, opts.fd_step);
    double gnorm = 0.0, gsq = 0.0;
    for (double gi : grad) {
      gnorm = std::max(gnorm, std::abs(gi));
      gsq += gi * gi;
    }
    meta.grad_norm = gnorm;
    if (gnorm <= opts.tol) {
      meta.converged = true;
      break;
    }
    // Backtracking line search with an Armijo decrease condition.
    const int nodes = grid.n_nodes();
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    while (step > 1e-18) {
      AffinePolicy trial = policy;
      for (int k = 0; k < nodes; ++k) {
        trial.pi[k] -= step * grad[k];
        trial.rho[k] -= step * grad[nodes + k];
      }
      double trial_cost;
      try {
        trial_cost = social_cost(model, trial, grid);
      } catch (const DivergenceError&) {
        step *= 0.5;
        continue;
      }
      if (trial_cost <= cost - 1e-4 * step * gsq) {
        policy = std::move(trial);
        cost = trial_cost;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent direction left at this resolution
  }
  return {policy, meta};
}

SocialCostReport price_of_anarchy(const PopulationModel& model, const TimeGrid& grid,
                                  const SolverOptions& solver_opts,
                                  const OptimizerOptions& opt_opts) {
  single_coeffs(model);
  const EquilibriumSolution sol = solve_mfg(model, grid, solver_opts);
  const AffinePolicy mfg_policy = policy_from_feedback(feedback_law(sol, 0));

  SocialCostReport report;
  report.mfg_social_cost = social_cost(model, mfg_policy, grid);
  auto [opt_policy, meta] = optimize(model, grid, opt_opts, &mfg_policy);
  report.mfc_cost = social_cost(model, opt_policy, grid);
  report.optimizer = meta;
  if (report.mfg_social_cost < 1e-12 && report.mfc_cost < 1e-12) {
    report.price_of_anarchy = 1.0;  // degenerate zero-cost convention
  } else {
    report.price_of_anarchy = report.mfg_social_cost / report.mfc_cost;
  }
  return report;
}

}  // namespace mfglq
