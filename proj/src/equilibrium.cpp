#include "mfglq/equilibrium.hpp"

#include <cmath>
#include <stdexcept>

#include "mfglq/graphon.hpp"
#include "mfglq/parallel.hpp"

namespace mfglq {

namespace {

double lerp_nodes(const std::vector<double>& v, const TimeGrid& grid, double t) {
  const double s = t / grid.dt();
  if (s <= 0.0) return v.front();
  if (s >= grid.n_steps) return v.back();
  const int k = static_cast<int>(s);
  const double w = s - k;
  return (1.0 - w) * v[k] + w * v[k + 1];
}

// Backward RK4 for s of one component given frozen node data, with half-node
// inputs taken as node averages:
//   -ds/dt = nu*p - gain*r^2/2 + r*abar*lz + qbar*(S*lz)^2/2
std::vector<double> sweep_s(const LqCoefficients& c, const TimeGrid& grid,
                            const std::vector<double>& p, const std::vector<double>& r,
                            const std::vector<double>& lz) {
  const int n = grid.n_steps;
  const double dt = grid.dt();
  const double g = c.gain();
  auto rhs = [&](double pv, double rv, double lzv) {
    const double slz = c.S * lzv;
    return -(c.nu() * pv - 0.5 * g * rv * rv + rv * c.Abar * lzv +
             0.5 * c.Qbar * slz * slz);
  };
  std::vector<double> s(n + 1);
  const double slzT = c.S_T * lz[n];
  s[n] = 0.5 * c.Qbar_T * slzT * slzT;
  for (int k = n; k > 0; --k) {
    const double pm = 0.5 * (p[k - 1] + p[k]);
    const double rm = 0.5 * (r[k - 1] + r[k]);
    const double lzm = 0.5 * (lz[k - 1] + lz[k]);
    const double f1 = rhs(p[k], r[k], lz[k]);
    const double f2 = rhs(pm, rm, lzm);
    const double f3 = f2;
    const double f4 = rhs(p[k - 1], r[k - 1], lz[k - 1]);
    s[k - 1] = s[k] - dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
  }
  return s;
}

// Forward RK4 for the state variance of one component:
//   dv/dt = 2 (A - gain*p) v + sigma^2, v(0) = x0_std^2.
std::vector<double> sweep_variance(const LqCoefficients& c, const TimeGrid& grid,
                                   const std::vector<double>& p) {
  const int n = grid.n_steps;
  const double dt = grid.dt();
  const double g = c.gain();
  const double s2 = c.sigma * c.sigma;
  auto rhs = [&](double pv, double v) { return 2.0 * (c.A - g * pv) * v + s2; };
  std::vector<double> v(n + 1);
  v[0] = c.x0_std * c.x0_std;
  for (int k = 0; k < n; ++k) {
    const double pm = 0.5 * (p[k] + p[k + 1]);
    const double f1 = rhs(p[k], v[k]);
    const double f2 = rhs(pm, v[k] + 0.5 * dt * f1);
    const double f3 = rhs(pm, v[k] + 0.5 * dt * f2);
    const double f4 = rhs(p[k + 1], v[k] + dt * f3);
    v[k + 1] = v[k] + dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
  }
  return v;
}

EquilibriumSolution solve_core(GameClass game, std::vector<LqCoefficients> coeffs,
                               Eigen::MatrixXd interaction, const TimeGrid& grid,
                               const SolverOptions& opts) {
  EquilibriumSolution sol;
  sol.game = game;
  sol.grid = grid;
  sol.dim = static_cast<int>(coeffs.size());
  sol.coeffs = std::move(coeffs);
  sol.interaction = std::move(interaction);

  const FbProblem pb = make_fb_problem(sol.coeffs, sol.interaction, grid);
  const FbSolution fb = solve_fb(pb, opts);
  sol.p = pb.p;
  sol.z = fb.z;
  sol.r = fb.r;
  sol.fb = FbMeta{fb.iterations, fb.residual, fb.converged};

  const int D = sol.dim;
  const int nodes = grid.n_nodes();
  sol.s = GridFunction(grid, D);
  sol.variance = GridFunction(grid, D);
  sol.value.assign(D, 0.0);

  // Aggregate L z at every node, component-major scratch.
  std::vector<double> lz_all(nodes * D);
  for (int k = 0; k < nodes; ++k) {
    Eigen::Map<const Eigen::VectorXd> zk(sol.z.values.data() + k * D, D);
    Eigen::Map<Eigen::VectorXd>(lz_all.data() + k * D, D) = sol.interaction * zk;
  }

  auto_for(D, [&](int i) {
    std::vector<double> p(nodes), r(nodes), lz(nodes);
    for (int k = 0; k < nodes; ++k) {
      p[k] = sol.p.at(k, i);
      r[k] = sol.r.at(k, i);
      lz[k] = lz_all[k * D + i];
    }
    const LqCoefficients& c = sol.coeffs[i];
    const std::vector<double> s = sweep_s(c, grid, p, r, lz);
    const std::vector<double> v = sweep_variance(c, grid, p);
    for (int k = 0; k < nodes; ++k) {
      sol.s.values[k * D + i] = s[k];
      sol.variance.values[k * D + i] = v[k];
    }
    sol.value[i] = 0.5 * p[0] * (c.x0_std * c.x0_std + c.x0_mean * c.x0_mean) +
                   r[0] * c.x0_mean + s[0];
  });
  return sol;
}

}  // namespace

double FeedbackLaw::action(double t, double x) const {
  return -B * (lerp_nodes(p, grid, t) * x + lerp_nodes(r, grid, t)) / C;
}

EquilibriumSolution solve_mfg(const PopulationModel& model, const TimeGrid& grid,
                              const SolverOptions& opts) {
  ensure_valid(model);
  if (model.population_count() != 1) {
    throw std::invalid_argument("solve_mfg expects a single population");
  }
  return solve_core(GameClass::Mfg, model.coeffs, model.weights, grid, opts);
}

EquilibriumSolution solve_mpmfg(const PopulationModel& model, const TimeGrid& grid,
                                const SolverOptions& opts) {
  ensure_valid(model);
  return solve_core(GameClass::Mpmfg, model.coeffs, model.weights, grid, opts);
}

EquilibriumSolution solve_gmfg(const GraphonModel& model, const TimeGrid& grid,
                               const SolverOptions& opts) {
  ensure_valid(model);
  const int M = model.m_points;
  std::vector<LqCoefficients> coeffs(M);
  for (int i = 0; i < M; ++i) coeffs[i] = model.coeff_at((i + 0.5) / M);
  const DiscretizedGraphon disc = discretize(model.graphon, M);
  // apply() divides the kernel matvec by M; fold that into the operator.
  Eigen::MatrixXd L = disc.matrix / static_cast<double>(M);
  return solve_core(GameClass::Gmfg, std::move(coeffs), std::move(L), grid, opts);
}

double feedback(const EquilibriumSolution& sol, int component, double t, double x) {
  if (component < 0 || component >= sol.dim) {
    throw std::out_of_range("feedback component index out of range");
  }
  if (t < 0.0 || t > sol.grid.horizon) {
    throw OutOfHorizonError("feedback time outside [0, T]");
  }
  return feedback_law(sol, component).action(t, x);
}

FeedbackLaw feedback_law(const EquilibriumSolution& sol, int component) {
  FeedbackLaw law;
  law.grid = sol.grid;
  law.B = sol.coeffs[component].B;
  law.C = sol.coeffs[component].C;
  const int nodes = sol.grid.n_nodes();
  law.p.resize(nodes);
  law.r.resize(nodes);
  for (int k = 0; k < nodes; ++k) {
    law.p[k] = sol.p.at(k, component);
    law.r[k] = sol.r.at(k, component);
  }
  return law;
}

std::vector<FeedbackLaw> feedback_laws(const EquilibriumSolution& sol) {
  std::vector<FeedbackLaw> laws;
  laws.reserve(sol.dim);
  for (int i = 0; i < sol.dim; ++i) laws.push_back(feedback_law(sol, i));
  return laws;
}

FbProblem equilibrium_problem(const EquilibriumSolution& sol) {
  return make_fb_problem(sol.coeffs, sol.interaction, sol.grid);
}

GridFunction controlled_mean_flow(const EquilibriumSolution& sol) {
  return forward_mean(equilibrium_problem(sol), sol.r);
}

}  // namespace mfglq
