#include "mfglq/fbsolver.hpp"

#include <algorithm>
#include <cmath>

#include "mfglq/parallel.hpp"

namespace mfglq {

namespace {

using Eigen::VectorXd;

void check_finite(const VectorXd& v, double t) {
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || std::abs(v[i]) > kBlowupLimit) {
      throw DivergenceError("coupled solve exceeded blow-up limit near t = " +
                            std::to_string(t));
    }
  }
}

struct Stepper {
  const FbProblem& pb;
  double dt;

  // dz/dt at one RK4 stage; p and r are frozen stage data.
  VectorXd z_rhs(const VectorXd& z, const VectorXd& p, const VectorXd& r) const {
    VectorXd lz = pb.interaction * z;
    VectorXd out(pb.dim);
    for (int i = 0; i < pb.dim; ++i) {
      out[i] = (pb.a[i] - pb.gain[i] * p[i]) * z[i] + pb.abar[i] * lz[i] -
               pb.gain[i] * r[i];
    }
    return out;
  }

  // dr/dt at one RK4 stage; p and lz (the aggregate L z) are frozen stage data.
  VectorXd r_rhs(const VectorXd& r, const VectorXd& p, const VectorXd& lz) const {
    VectorXd out(pb.dim);
    for (int i = 0; i < pb.dim; ++i) {
      out[i] = -((pb.a[i] - pb.gain[i] * p[i]) * r[i] +
                 (p[i] * pb.abar[i] - pb.qbar_s[i]) * lz[i]);
    }
    return out;
  }

  // Advances z over [t_k, t_{k+1}]; frozen data at the half-node is the
  // average of the node values.
  VectorXd z_step(const VectorXd& z, const VectorXd& pk, const VectorXd& pk1,
                  const VectorXd& rk, const VectorXd& rk1) const {
    const VectorXd pm = 0.5 * (pk + pk1);
    const VectorXd rm = 0.5 * (rk + rk1);
    const VectorXd f1 = z_rhs(z, pk, rk);
    const VectorXd f2 = z_rhs(z + 0.5 * dt * f1, pm, rm);
    const VectorXd f3 = z_rhs(z + 0.5 * dt * f2, pm, rm);
    const VectorXd f4 = z_rhs(z + dt * f3, pk1, rk1);
    return z + dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
  }

  // Steps r from t_{k+1} down to t_k.
  VectorXd r_step(const VectorXd& r, const VectorXd& pk, const VectorXd& pk1,
                  const VectorXd& lzk, const VectorXd& lzk1) const {
    const VectorXd pm = 0.5 * (pk + pk1);
    const VectorXd lzm = 0.5 * (lzk + lzk1);
    const VectorXd f1 = r_rhs(r, pk1, lzk1);
    const VectorXd f2 = r_rhs(r - 0.5 * dt * f1, pm, lzm);
    const VectorXd f3 = r_rhs(r - 0.5 * dt * f2, pm, lzm);
    const VectorXd f4 = r_rhs(r - dt * f3, pk, lzk);
    return r - dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
  }

  VectorXd node(const GridFunction& f, int k) const {
    return Eigen::Map<const VectorXd>(f.values.data() + k * pb.dim, pb.dim);
  }

  VectorXd terminal_r(const VectorXd& zT) const {
    VectorXd lz = pb.interaction * zT;
    VectorXd out(pb.dim);
    for (int i = 0; i < pb.dim; ++i) out[i] = -pb.qbarT_sT[i] * lz[i];
    return out;
  }
};

void validate_problem(const FbProblem& pb) {
  const size_t d = static_cast<size_t>(pb.dim);
  if (pb.dim < 1) throw std::invalid_argument("FbProblem needs at least one component");
  if (pb.a.size() != d || pb.abar.size() != d || pb.gain.size() != d ||
      pb.qbar_s.size() != d || pb.qbarT_sT.size() != d || pb.z0.size() != d ||
      pb.interaction.rows() != pb.dim || pb.interaction.cols() != pb.dim ||
      pb.p.values.size() != d * pb.grid.n_nodes()) {
    throw std::invalid_argument("FbProblem arrays are dimension-inconsistent");
  }
}

}  // namespace

GridFunction solve_riccati_batch(const std::vector<LqCoefficients>& coeffs,
                                 const TimeGrid& grid) {
  const int dim = static_cast<int>(coeffs.size());
  GridFunction out(grid, dim);
  auto_for(dim, [&](int i) {
    const GridFunction pi = solve_riccati(coeffs[i], grid);
    for (int k = 0; k < grid.n_nodes(); ++k) {
      out.values[k * dim + i] = pi.values[k];
    }
  });
  return out;
}

FbProblem make_fb_problem(const std::vector<LqCoefficients>& coeffs,
                          const Eigen::MatrixXd& interaction, const TimeGrid& grid) {
  FbProblem pb;
  pb.grid = grid;
  pb.dim = static_cast<int>(coeffs.size());
  pb.p = solve_riccati_batch(coeffs, grid);
  for (const auto& c : coeffs) {
    pb.a.push_back(c.A);
    pb.abar.push_back(c.Abar);
    pb.gain.push_back(c.gain());
    pb.qbar_s.push_back(c.Qbar * c.S);
    pb.qbarT_sT.push_back(c.Qbar_T * c.S_T);
    pb.z0.push_back(c.x0_mean);
  }
  pb.interaction = interaction;
  validate_problem(pb);
  return pb;
}

GridFunction forward_mean(const FbProblem& pb, const GridFunction& r) {
  validate_problem(pb);
  const Stepper st{pb, pb.grid.dt()};
  GridFunction out(pb.grid, pb.dim);
  VectorXd z = Eigen::Map<const VectorXd>(pb.z0.data(), pb.dim);
  Eigen::Map<VectorXd>(out.values.data(), pb.dim) = z;
  for (int k = 0; k < pb.grid.n_steps; ++k) {
    z = st.z_step(z, st.node(pb.p, k), st.node(pb.p, k + 1), st.node(r, k),
                  st.node(r, k + 1));
    check_finite(z, pb.grid.node(k + 1));
    Eigen::Map<VectorXd>(out.values.data() + (k + 1) * pb.dim, pb.dim) = z;
  }
  return out;
}

GridFunction backward_offset(const FbProblem& pb, const GridFunction& z) {
  validate_problem(pb);
  const Stepper st{pb, pb.grid.dt()};
  const int n = pb.grid.n_steps;
  std::vector<VectorXd> lz(n + 1);
  for (int k = 0; k <= n; ++k) lz[k] = pb.interaction * st.node(z, k);
  GridFunction out(pb.grid, pb.dim);
  VectorXd r = st.terminal_r(st.node(z, n));
  Eigen::Map<VectorXd>(out.values.data() + n * pb.dim, pb.dim) = r;
  for (int k = n; k > 0; --k) {
    r = st.r_step(r, st.node(pb.p, k - 1), st.node(pb.p, k), lz[k - 1], lz[k]);
    check_finite(r, pb.grid.node(k - 1));
    Eigen::Map<VectorXd>(out.values.data() + (k - 1) * pb.dim, pb.dim) = r;
  }
  return out;
}

FbSolution picard_solve(const FbProblem& pb, double damping, double tol, int max_iter) {
  validate_problem(pb);
  if (!(damping > 0.0) || damping > 1.0) {
    throw std::invalid_argument("picard damping must lie in (0, 1]");
  }
  FbSolution sol;
  GridFunction r(pb.grid, pb.dim);
  GridFunction z = forward_mean(pb, r);
  for (int it = 1; it <= max_iter; ++it) {
    const GridFunction r_tilde = backward_offset(pb, z);
    GridFunction r_next = r;
    for (size_t i = 0; i < r.values.size(); ++i) {
      r_next.values[i] = (1.0 - damping) * r.values[i] + damping * r_tilde.values[i];
    }
    GridFunction z_next = forward_mean(pb, r_next);
    const double delta =
        std::max(max_abs_diff(z, z_next), max_abs_diff(r, r_next));
    z = std::move(z_next);
    r = std::move(r_next);
    sol.iterations = it;
    sol.residual = delta;
    if (delta <= tol) {
      sol.converged = true;
      break;
    }
  }
  // Pin the terminal condition: one undamped backward sweep against the final
  // mean changes r by at most O(delta).
  sol.r = backward_offset(pb, z);
  sol.z = std::move(z);
  return sol;
}

FbSolution newton_solve(const FbProblem& pb, double tol, int max_iter) {
  validate_problem(pb);
  const int n = pb.grid.n_steps;
  const int D = pb.dim;
  const int m = 2 * D * (n + 1);
  if (m > kNewtonMaxUnknowns) {
    throw std::invalid_argument(
        "newton system has " + std::to_string(m) + " unknowns (limit " +
        std::to_string(kNewtonMaxUnknowns) + "); use picard for large problems");
  }
  const Stepper st{pb, pb.grid.dt()};

  // Unknown layout: x = [z_0..z_n, r_0..r_n], each node a block of D values.
  const auto zoff = [D](int k) { return k * D; };
  const auto roff = [D, n](int k) { return (n + 1 + k) * D; };

  // Residual rows: RK4 step defects for z and r plus the two boundary rows.
  // Affine in x, so the Jacobian is constant and assembled by column probing.
  const auto defect = [&](const VectorXd& x) {
    VectorXd f(m);
    for (int k = 0; k <= n; ++k) {
      const VectorXd zk = x.segment(zoff(k), D);
      const VectorXd rk = x.segment(roff(k), D);
      if (k < n) {
        const VectorXd zk1 = x.segment(zoff(k + 1), D);
        const VectorXd rk1 = x.segment(roff(k + 1), D);
        f.segment(zoff(k + 1), D) =
            zk1 - st.z_step(zk, st.node(pb.p, k), st.node(pb.p, k + 1), rk, rk1);
        f.segment(roff(k), D) =
            rk - st.r_step(rk1, st.node(pb.p, k), st.node(pb.p, k + 1),
                           pb.interaction * zk, pb.interaction * zk1);
      }
    }
    f.segment(zoff(0), D) =
        x.segment(zoff(0), D) - Eigen::Map<const VectorXd>(pb.z0.data(), D);
    f.segment(roff(n), D) =
        x.segment(roff(n), D) - st.terminal_r(x.segment(zoff(n), D));
    return f;
  };

  const VectorXd f0 = defect(VectorXd::Zero(m));
  Eigen::MatrixXd jac(m, m);
  auto_for(m, [&](int j) {
    VectorXd e = VectorXd::Zero(m);
    e[j] = 1.0;
    jac.col(j) = defect(e) - f0;
  });
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);

  FbSolution sol;
  VectorXd x = VectorXd::Zero(m);
  VectorXd f = f0;
  for (int it = 1; it <= max_iter; ++it) {
    x -= lu.solve(f);
    if (!x.allFinite()) {
      throw SingularSystemError("newton linear solve produced non-finite values");
    }
    f = defect(x);
    sol.iterations = it;
    sol.residual = f.lpNorm<Eigen::Infinity>();
    if (sol.residual <= tol) {
      sol.converged = true;
      break;
    }
  }
  if (!sol.converged && sol.residual > 1e-6 * (1.0 + f0.lpNorm<Eigen::Infinity>())) {
    throw SingularSystemError("newton step failed to reduce the defect");
  }
  sol.z = GridFunction(pb.grid, D);
  sol.r = GridFunction(pb.grid, D);
  std::copy(x.data(), x.data() + D * (n + 1), sol.z.values.begin());
  std::copy(x.data() + D * (n + 1), x.data() + m, sol.r.values.begin());
  return sol;
}

FbSolution solve_fb(const FbProblem& pb, const SolverOptions& opts) {
  if (opts.method == "newton") return newton_solve(pb, opts.tol, opts.max_iter);
  if (opts.method == "picard") {
    return picard_solve(pb, opts.damping, opts.tol, opts.max_iter);
  }
  throw std::invalid_argument("unknown solver method: " + opts.method);
}

double residual(const FbProblem& pb, const FbSolution& cand) {
  validate_problem(pb);
  const Stepper st{pb, pb.grid.dt()};
  const int n = pb.grid.n_steps;
  const double dt = pb.grid.dt();
  double sup = 0.0;
  for (int k = 1; k < n; ++k) {
    const VectorXd zk = st.node(cand.z, k);
    const VectorXd rk = st.node(cand.r, k);
    const VectorXd pk = st.node(pb.p, k);
    const VectorXd dz = (st.node(cand.z, k + 1) - st.node(cand.z, k - 1)) / (2.0 * dt);
    const VectorXd dr = (st.node(cand.r, k + 1) - st.node(cand.r, k - 1)) / (2.0 * dt);
    const VectorXd fz = st.z_rhs(zk, pk, rk);
    const VectorXd fr = st.r_rhs(rk, pk, pb.interaction * zk);
    sup = std::max(sup, (dz - fz).lpNorm<Eigen::Infinity>());
    sup = std::max(sup, (dr - fr).lpNorm<Eigen::Infinity>());
  }
  const VectorXd bz =
      st.node(cand.z, 0) - Eigen::Map<const VectorXd>(pb.z0.data(), pb.dim);
  const VectorXd br = st.node(cand.r, n) - st.terminal_r(st.node(cand.z, n));
  return sup + bz.lpNorm<Eigen::Infinity>() + br.lpNorm<Eigen::Infinity>();
}

}  // namespace mfglq
