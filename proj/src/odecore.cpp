#include "mfglq/odecore.hpp"

#include <algorithm>
#include <cmath>

#include "mfglq/model.hpp"

namespace mfglq {

double GridFunction::interp(double t, int comp) const {
  const double dt = grid.dt();
  double s = t / dt;
  if (s <= 0.0) return at(0, comp);
  if (s >= grid.n_steps) return at(grid.n_steps, comp);
  const int k = static_cast<int>(s);
  const double w = s - k;
  return (1.0 - w) * at(k, comp) + w * at(k + 1, comp);
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  const size_t n = std::min(a.values.size(), b.values.size());
  for (size_t i = 0; i < n; ++i) {
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  }
  return m;
}

namespace {

void check_state(std::span<const double> y, double t) {
  for (double v : y) {
    if (!std::isfinite(v) || std::abs(v) > kBlowupLimit) {
      throw DivergenceError("ode state exceeded blow-up limit near t = " +
                            std::to_string(t));
    }
  }
}

}  // namespace

GridFunction rk4_forward(const TimeGrid& grid, std::span<const double> y0,
                         const OdeRhs& rhs) {
  const int dim = static_cast<int>(y0.size());
  GridFunction out(grid, dim);
  std::vector<double> y(y0.begin(), y0.end());
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  const double dt = grid.dt();
  std::copy(y.begin(), y.end(), out.values.begin());
  for (int k = 0; k < grid.n_steps; ++k) {
    const double t = grid.node(k);
    rhs(t, y, k1);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    rhs(t + 0.5 * dt, tmp, k2);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    rhs(t + 0.5 * dt, tmp, k3);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
    rhs(t + dt, tmp, k4);
    for (int i = 0; i < dim; ++i) {
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    check_state(y, t + dt);
    std::copy(y.begin(), y.end(), out.values.begin() + (k + 1) * dim);
  }
  return out;
}

GridFunction rk4_backward(const TimeGrid& grid, std::span<const double> yT,
                          const OdeRhs& rhs) {
  const int dim = static_cast<int>(yT.size());
  GridFunction out(grid, dim);
  std::vector<double> y(yT.begin(), yT.end());
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  const double dt = grid.dt();
  std::copy(y.begin(), y.end(), out.values.begin() + grid.n_steps * dim);
  for (int k = grid.n_steps; k > 0; --k) {
    const double t = grid.node(k);
    rhs(t, y, k1);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] - 0.5 * dt * k1[i];
    rhs(t - 0.5 * dt, tmp, k2);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] - 0.5 * dt * k2[i];
    rhs(t - 0.5 * dt, tmp, k3);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] - dt * k3[i];
    rhs(t - dt, tmp, k4);
    for (int i = 0; i < dim; ++i) {
      y[i] -= dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    check_state(y, t - dt);
    std::copy(y.begin(), y.end(), out.values.begin() + (k - 1) * dim);
  }
  return out;
}

GridFunction rk4_forward(const TimeGrid& grid, double y0, const ScalarRhs& rhs) {
  const double init[1] = {y0};
  return rk4_forward(grid, init,
                     [&rhs](double t, std::span<const double> y, std::span<double> dy) {
                       dy[0] = rhs(t, y[0]);
                     });
}

GridFunction rk4_backward(const TimeGrid& grid, double yT, const ScalarRhs& rhs) {
  const double fin[1] = {yT};
  return rk4_backward(grid, fin,
                      [&rhs](double t, std::span<const double> y, std::span<double> dy) {
                        dy[0] = rhs(t, y[0]);
                      });
}

GridFunction solve_riccati(const LqCoefficients& c, const TimeGrid& grid) {
  const double g = c.gain();
  return rk4_backward(grid, c.Q_T + c.Qbar_T, [&](double, double p) {
    // -dp/dt = 2*A*p - g*p^2 + Q + Qbar, so dp/dt is the negative.
    return -(2.0 * c.A * p - g * p * p + c.Q + c.Qbar);
  });
}

}  // namespace mfglq
