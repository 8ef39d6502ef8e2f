// Deterministic integration primitives: classical fourth-order Runge-Kutta
// over a shared TimeGrid, forward (initial condition) and backward
// (terminal condition), plus the decoupled scalar Riccati solve. Any
// non-finite intermediate value, or |value| beyond the blow-up limit,
// aborts with DivergenceError rather than being clamped.
#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mfglq/model.hpp"

namespace mfglq {

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kBlowupLimit = 1e12;

// Node-sampled function on a TimeGrid with `dim` components per node,
// stored node-major. All entries are finite by construction.
struct GridFunction {
  TimeGrid grid;
  int dim = 1;
  std::vector<double> values;  // size (n_steps+1) * dim

  GridFunction() = default;
  GridFunction(const TimeGrid& g, int d, double fill = 0.0)
      : grid(g), dim(d), values(static_cast<size_t>(g.n_nodes()) * d, fill) {}

  double& at(int node, int comp = 0) {
    return values[static_cast<size_t>(node) * dim + comp];
  }
  double at(int node, int comp = 0) const {
    return values[static_cast<size_t>(node) * dim + comp];
  }

  // Linear interpolation between nodes; t clamped to [0, horizon].
  double interp(double t, int comp = 0) const;

  double max_abs() const;
};

double max_abs_diff(const GridFunction& a, const GridFunction& b);

// Vector-valued right-hand side: writes d(state)/dt into `deriv`.
using OdeRhs =
    std::function<void(double t, std::span<const double> state, std::span<double> deriv)>;

// Scalar right-hand side convenience form.
using ScalarRhs = std::function<double(double t, double x)>;

GridFunction rk4_forward(const TimeGrid& grid, std::span<const double> initial,
                         const OdeRhs& rhs);
GridFunction rk4_forward(const TimeGrid& grid, double initial, const ScalarRhs& rhs);

GridFunction rk4_backward(const TimeGrid& grid, std::span<const double> terminal,
                          const OdeRhs& rhs);
GridFunction rk4_backward(const TimeGrid& grid, double terminal, const ScalarRhs& rhs);

// Backward solve of -dp/dt = 2 A p - (B p)^2 / C + Q + Qbar with terminal
// value p_T = Q_T + Qbar_T. The equation is decoupled from the mean flow
// and is solved first; a blow-up inside [0,T] surfaces as DivergenceError.
GridFunction solve_riccati(const LqCoefficients& coeffs, const TimeGrid& grid);

}  // namespace mfglq
