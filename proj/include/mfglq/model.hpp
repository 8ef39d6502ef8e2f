// Model-definition types shared by every solver: the uniform time grid,
// the scalar linear-quadratic coefficient set, and the three game
// descriptions (single population, K weighted populations, graphon).
// All types are immutable after validation and safe to share across
// parallel workers.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mfglq/graphon.hpp"

namespace mfglq {

struct InvalidGridError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Uniform partition of [0, horizon] into n_steps intervals. Node k is
// computed as k*horizon/n_steps (never by repeated addition) so the
// endpoints are exact.
struct TimeGrid {
  double horizon = 1.0;
  int n_steps = 2;

  double dt() const { return horizon / n_steps; }
  int n_nodes() const { return n_steps + 1; }
  double node(int k) const { return k * horizon / n_steps; }
};

// Throws InvalidGridError unless horizon > 0 and n_steps >= 2.
TimeGrid make_grid(double horizon, int n_steps);

// Scalar model constants for one population / index point. Cost weights
// Q, Qbar, Q_T, Qbar_T are non-negative; C must be strictly positive
// because the feedback law divides by it.
struct LqCoefficients {
  double A = 0.0;
  double Abar = 0.0;
  double B = 1.0;
  double C = 1.0;
  double Q = 0.0;
  double Qbar = 0.0;
  double S = 0.0;
  double Q_T = 0.0;
  double Qbar_T = 0.0;
  double S_T = 0.0;
  double sigma = 0.0;    // diffusion coefficient, >= 0
  double x0_mean = 0.0;  // initial law N(x0_mean, x0_std^2)
  double x0_std = 1.0;   // > 0

  double nu() const { return 0.5 * sigma * sigma; }
  double gain() const { return B * B / C; }  // feedback gain B^2/C
};

// K homogeneous populations with interaction weights w(k,l) >= 0.
// K = 1 with weights [[1]] is the standard single-population game.
struct PopulationModel {
  std::vector<LqCoefficients> coeffs;  // one per population
  Eigen::MatrixXd weights;             // K x K, entries >= 0

  int population_count() const { return static_cast<int>(coeffs.size()); }
};

PopulationModel single_population(const LqCoefficients& c);

// Continuum of players indexed by u in [0,1]. Coefficients vary with u
// as a piecewise-constant map over coeffs.size() equal blocks (size 1 =
// index-constant; size m_points = per-discretization-point table).
struct GraphonModel {
  std::vector<LqCoefficients> coeffs;
  GraphonSpec graphon;
  int m_points = 1;

  const LqCoefficients& coeff_at(double u) const;
};

std::vector<std::string> validate(const PopulationModel& model);
std::vector<std::string> validate(const GraphonModel& model);

// Throws std::invalid_argument listing every violation.
void ensure_valid(const PopulationModel& model);
void ensure_valid(const GraphonModel& model);

using GameModel = std::variant<PopulationModel, GraphonModel>;

}  // namespace mfglq
