// Graphon interaction kernels on [0,1]^2: constant kernels, step kernels
// built from population weight matrices, and two parametric families.
// Discretization samples the kernel at the M cell midpoints u_i = (i-1/2)/M;
// the induced operator is the midpoint quadrature of the kernel integral,
// which is exact on block-constant data whenever M is a multiple of the
// block count.
#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace mfglq {

// Symmetric nonnegative kernel W(u,v). The step kind returns
// scale * weights(block(u), block(v)) with block(x) = min(floor(K x), K-1);
// min is W(u,v) = min(u,v); exp_decay is W(u,v) = exp(-beta |u - v|).
struct GraphonSpec {
  enum class Kind { Constant, Step, Min, ExpDecay };

  Kind kind = Kind::Constant;
  double c = 1.0;           // Constant
  Eigen::MatrixXd weights;  // Step, K x K
  double scale = 1.0;       // Step
  double beta = 0.0;        // ExpDecay

  static GraphonSpec constant(double c);
  static GraphonSpec step(const Eigen::MatrixXd& weights, double scale);
  static GraphonSpec min_kernel();
  static GraphonSpec exp_decay(double beta);

  // Kernel value; throws std::out_of_range unless u, v are in [0,1].
  double eval(double u, double v) const;
};

// Step graphon W(u,v) = K * w(k,l) on the K x K grid of blocks, so the
// kernel aggregate of a block-constant mean flow reproduces the
// multi-population weighted sum sum_l w(k,l) z^l. Throws on asymmetric
// or negative weights.
GraphonSpec step_from_weights(const Eigen::MatrixXd& weights);

// Midpoint samples matrix(i,j) = W(u_i, u_j), u_i = (i - 1/2) / M.
struct DiscretizedGraphon {
  int m_points = 1;
  Eigen::MatrixXd matrix;
};

DiscretizedGraphon discretize(const GraphonSpec& spec, int m_points);

// Midpoint quadrature of the aggregate: out_i = (1/M) sum_j matrix(i,j) z_j.
Eigen::VectorXd apply(const DiscretizedGraphon& g, const Eigen::VectorXd& z);

}  // namespace mfglq
