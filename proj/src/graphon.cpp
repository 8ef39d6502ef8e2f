#include "mfglq/graphon.hpp"

#include <cmath>
#include <stdexcept>

namespace mfglq {

GraphonSpec GraphonSpec::constant(double c) {
  GraphonSpec s;
  s.kind = Kind::Constant;
  s.c = c;
  return s;
}

GraphonSpec GraphonSpec::step(const Eigen::MatrixXd& weights, double scale) {
  if (weights.rows() != weights.cols() || weights.rows() < 1) {
    throw std::invalid_argument("step graphon needs a square block matrix");
  }
  GraphonSpec s;
  s.kind = Kind::Step;
  s.weights = weights;
  s.scale = scale;
  return s;
}

GraphonSpec GraphonSpec::min_kernel() {
  GraphonSpec s;
  s.kind = Kind::Min;
  return s;
}

GraphonSpec GraphonSpec::exp_decay(double beta) {
  GraphonSpec s;
  s.kind = Kind::ExpDecay;
  s.beta = beta;
  return s;
}

double GraphonSpec::eval(double u, double v) const {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::out_of_range("graphon arguments must lie in [0,1]");
  }
  switch (kind) {
    case Kind::Constant:
      return c;
    case Kind::Step: {
      const int blocks = static_cast<int>(weights.rows());
      auto block = [blocks](double x) {
        int b = static_cast<int>(x * blocks);
        if (b >= blocks) b = blocks - 1;
        if (b < 0) b = 0;
        return b;
      };
      return scale * weights(block(u), block(v));
    }
    case Kind::Min:
      return std::min(u, v);
    case Kind::ExpDecay:
      return std::exp(-beta * std::abs(u - v));
  }
  return 0.0;
}

GraphonSpec step_from_weights(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols() || w.rows() < 1) {
    throw std::invalid_argument("weight matrix must be square");
  }
  for (int i = 0; i < w.rows(); ++i) {
    for (int j = 0; j < w.cols(); ++j) {
      if (w(i, j) < 0.0) {
        throw std::invalid_argument("weight matrix entries must be >= 0");
      }
      if (w(i, j) != w(j, i)) {
        throw std::invalid_argument("weight matrix must be symmetric");
      }
    }
  }
  // Blocks have width 1/K, so the kernel needs a factor K for the integral
  // over block l to reproduce the discrete weight w(k,l).
  return GraphonSpec::step(w, static_cast<double>(w.rows()));
}

DiscretizedGraphon discretize(const GraphonSpec& spec, int m_points) {
  if (m_points < 1) {
    throw std::invalid_argument("discretize needs at least one point");
  }
  DiscretizedGraphon g;
  g.m_points = m_points;
  g.matrix = Eigen::MatrixXd(m_points, m_points);
  for (int i = 0; i < m_points; ++i) {
    const double u = (i + 0.5) / m_points;
    for (int j = 0; j < m_points; ++j) {
      const double v = (j + 0.5) / m_points;
      g.matrix(i, j) = spec.eval(u, v);
    }
  }
  return g;
}

Eigen::VectorXd apply(const DiscretizedGraphon& g, const Eigen::VectorXd& z) {
  if (z.size() != g.m_points) {
    throw std::invalid_argument("vector length does not match discretization");
  }
  return (g.matrix * z) / static_cast<double>(g.m_points);
}

}  // namespace mfglq
