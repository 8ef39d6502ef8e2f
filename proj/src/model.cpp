#include "mfglq/model.hpp"

#include <cmath>
#include <sstream>

namespace mfglq {

TimeGrid make_grid(double horizon, int n_steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw InvalidGridError("InvalidGrid: horizon must be positive and finite");
  }
  if (n_steps < 2) {
    throw InvalidGridError("InvalidGrid: n_steps must be at least 2");
  }
  return TimeGrid{horizon, n_steps};
}

PopulationModel single_population(const LqCoefficients& c) {
  PopulationModel m;
  m.coeffs = {c};
  m.weights = Eigen::MatrixXd::Ones(1, 1);
  return m;
}

const LqCoefficients& GraphonModel::coeff_at(double u) const {
  const int blocks = static_cast<int>(coeffs.size());
  int b = static_cast<int>(u * blocks);
  if (b >= blocks) b = blocks - 1;
  if (b < 0) b = 0;
  return coeffs[b];
}

namespace {

void check_coeffs(const LqCoefficients& c, const std::string& where,
                  std::vector<std::string>& out) {
  auto add = [&](const char* code, const char* field, double value) {
    std::ostringstream os;
    os << code << ": " << where << "." << field << " = " << value;
    out.push_back(os.str());
  };
  if (!(c.C > 0.0)) add("NonPositiveC", "C", c.C);
  if (c.Q < 0.0) add("NegativeCostWeight", "Q", c.Q);
  if (c.Qbar < 0.0) add("NegativeCostWeight", "Qbar", c.Qbar);
  if (c.Q_T < 0.0) add("NegativeCostWeight", "Q_T", c.Q_T);
  if (c.Qbar_T < 0.0) add("NegativeCostWeight", "Qbar_T", c.Qbar_T);
  if (!(c.x0_std > 0.0)) add("NonPositiveStd", "x0_std", c.x0_std);
  if (c.sigma < 0.0) add("NegativeCostWeight", "sigma", c.sigma);
}

}  // namespace

std::vector<std::string> validate(const PopulationModel& model) {
  std::vector<std::string> out;
  const int k = model.population_count();
  if (k < 1) {
    out.push_back("DimensionMismatch: model has no populations");
    return out;
  }
  for (int i = 0; i < k; ++i) {
    check_coeffs(model.coeffs[i], "population[" + std::to_string(i) + "]", out);
  }
  if (model.weights.rows() != k || model.weights.cols() != k) {
    std::ostringstream os;
    os << "DimensionMismatch: weights is " << model.weights.rows() << "x"
       << model.weights.cols() << ", expected " << k << "x" << k;
    out.push_back(os.str());
  } else if ((model.weights.array() < 0.0).any()) {
    out.push_back("NegativeCostWeight: weights entries must be >= 0");
  }
  return out;
}

std::vector<std::string> validate(const GraphonModel& model) {
  std::vector<std::string> out;
  if (model.m_points < 1) {
    out.push_back("DimensionMismatch: m_points must be >= 1");
  }
  if (model.coeffs.empty()) {
    out.push_back("DimensionMismatch: coefficient map has no entries");
  }
  for (size_t i = 0; i < model.coeffs.size(); ++i) {
    check_coeffs(model.coeffs[i], "block[" + std::to_string(i) + "]", out);
  }
  return out;
}

namespace {

void throw_if_invalid(const std::vector<std::string>& issues) {
  if (issues.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& s : issues) msg += "\n  " + s;
  throw std::invalid_argument(msg);
}

}  // namespace

void ensure_valid(const PopulationModel& model) { throw_if_invalid(validate(model)); }
void ensure_valid(const GraphonModel& model) { throw_if_invalid(validate(model)); }

}  // namespace mfglq
