#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "mfglq/model.hpp"

using namespace mfglq;

namespace {

bool has_code(const std::vector<std::string>& issues, const std::string& code) {
  for (const auto& s : issues) {
    if (s.rfind(code, 0) == 0) return true;
  }
  return false;
}

LqCoefficients valid_coeffs() {
  LqCoefficients c;
  c.A = 0.5;
  c.Q = 1.0;
  c.Qbar = 0.5;
  c.sigma = 0.3;
  return c;
}

}  // namespace

TEST_CASE("time grid nodes are exact at the endpoints") {
  const TimeGrid g = make_grid(2.5, 10);
  CHECK(g.n_nodes() == 11);
  CHECK(g.dt() == 0.25);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(10) == 2.5);
  CHECK(g.node(4) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("grid construction rejects degenerate inputs") {
  CHECK_THROWS_AS(make_grid(0.0, 10), InvalidGridError);
  CHECK_THROWS_AS(make_grid(-1.0, 10), InvalidGridError);
  CHECK_THROWS_AS(make_grid(1.0, 1), InvalidGridError);
  CHECK_THROWS_AS(make_grid(1.0 / 0.0, 10), InvalidGridError);
}

TEST_CASE("coefficient defaults and derived quantities") {
  const LqCoefficients c;
  CHECK(c.B == 1.0);
  CHECK(c.C == 1.0);
  CHECK(c.x0_std == 1.0);
  CHECK(c.A == 0.0);
  CHECK(c.gain() == 1.0);

  LqCoefficients d;
  d.B = 2.0;
  d.C = 4.0;
  d.sigma = 3.0;
  CHECK(d.gain() == 1.0);
  CHECK(d.nu() == 4.5);
}

TEST_CASE("single_population wraps one coefficient set with unit weight") {
  const PopulationModel m = single_population(valid_coeffs());
  CHECK(m.population_count() == 1);
  CHECK(m.weights.rows() == 1);
  CHECK(m.weights(0, 0) == 1.0);
  CHECK(validate(m).empty());
}

TEST_CASE("validation flags every violation with its code") {
  PopulationModel m = single_population(valid_coeffs());

  SUBCASE("zero C") {
    m.coeffs[0].C = 0.0;
    CHECK(has_code(validate(m), "NonPositiveC"));
  }
  SUBCASE("negative cost weights") {
    m.coeffs[0].Qbar_T = -0.25;
    CHECK(has_code(validate(m), "NegativeCostWeight"));
  }
  SUBCASE("zero initial spread") {
    m.coeffs[0].x0_std = 0.0;
    CHECK(has_code(validate(m), "NonPositiveStd"));
  }
  SUBCASE("weight shape mismatch") {
    m.coeffs.push_back(valid_coeffs());  // K = 2 but weights stay 1x1
    CHECK(has_code(validate(m), "DimensionMismatch"));
  }
  SUBCASE("negative interaction weight") {
    m.weights(0, 0) = -1.0;
    CHECK(has_code(validate(m), "NegativeCostWeight"));
  }
  SUBCASE("multiple issues are all reported") {
    m.coeffs[0].C = -1.0;
    m.coeffs[0].Q = -1.0;
    CHECK(validate(m).size() == 2);
    CHECK_THROWS_AS(ensure_valid(m), std::invalid_argument);
  }
}

TEST_CASE("validation accepts a model it already accepted") {
  const PopulationModel m = single_population(valid_coeffs());
  CHECK(validate(m).empty());
  CHECK(validate(m).empty());
  CHECK_NOTHROW(ensure_valid(m));
}

TEST_CASE("graphon model maps index points to coefficient blocks") {
  GraphonModel gm;
  LqCoefficients a = valid_coeffs();
  LqCoefficients b = valid_coeffs();
  a.A = 1.0;
  b.A = 2.0;
  gm.coeffs = {a, b};
  gm.graphon = GraphonSpec::constant(1.0);
  gm.m_points = 4;

  CHECK(gm.coeff_at(0.0).A == 1.0);
  CHECK(gm.coeff_at(0.49).A == 1.0);
  CHECK(gm.coeff_at(0.5).A == 2.0);
  CHECK(gm.coeff_at(1.0).A == 2.0);
  CHECK(validate(gm).empty());
}

TEST_CASE("graphon model validation") {
  GraphonModel gm;
  gm.coeffs = {valid_coeffs()};
  gm.graphon = GraphonSpec::constant(1.0);

  SUBCASE("m_points must be positive") {
    gm.m_points = 0;
    CHECK(has_code(validate(gm), "DimensionMismatch"));
  }
  SUBCASE("empty coefficient map") {
    gm.coeffs.clear();
    CHECK(has_code(validate(gm), "DimensionMismatch"));
  }
  SUBCASE("coefficient issues carry the block index") {
    gm.coeffs.push_back(valid_coeffs());
    gm.coeffs[1].C = 0.0;
    const auto issues = validate(gm);
    REQUIRE(issues.size() == 1);
    CHECK(issues[0].find("block[1]") != std::string::npos);
  }
}
