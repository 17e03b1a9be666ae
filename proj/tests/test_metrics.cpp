#include <doctest.h>

#include <cmath>

#include "markovsa/metrics.hpp"
#include "markovsa/rng.hpp"

using namespace markovsa;

namespace {

Point vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) {
    v[i++] = x;
  }
  return Point(v);
}

FeasibleSet big_box() {
  return FeasibleSet::box(Eigen::VectorXd::Constant(2, -10.0),
                          Eigen::VectorXd::Constant(2, 10.0));
}

}  // namespace

TEST_CASE("gradient mapping") {
  SUBCASE("inactive projection reduces to the gradient") {
    const Point gm = gradient_mapping(big_box(), vec({0.0, 0.0}),
                                      vec({2.0, 0.0}), 2.0);
    CHECK(gm.values[0] == doctest::Approx(2.0));
    CHECK(gm.values[1] == doctest::Approx(0.0));
  }
  SUBCASE("stationary vertex maps to zero") {
    const auto set = FeasibleSet::l1_ball(1.0, 2);
    const Point gm =
        gradient_mapping(set, vec({1.0, 0.0}), vec({-1.0, 0.0}), 1.0);
    CHECK(gm.values.norm() < 1e-12);
  }
  SUBCASE("zero gradient maps to zero") {
    const auto set = FeasibleSet::l1_ball(1.0, 2);
    const Point gm =
        gradient_mapping(set, vec({0.3, 0.2}), Point::zeros(2), 1.0);
    CHECK(gm.values.norm() < 1e-15);
  }
}

TEST_CASE("fw gap") {
  const auto set = FeasibleSet::l1_ball(1.0, 2);
  CHECK(fw_gap(set, vec({1.0, 0.0}), vec({-1.0, 0.0})) ==
        doctest::Approx(0.0));
  CHECK(fw_gap(set, vec({0.0, 0.0}), vec({2.0, 0.0})) == doctest::Approx(2.0));
  CHECK(fw_gap(set, vec({0.3, -0.2}), Point::zeros(2)) == 0.0);
}

TEST_CASE("suboptimality V") {
  const auto set = FeasibleSet::l1_ball(1.0, 2);
  CHECK(suboptimality_v(set, vec({1.0, 0.0}), vec({-1.0, 0.0}),
                        vec({-1.0, 0.0}), 1.0) == doctest::Approx(0.0));
  CHECK(suboptimality_v(big_box(), vec({0.3, 0.4}), Point::zeros(2),
                        Point::zeros(2), 1.0) == doctest::Approx(0.0));
  CHECK(suboptimality_v(big_box(), vec({0.0, 0.0}), vec({1.0, 0.0}),
                        Point::zeros(2), 1.0) == doctest::Approx(2.0));
}

TEST_CASE("merit function") {
  CHECK(merit_w(1.0, 1.0, 0.0, vec({0.5, 0.5}), vec({0.5, 0.5}), 0.0) == 0.0);
  CHECK(merit_w(1.0, 0.0, -0.5, vec({0.0, 0.0}), vec({0.0, 0.0}), 0.0) ==
        doctest::Approx(1.5));
  CHECK_THROWS_AS(
      merit_w(1.0, 0.0, 0.0, vec({0.0}), vec({0.0}), -1.0),
      std::invalid_argument);
}

TEST_CASE("inequality checks on randomized instances") {
  Rng rng(31);
  const auto set = FeasibleSet::l1_ball(1.0, 6);
  for (int i = 0; i < 200; ++i) {
    Point raw = Point::zeros(6), z = Point::zeros(6), g = Point::zeros(6);
    for (Eigen::Index j = 0; j < 6; ++j) {
      raw.values[j] = rng.normal();
      z.values[j] = 2.0 * rng.normal();
      g.values[j] = 2.0 * rng.normal();
    }
    const Point theta = project(set, raw);
    CHECK(check_prop_11(set, theta, g, 1.0));
    for (double beta : {0.5, 1.0, 2.0}) {
      CHECK(check_prop_12(set, theta, z, g, beta));
    }
  }
  SUBCASE("interior identity for prop 1.2") {
    // interior point, z = grad: lhs = |g|^2, rhs = 2 |g|^2
    const Point theta = vec({0.1, 0.2});
    const Point g = vec({0.5, -0.25});
    CHECK(check_prop_12(big_box(), theta, g, g, 1.0));
  }
  SUBCASE("stationary point gives equality 0 <= 0") {
    const auto l1 = FeasibleSet::l1_ball(1.0, 2);
    const Point theta = vec({1.0, 0.0});
    const Point g = vec({-1.0, 0.0});
    CHECK(check_prop_11(l1, theta, g, 1.0));
    CHECK(check_prop_12(l1, theta, g, g, 1.0));
  }
}

TEST_CASE("finite differences agree on a quadratic") {
  const Point theta = vec({0.3, -1.2, 2.0});
  const auto loss = [](const Point& p) {
    return 0.5 * p.values.squaredNorm() + p.values[0] * p.values[1];
  };
  const auto grad = [](const Point& p) {
    Point g(Eigen::VectorXd(p.values));
    g.values[0] += p.values[1];
    g.values[1] += p.values[0];
    return g;
  };
  CHECK(finite_diff_check(loss, grad, theta, 1e-5) < 1e-9);
}
