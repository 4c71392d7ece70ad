#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cflow/expression.hpp"
#include "cflow/metric_catalog.hpp"
#include "oracles.hpp"

using namespace cflow;
using std::numbers::pi;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

TangentState state(double t, Vec q, Vec v) { return TangentState{t, std::move(q), std::move(v)}; }

}  // namespace

TEST_CASE("chart manifolds") {
  SUBCASE("torus canonicalizes into [0, period)") {
    auto T = ChartManifold::flat_torus({2.0, 3.0});
    Vec q = T.canonicalize(vec({-0.5, 7.0}));
    CHECK(q[0] == doctest::Approx(1.5));
    CHECK(q[1] == doctest::Approx(1.0));
    Vec d = T.difference(vec({0.1, 0.1}), vec({1.9, 2.9}));
    CHECK(d[0] == doctest::Approx(-0.2));
    CHECK(d[1] == doctest::Approx(-0.2));
  }
  SUBCASE("sphere chart excludes the poles") {
    auto S = ChartManifold::sphere();
    CHECK(S.dimension() == 2);
    CHECK_FALSE(S.contains(vec({0.0, 1.0})));
    CHECK_FALSE(S.contains(vec({pi, 1.0})));
    CHECK(S.contains(vec({1.0, 10.0})));
  }
  SUBCASE("invalid constructions") {
    CHECK_THROWS_AS(ChartManifold::euclidean(0), ConfigError);
    CHECK_THROWS_AS(ChartManifold::flat_torus({1.0, -1.0}), ConfigError);
  }
}

TEST_CASE("expressions") {
  auto vars = phase_variables(2);
  Expression e = Expression::parse("2*v1^2/(1+q1) + sin(t)*q2 - exp(0)", vars);
  std::vector<double> x{0.5, 1.0, 3.0, 2.0, 0.0};
  CHECK(e.evaluate(x) == doctest::Approx(2 * 4.0 / 2.0 + std::sin(0.5) * 3.0 - 1.0));

  SUBCASE("symbolic derivative matches the hand derivative") {
    Expression dv1 = e.derivative(3);
    CHECK(dv1.evaluate(x) == doctest::Approx(4 * 2.0 / 2.0));
    Expression dq1 = e.derivative(1);
    CHECK(dq1.evaluate(x) == doctest::Approx(-2 * 4.0 / 4.0));
    CHECK_FALSE(e.derivative(4).depends_on(0));
  }
  SUBCASE("precedence and unary minus") {
    auto p = position_variables(1);
    CHECK(Expression::parse("-2^2", p).evaluate(std::vector<double>{0, 0}) == doctest::Approx(-4));
    CHECK(Expression::parse("2^3^2", p).evaluate(std::vector<double>{0, 0}) == doctest::Approx(512));
    CHECK(Expression::parse("ln(e)+sqrt(4)", p).evaluate(std::vector<double>{0, 0}) ==
          doctest::Approx(3));
  }
  SUBCASE("errors carry a column") {
    auto p = position_variables(1);
    try {
      Expression::parse("q1 + * 2", p);
      FAIL("expected a parse error");
    } catch (const ConfigError& err) {
      CHECK(std::string(err.what()).find("column") != std::string::npos);
    }
    CHECK_THROWS_AS(Expression::parse("q2", p), ConfigError);
    CHECK_THROWS_AS(Expression::parse("foo(q1)", p), ConfigError);
  }
}

TEST_CASE("metric norm") {
  auto flat = catalog_metric("euclidean", ChartManifold::euclidean(2));
  CHECK(metric_norm(flat, state(0, vec({0, 0}), vec({3, 4}))) == doctest::Approx(5.0));
  auto conf = catalog_metric("conformal-exp", ChartManifold::euclidean(1));
  CHECK(metric_norm(conf, state(1, vec({0}), vec({1}))) == doctest::Approx(std::exp(1.0)));
  CHECK(metric_norm(conf, state(1, vec({0}), vec({0}))) == 0.0);
}

TEST_CASE("metric time derivative") {
  auto flat = catalog_metric("euclidean", ChartManifold::euclidean(2));
  CHECK(dt_metric_quadratic_form(flat, state(2, vec({1, 1}), vec({1, 2}))) == 0.0);
  auto conf = catalog_metric("conformal-exp", ChartManifold::euclidean(2));
  CHECK(dt_metric_quadratic_form(conf, state(0, vec({0, 0}), vec({1, 0}))) == doctest::Approx(2.0));
  auto poly = catalog_metric("conformal-poly", ChartManifold::euclidean(1));
  CHECK(dt_metric_quadratic_form(poly, state(1, vec({0}), vec({2}))) == doctest::Approx(8.0));
}

TEST_CASE("christoffel symbols") {
  SUBCASE("flat metric vanishes") {
    auto flat = catalog_metric("euclidean", ChartManifold::euclidean(3));
    CHECK(flat.christoffel(1.5, vec({1, -2, 3})).max_abs() == 0.0);
  }
  SUBCASE("conformal-exp has no spatial derivatives") {
    auto conf = catalog_metric("conformal-exp", ChartManifold::euclidean(2));
    for (double t : {-1.0, 0.0, 2.0}) CHECK(conf.christoffel(t, vec({0.3, 0.4})).max_abs() == 0.0);
  }
  SUBCASE("sphere at theta = pi/4") {
    auto sph = catalog_metric("sphere", ChartManifold::sphere());
    Christoffel g = sph.christoffel(0, vec({pi / 4, 0.3}));
    CHECK(g(0, 1, 1) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(g(1, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g(1, 1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("sphere symbols match closed forms to 1e-8, analytic and finite difference") {
    auto sph = catalog_metric("sphere", ChartManifold::sphere());
    auto fd = custom_metric(ChartManifold::sphere(), {{"1", "0"}, {"0", "sin(q1)^2"}}, false);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> th(0.2, pi - 0.2), ph(0, 2 * pi);
    double worst = 0.0, worst_fd = 0.0;
    for (int n = 0; n < 200; ++n) {
      double a = th(rng), b = ph(rng);
      Christoffel g = sph.christoffel(0, vec({a, b}));
      Christoffel h = fd.christoffel(0, vec({a, b}));
      for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            worst = std::max(worst, std::abs(g(k, i, j) - oracle::sphere_christoffel(k, i, j, a)));
            worst_fd = std::max(worst_fd, std::abs(h(k, i, j) - oracle::sphere_christoffel(k, i, j, a)));
          }
    }
    CHECK(worst <= 1e-12);
    CHECK(worst_fd <= 1e-8);
  }
}

TEST_CASE("property: christoffel symmetry in the lower indices") {
  auto analytic = custom_metric(ChartManifold::euclidean(2),
                                {{"1+q1^2", "q1*q2*exp(-t^2)"}, {"q1*q2*exp(-t^2)", "2+cos(q2)"}}, true);
  auto fd = custom_metric(ChartManifold::euclidean(2),
                          {{"1+q1^2", "q1*q2*exp(-t^2)"}, {"q1*q2*exp(-t^2)", "2+cos(q2)"}}, false);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int n = 0; n < 300; ++n) {
    double t = u(rng);
    Vec q = vec({u(rng), u(rng)});
    Christoffel a = analytic.christoffel(t, q);
    Christoffel f = fd.christoffel(t, q);
    for (int k = 0; k < 2; ++k) {
      CHECK(a(k, 0, 1) == a(k, 1, 0));
      CHECK(std::abs(f(k, 0, 1) - f(k, 1, 0)) <= 1e-8);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(a(k, i, j) - f(k, i, j)) <= 1e-6);
    }
  }
}

TEST_CASE("property: central time differences converge at second order") {
  auto conf = catalog_metric("conformal-exp", ChartManifold::euclidean(1));
  MatrixFn eval = [&](double t, const Vec& q) { return conf(t, q); };
  for (double t : {-1.0, 0.3, 1.2}) {
    Vec q = vec({0.5});
    double exact = 2 * std::exp(2 * t);
    double e1 = std::abs(central_difference_time(eval, t, q, 1e-2)(0, 0) - exact);
    double e2 = std::abs(central_difference_time(eval, t, q, 5e-3)(0, 0) - exact);
    double ratio = e1 / e2;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}

TEST_CASE("custom metrics reject bad input") {
  auto R1 = ChartManifold::euclidean(1);
  CHECK_THROWS_AS(custom_metric(ChartManifold::euclidean(2), {{"1", "q1"}, {"0", "1"}}, true),
                  ConfigError);
  CHECK_THROWS_AS(catalog_metric("nope", R1), ConfigError);
  CHECK_THROWS_AS(catalog_metric("sphere", R1), ConfigError);
  auto indefinite = custom_metric(R1, {{"q1"}}, true);
  CHECK_THROWS_AS(indefinite.checked(0, vec({-1})), EvaluationError);
}
