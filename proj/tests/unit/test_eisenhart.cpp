#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cflow/eisenhart.hpp"
#include "cflow/metric_catalog.hpp"

using namespace cflow;
using std::numbers::pi;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

MetricField flat(int d) { return catalog_metric("euclidean", ChartManifold::euclidean(d)); }

SamplerSpec small_sampler(const MetricField& m, std::uint64_t seed) {
  SamplerSpec s = default_sampler(m.manifold(), 3.0);
  s.samples = 300;
  s.seed = seed;
  return s;
}

struct LiftCase {
  LiftRun run;
  Trajectory el;
  ProjectionReport proj;
};

LiftCase lift_and_compare(const LagrangianSystem& sys, Vec q0, Vec v0, double horizon, double u_t,
                          double g_uu, double tol = 1e-6) {
  LiftedMetric lm = lift_metric(sys, Vec::Zero(sys.dimension()));
  LiftState init = lift_initial_state(lm, 0.0, q0, v0, u_t, 0.0, g_uu);
  LiftCase c;
  c.run = lift_geodesic(lm, init, horizon / u_t);
  c.el = integrate_second_order(sys.metric(), el_force_field(sys), 0.0, q0, v0, horizon, Direction::Forward);
  c.proj = project_and_compare(c.run, c.el, tol);
  return c;
}

}  // namespace

TEST_CASE("lifted metric assembly") {
  SUBCASE("free particle in one dimension") {
    auto sys = lagrangian_from_expressions(flat(1), {}, "0", true);
    LiftedMetric lm = lift_metric(sys, vec({0}));
    Mat g = lm(vec({0.3, 1.0, 2.0}));
    Mat expected(3, 3);
    expected << 0, 0, -1, 0, 1, 0, -1, 0, 0;
    CHECK((g - expected).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    CHECK(es.eigenvalues()[0] == doctest::Approx(-1.0));
    CHECK(es.eigenvalues()[1] == doctest::Approx(1.0));
    CHECK(es.eigenvalues()[2] == doctest::Approx(1.0));
    CHECK(lm.lorentzian(vec({0.3, 1.0, 2.0})));
  }
  SUBCASE("magnetic one-form fills the t-q block") {
    auto sys = lagrangian_from_expressions(flat(2), {"-q2/2", "q1/2"}, "0", true);
    LiftedMetric lm = lift_metric(sys, vec({0, 0}));
    Mat g = lm(vec({0, 0.8, -0.6, 0}));
    CHECK(g(0, 1) == doctest::Approx(0.3));
    CHECK(g(0, 2) == doctest::Approx(0.4));
    CHECK(g(1, 0) == g(0, 1));
  }
  SUBCASE("potential sits in g_tt") {
    auto sys = lagrangian_from_expressions(flat(2), {}, "0.5*(q1^2+q2^2)", true);
    Mat g = lift_metric(sys, vec({0, 0}))(vec({0, 1, 2, 0}));
    CHECK(g(0, 0) == doctest::Approx(-5.0));
  }
  SUBCASE("no component depends on y") {
    auto sys = lagrangian_from_expressions(catalog_metric("conformal-poly", ChartManifold::euclidean(2)),
                                           {"sin(q2)*t", "q1"}, "q1^2*cos(t)", true);
    LiftedMetric lm = lift_metric(sys, vec({0, 0}));
    for (double y : {-3.0, 0.0, 5.0}) {
      Vec x = vec({0.4, 0.2, -1.0, y});
      Vec xp = x, xm = x;
      xp[3] += 1e-3;
      xm[3] -= 1e-3;
      CHECK((lm(xp) - lm(xm)).cwiseAbs().maxCoeff() == 0.0);
      CHECK(lm.derivatives(x)[3].cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("lift initial data") {
  auto sys = lagrangian_from_expressions(flat(1), {}, "0.5*q1^2", true);
  LiftedMetric lm = lift_metric(sys, vec({0}));
  LiftState s = lift_initial_state(lm, 0, vec({1}), vec({0.5}), 2.0, 0.0, 0.0);
  // u_y = [a(v,v) + 2 b(v) u_t - 2 V u_t^2 - g_uu] / (2 u_t) with v = u_t v0.
  CHECK(s.u[2] == doctest::Approx((1.0 - 2 * 0.5 * 4.0) / 4.0));
  CHECK(std::abs(s.g_uu) <= 1e-14);
  CHECK(s.g_nu == doctest::Approx(-2.0));
  CHECK_THROWS_AS(lift_initial_state(lm, 0, vec({1}), vec({0.5}), 0.0, 0.0, 1.0), NonGraphError);
  LiftState sp = lift_initial_state(lm, 0, vec({1}), vec({0.5}), 1.0, 0.0, 2.5);
  CHECK(sp.g_uu == doctest::Approx(2.5));
}

TEST_CASE("free lift is a straight line") {
  auto sys = lagrangian_from_expressions(flat(2), {}, "0", true);
  LiftCase c = lift_and_compare(sys, vec({0, 1}), vec({1, -0.5}), 4, 2.0, 0.0, 1e-8);
  CHECK(c.proj.matched);
  CHECK(c.proj.max_deviation <= 1e-8);
  for (const LiftState& s : c.run.states) {
    Vec expected = vec({2 * s.lambda, 2 * s.lambda, 1 - s.lambda, 1.25 * s.lambda});
    CHECK((s.x - expected).norm() <= 1e-10);
  }
  SUBCASE("spacelike free data keeps g(u,u) fixed") {
    LiftCase sp = lift_and_compare(sys, vec({0, 1}), vec({1, -0.5}), 4, 1.0, 3.0, 1e-8);
    for (const LiftState& s : sp.run.states) CHECK(s.g_uu == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_CASE("oscillator lift projects onto cos t") {
  auto sys = lagrangian_from_expressions(flat(1), {}, "0.5*q1^2", true);
  for (double g_uu : {0.0, 1.0}) {
    LiftCase c = lift_and_compare(sys, vec({1}), vec({0}), 2 * pi, 1.0, g_uu);
    CHECK(c.run.status == FlowStatus::ReachedHorizon);
    CHECK(c.proj.matched);
    CHECK(c.proj.max_deviation <= 1e-6);
    for (const LiftState& s : c.run.states) CHECK(std::abs(s.x[1] - std::cos(s.x[0])) <= 1e-6);
    const double span = c.run.states.back().lambda;
    CHECK(c.run.g_uu_drift <= 1e-8 * span);
    CHECK(c.run.g_nu_drift <= 1e-8 * span);
  }
}

TEST_CASE("magnetic lift over [0, 5]") {
  auto sys = lagrangian_from_expressions(flat(2), {"-q2/2", "q1/2"}, "0", true);
  LiftCase c = lift_and_compare(sys, vec({1, 0}), vec({0, 1}), 5, 1.0, 0.0);
  CHECK(c.proj.matched);
  CHECK(c.proj.max_deviation <= 1e-6);
  CHECK(c.run.g_uu_drift <= 1e-8 * 5);
  CHECK(c.run.g_nu_drift <= 1e-8 * 5);
}

TEST_CASE("property: correspondence for a time-dependent system with u_t != 1") {
  auto sys = lagrangian_from_expressions(catalog_metric("conformal-poly", ChartManifold::euclidean(2)),
                                         {"-q2*(1+0.2*t)/2", "q1/2"}, "0.5*q1^2+0.1*q2^4", true);
  for (double g_uu : {0.0, 0.7}) {
    LiftCase c = lift_and_compare(sys, vec({0.5, -0.3}), vec({0.2, 0.9}), 3, 0.5, g_uu);
    CHECK(c.proj.matched);
    const double span = c.run.states.back().lambda;
    CHECK(c.run.g_uu_drift <= 1e-8 * span);
    CHECK(c.run.g_nu_drift <= 1e-8 * span);
  }
}

TEST_CASE("null vector is covariantly constant") {
  SUBCASE("free lift gives exactly zero") {
    auto sys = lagrangian_from_expressions(flat(2), {}, "0", true);
    auto rep = check_null_constancy(lift_metric(sys, vec({0, 0})), small_sampler(sys.metric(), 1));
    CHECK(rep.pass);
    CHECK(rep.max_entry == 0.0);
  }
  SUBCASE("oscillator lift in analytic mode") {
    auto sys = lagrangian_from_expressions(flat(1), {}, "0.5*q1^2", true);
    auto rep = check_null_constancy(lift_metric(sys, vec({0})), small_sampler(sys.metric(), 2));
    CHECK(rep.threshold == 1e-8);
    CHECK(rep.max_entry <= 1e-8);
  }
  SUBCASE("generic system in finite-difference mode") {
    auto sys = lagrangian_from_expressions(
        custom_metric(ChartManifold::euclidean(2), {{"1+0.1*q2^2", "0"}, {"0", "exp(0.1*t)"}}, false),
        {"sin(q2)*t", "q1"}, "q1^2*cos(t)", false);
    auto rep = check_null_constancy(lift_metric(sys, vec({0, 0})), small_sampler(sys.metric(), 3));
    CHECK(rep.threshold == 1e-5);
    CHECK(rep.pass);
  }
}

TEST_CASE("non-graph projections are refused") {
  auto sys = lagrangian_from_expressions(flat(1), {}, "0", true);
  LiftedMetric lm = lift_metric(sys, vec({0}));
  LiftState init = lift_initial_state(lm, 0, vec({0}), vec({1}), -1.0, 0, 0);
  LiftRun run = lift_geodesic(lm, init, 1.0);
  Trajectory el = integrate_second_order(sys.metric(), el_force_field(sys), 0, vec({0}), vec({1}), 1,
                                         Direction::Forward);
  CHECK_THROWS_AS(project_and_compare(run, el, 1e-6), NonGraphError);
}
