#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cflow/mechanics.hpp"
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

SamplerSpec sampler_for(const MetricField& m, double window, std::size_t n, std::uint64_t seed) {
  SamplerSpec s = default_sampler(m.manifold(), window);
  s.samples = n;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("two-form of the one-form b") {
  SUBCASE("b = 0") {
    auto sys = lagrangian_from_expressions(flat(2), {"0", "0"}, "0", true);
    CHECK(two_form(sys, 0.3, vec({1, 2})).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("exact b has F = 0 in finite-difference mode") {
    // b = grad(q1^2 q2 + sin(q2)).
    auto sys = lagrangian_from_expressions(flat(2), {"2*q1*q2", "q1^2+cos(q2)"}, "0", false);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int n = 0; n < 50; ++n) {
      Mat F = two_form(sys, u(rng), vec({u(rng), u(rng)}));
      CHECK(F.cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
  SUBCASE("symmetric-gauge magnetic potential gives F12 = 1") {
    for (bool analytic : {true, false}) {
      auto sys = lagrangian_from_expressions(flat(2), {"-q2/2", "q1/2"}, "0", analytic);
      Mat F = two_form(sys, 0, vec({0.7, -1.3}));
      CHECK(F(0, 1) == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(F(1, 0) == doctest::Approx(-1.0).epsilon(1e-8));
      CHECK(F(0, 0) == 0.0);
      CHECK((F + F.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("finite differences match the analytic form on a nonlinear b") {
    std::vector<std::string> b{"sin(q2)*exp(0.1*t)", "q1^3-q2"};
    auto a = lagrangian_from_expressions(flat(2), b, "0", true);
    auto f = lagrangian_from_expressions(flat(2), b, "0", false);
    for (double x : {-1.0, 0.2, 1.5}) {
      Mat Fa = two_form(a, 0.4, vec({x, 0.3 * x}));
      Mat Ff = two_form(f, 0.4, vec({x, 0.3 * x}));
      CHECK((Fa - Ff).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("Euler-Lagrange force") {
  SUBCASE("free particle") {
    auto sys = lagrangian_from_expressions(flat(2), {}, "0", true);
    CHECK(el_force(sys, TangentState{1, vec({1, 2}), vec({3, 4})}).norm() == 0.0);
  }
  SUBCASE("harmonic potential gives -q") {
    auto sys = lagrangian_from_expressions(flat(2), {}, "0.5*(q1^2+q2^2)", true);
    Vec f = el_force(sys, TangentState{0, vec({1.5, -0.5}), vec({2, 2})});
    CHECK(f[0] == doctest::Approx(-1.5));
    CHECK(f[1] == doctest::Approx(0.5));
  }
  SUBCASE("growing conformal metric acts as friction -2v") {
    auto sys = lagrangian_from_expressions(catalog_metric("conformal-exp", ChartManifold::euclidean(1)),
                                           {}, "0", true);
    CHECK(el_force(sys, TangentState{0.7, vec({0.2}), vec({1})})[0] == doctest::Approx(-2.0));
    Trajectory tr = integrate_second_order(sys.metric(), el_force_field(sys), 0, vec({0.5}), vec({1}), 4,
                                           Direction::Forward);
    REQUIRE(tr.status == FlowStatus::ReachedHorizon);
    for (const auto& s : tr.samples)
      CHECK(std::abs(s.q[0] - (0.5 + (1 - std::exp(-2 * s.t)) / 2)) <= 1e-8);
  }
  SUBCASE("time-dependent b contributes -dt b") {
    auto sys = lagrangian_from_expressions(flat(1), {"t*q1"}, "0", true);
    // F = 0 in one dimension, so f = -dt b = -q1.
    CHECK(el_force(sys, TangentState{2, vec({3}), vec({5})})[0] == doctest::Approx(-3.0));
  }
}

TEST_CASE("property: energy is conserved for static autonomous systems") {
  auto m = custom_metric(ChartManifold::euclidean(2), {{"1+0.2*q2^2", "0"}, {"0", "1"}}, true);
  auto sys = lagrangian_from_expressions(m, {}, "0.5*q1^2+0.25*q2^4", true);
  Trajectory tr = integrate_second_order(sys.metric(), el_force_field(sys), 0, vec({1, 0.5}), vec({0, 1}),
                                         5, Direction::Forward);
  REQUIRE(tr.status == FlowStatus::ReachedHorizon);
  auto H = [&](const TangentState& s) {
    double n = metric_norm(sys.metric(), s);
    return 0.5 * n * n + sys.V(s.t, s.q);
  };
  const double H0 = H(tr.samples.front());
  for (const auto& s : tr.samples) CHECK(std::abs(H(s) - H0) <= 1e-6 * 5);
}

TEST_CASE("property: magnetic forces do no work") {
  auto sys = lagrangian_from_expressions(flat(2), {"-q2*(1+q1^2)/2", "q1/2+sin(q2)"}, "0", true);
  Trajectory tr = integrate_second_order(sys.metric(), el_force_field(sys), 0, vec({1, 0}), vec({0.3, 1}),
                                         5, Direction::Forward);
  REQUIRE(tr.status == FlowStatus::ReachedHorizon);
  const double s0 = tr.samples.front().v.norm();
  for (const auto& s : tr.samples) CHECK(std::abs(s.v.norm() - s0) <= 1e-8 * 5);
}

TEST_CASE("Lagrangian certification") {
  auto g = GrowthFunction::constant(1);
  SUBCASE("harmonic potential passes") {
    auto sys = lagrangian_from_expressions(flat(2), {}, "0.5*(q1^2+q2^2)", true);
    auto bundle = certify_lagrangian(sys, vec({0, 0}), g, sampler_for(sys.metric(), 2, 1000, 1));
    CHECK(bundle.pass());
    CHECK(bundle.reports.size() == 3);
  }
  SUBCASE("bounded data on the torus passes with a constant g") {
    auto T = ChartManifold::flat_torus({2 * pi, 2 * pi});
    auto sys = lagrangian_from_expressions(catalog_metric("flat-torus", T), {"0.5*sin(q2)", "0.5*cos(q1)"},
                                           "3*cos(q1)*sin(t)", true);
    auto bundle = certify_lagrangian(sys, vec({0, 0}), g, sampler_for(sys.metric(), 2, 1000, 2));
    CHECK_FALSE(bundle.pass());
    double fitted = 1.0;
    for (const auto& r : bundle.reports) fitted = std::max(fitted, r.fitted_constant);
    CHECK(fitted <= 3.0 + 1e-9);
    auto retry = certify_lagrangian(sys, vec({0, 0}), GrowthFunction::constant(fitted),
                                    sampler_for(sys.metric(), 2, 1000, 2));
    CHECK(retry.pass());
  }
  SUBCASE("sextic potential fails at large |q|") {
    auto sys = lagrangian_from_expressions(flat(1), {}, "q1^6/6", true);
    SamplerSpec s = sampler_for(sys.metric(), 2, 1000, 3);
    s.q_box = {{-100, 100}};
    auto bundle = certify_lagrangian(sys, vec({0}), GrowthFunction::constant(10), s);
    CHECK_FALSE(bundle.pass());
    const CertificationReport& pot = bundle.reports.back();
    CHECK(pot.hypothesis == "potential-gradient");
    REQUIRE(pot.witness);
    const double q = std::abs(pot.witness->q[0]);
    CHECK(q == 100.0);
    const double direct = std::pow(q, 5) / (1 + q) / 10.0;
    CHECK(std::abs(pot.worst_ratio / direct - 1.0) <= 1e-10);
  }
}

TEST_CASE("property: certified Lagrangian systems are complete on the window") {
  auto g = GrowthFunction::constant(1);
  auto sys = lagrangian_from_expressions(catalog_metric("conformal-poly", ChartManifold::euclidean(2)),
                                         {"-q2/2", "q1/2"}, "0.5*(q1^2+q2^2)*(1+0.5*sin(t))", true);
  const double r = 3.0;
  auto bundle = certify_lagrangian(sys, vec({0, 0}), g, sampler_for(sys.metric(), r, 1000, 4));
  REQUIRE(bundle.pass());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int n = 0; n < 10; ++n) {
    for (Direction d : {Direction::Forward, Direction::Backward}) {
      Trajectory tr = integrate_second_order(sys.metric(), el_force_field(sys), 0, vec({u(rng), u(rng)}),
                                             vec({u(rng), u(rng)}), r, d);
      CHECK(tr.status == FlowStatus::ReachedHorizon);
    }
  }
}

TEST_CASE("action of the harmonic orbit over a period") {
  auto sys = lagrangian_from_expressions(flat(1), {}, "0.5*q1^2", true);
  Trajectory tr = integrate_second_order(sys.metric(), el_force_field(sys), 0, vec({1}), vec({0}), 2 * pi,
                                         Direction::Forward);
  // L = (sin^2 - cos^2)/2 integrates to 0 over a full period.
  CHECK(std::abs(action(sys, tr)) <= 1e-6);
}
