#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cflow/certify.hpp"
#include "cflow/inequalities.hpp"
#include "cflow/metric_catalog.hpp"
#include "oracles.hpp"

using namespace cflow;
using std::numbers::e;
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

ForceField force(PhaseFieldFn f) {
  ForceField ff;
  ff.total = std::move(f);
  return ff;
}

}  // namespace

TEST_CASE("growth functions") {
  SUBCASE("constant kinds in closed form") {
    auto g = GrowthFunction::constant(1);
    CHECK(g.G(1.0) == 0.0);
    CHECK(g.G(e) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.G_inverse(2.0) == doctest::Approx(e * e).epsilon(1e-14));
    auto g3 = GrowthFunction::constant(3);
    CHECK(g3.G(e * e * e) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("log kinds match high-precision quadrature") {
    // 40-digit reference quadrature of 1/(x g(x)) from 1 to y.
    struct Ref { double y, log, loglog; };
    const Ref refs[] = {
        {2.0, 0.6082003528078136698, 0.579969281632228895},
        {10.0, 1.5102089471776852195, 1.3059695972425879773},
        {1e3, 2.5914606375398788341, 1.9271600138856186199},
        {1e6, 3.2845793029558303306, 2.2121588444310747817},
        {1e100, 6.0979900117946292466, 2.9301805526002785449},
    };
    auto lg = GrowthFunction::log();
    auto llg = GrowthFunction::loglog();
    for (const Ref& r : refs) {
      CHECK(lg.G(r.y) == doctest::Approx(r.log).epsilon(1e-10));
      CHECK(llg.G(r.y) == doctest::Approx(r.loglog).epsilon(1e-10));
    }
  }
  SUBCASE("G is nondecreasing and G_inverse inverts it on [1, 1e6]") {
    for (auto g : {GrowthFunction::constant(2), GrowthFunction::log(), GrowthFunction::loglog()}) {
      double prev = -1.0;
      for (double y = 1.0; y <= 1e6; y *= 1.7) {
        double G = g.G(y);
        CHECK(G >= prev);
        prev = G;
        CHECK(std::abs(g.G_inverse(G) / y - 1.0) <= 1e-9);
      }
      CHECK(g(1.0) >= 1.0);
    }
  }
  SUBCASE("out-of-range inversion reports the searched bracket") {
    auto lg = GrowthFunction::log();
    try {
      lg.G_inverse(1e6);
      FAIL("expected GrowthRangeError");
    } catch (const GrowthRangeError& err) {
      CHECK(err.hi() > err.lo());
    }
    CHECK_THROWS_AS(GrowthFunction::constant(0.5), ConfigError);
    CHECK_THROWS_AS(GrowthFunction::from_name("cubic"), ConfigError);
  }
}

TEST_CASE("Bihari envelope") {
  auto g = GrowthFunction::constant(1);
  CHECK(bihari_envelope(g, 3.0, 6.0, 0.5, 0.5) == 3.0);
  CHECK(bihari_envelope(g, 2.0, 1.0, 0.0, 1.0) == doctest::Approx(2 * e).epsilon(1e-14));
  CHECK(bihari_envelope(g, 2.0, 6.0, 0.0, -1.0) == doctest::Approx(2 * std::exp(6.0)).epsilon(1e-14));
  SUBCASE("log growth agrees with direct quadrature of the inverse") {
    auto lg = GrowthFunction::log();
    double env = bihari_envelope(lg, 2.0, 6.0, 0.0, 0.5);
    // In u = ln x the integrand 1/(x g(x)) dx becomes du / g(e^u).
    double lhs = oracle::simpson([&](double u) { return 1.0 / lg(std::exp(u)); }, std::log(2.0),
                                 std::log(env), 20000);
    CHECK(lhs == doctest::Approx(3.0).epsilon(1e-8));
  }
  SUBCASE("overflow is a range error") {
    CHECK_THROWS_AS(bihari_envelope(g, 2.0, 6.0, 0.0, 1000.0), GrowthRangeError);
  }
}

TEST_CASE("property: two-sided Bihari equality on exact solutions") {
  auto omega_fn = [](double x) { return x * std::log(e + x); };
  auto psi = [](double t) { return 1.0 + 0.5 * std::sin(t); };
  for (double sign : {1.0, -1.0}) {
    auto rhs = [&](double t, const Vec& y) { return Vec(Vec::Constant(1, sign * psi(t) * omega_fn(y[0]))); };
    const double x0 = 2.0, t1 = 1.0;
    double x1 = oracle::rk4(rhs, vec({x0}), 0.0, t1, 20000)[0];
    double lhs = bihari_phi(omega_fn, x0, x1);
    double rhs_int = sign * oracle::simpson(psi, 0.0, t1, 2000);
    CHECK(std::abs(lhs - rhs_int) <= 1e-9);
  }
}

TEST_CASE("Omega stays below the beta = 6 bound") {
  for (auto g : {GrowthFunction::constant(1), GrowthFunction::constant(4), GrowthFunction::log()}) {
    for (double K : {0.5, 1.0, 10.0}) {
      OmegaScan scan = omega_diagnostic(g, K, 1e6, 1e6, 120);
      CHECK(scan.sup_two_omega <= 6.0);
      CHECK(scan.sup_two_omega > 0.0);
    }
  }
}

TEST_CASE("metric growth certification") {
  auto g = GrowthFunction::constant(1);
  SUBCASE("static metric passes with ratio 0") {
    auto m = flat(2);
    auto rep = check_metric_growth(m, vec({0, 0}), g, GrowthMode::R, sampler_for(m, 3, 500, 1));
    CHECK(rep.pass);
    CHECK(rep.worst_ratio == 0.0);
  }
  SUBCASE("conformal-exp saturates with ratio 1") {
    auto m = catalog_metric("conformal-exp", ChartManifold::euclidean(2));
    auto rep = check_metric_growth(m, vec({0, 0}), g, GrowthMode::R, sampler_for(m, 3, 500, 2));
    CHECK(rep.pass);
    CHECK(rep.worst_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("conformal-poly ratio |t|/(1+t^2) stays below 1/2") {
    auto m = catalog_metric("conformal-poly", ChartManifold::euclidean(1));
    auto rep = check_metric_growth(m, vec({0}), g, GrowthMode::R, sampler_for(m, 3, 500, 3));
    CHECK(rep.pass);
    CHECK(rep.worst_ratio <= 0.5 + 1e-12);
    CHECK(rep.worst_ratio >= 0.49);
  }
  SUBCASE("exp(t^2) metric fails near |t| = 3 with fitted constant 3") {
    auto m = custom_metric(ChartManifold::euclidean(1), {{"exp(t^2)"}}, true);
    auto rep = check_metric_growth(m, vec({0}), g, GrowthMode::R, sampler_for(m, 3, 2000, 4));
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.witness);
    CHECK(std::abs(rep.witness->t) == doctest::Approx(3.0));
    CHECK(rep.fitted_constant == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(rep.scope.find("violated") == 0);
  }
}

TEST_CASE("Wintner certification") {
  auto m = flat(1);
  auto g = GrowthFunction::constant(1);
  SamplerSpec s = sampler_for(m, 2, 2000, 9);
  s.q_box = {{-100, 100}};
  SUBCASE("zero and linear fields pass") {
    CHECK(check_wintner(m, vec({0}), VectorField{[](double, const Vec& q) { return Vec(0 * q); }, {}}, g, s).pass);
    auto lin = check_wintner(m, vec({0}), VectorField{[](double, const Vec& q) { return q; }, {}}, g, s);
    CHECK(lin.pass);
    CHECK(lin.worst_ratio < 1.0);
  }
  SUBCASE("quadratic field fails at |q| = 100 with ratio 10000/101") {
    auto rep = check_wintner(m, vec({0}), VectorField{[](double, const Vec& q) { return Vec(q.cwiseProduct(q)); }, {}},
                             g, s);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.witness);
    const double q = rep.witness->q[0];
    CHECK(std::abs(q) == 100.0);
    CHECK(std::abs(rep.worst_ratio - q * q / (1 + std::abs(q))) <= 1e-10);
  }
}

TEST_CASE("force growth certification") {
  auto m = flat(1);
  auto g = GrowthFunction::constant(1);
  SamplerSpec s = sampler_for(m, 2, 2000, 10);
  SUBCASE("oscillator passes") {
    auto rep = check_force_growth(m, vec({0}), force([](double, const Vec& q, const Vec&) { return Vec(-q); }),
                                  g, 1.0, s);
    CHECK(rep.pass);
  }
  SUBCASE("v^2 fails at v = 10 with the direct ratio") {
    auto rep = check_force_growth(m, vec({0}), force([](double, const Vec&, const Vec& v) { return Vec(v.cwiseProduct(v)); }),
                                  g, 1.0, s);
    CHECK_FALSE(rep.pass);
    REQUIRE(rep.witness);
    const double q = rep.witness->q[0], v = rep.witness->v[0];
    CHECK(std::abs(v) == 10.0);
    CHECK(q == 0.0);
    const double direct = v * v * (1.0 + std::abs(v)) / oracle::energy(std::abs(q), std::abs(v));
    CHECK(std::abs(rep.worst_ratio - direct) <= 1e-10);
  }
  SUBCASE("a pure magnetic force has zero remainder") {
    auto m2 = flat(2);
    ForceField f = force([](double, const Vec&, const Vec& v) { return vec({v[1], -v[0]}); });
    f.two_form = [](double, const Vec&) {
      Mat F(2, 2);
      F << 0, 1, -1, 0;
      return F;
    };
    auto rep = check_force_growth(m2, vec({0, 0}), f, g, 1.0, sampler_for(m2, 2, 500, 12));
    CHECK(rep.pass);
    CHECK(rep.worst_ratio == 0.0);
  }
  SUBCASE("friction is discounted only forward in time") {
    ForceField f = force([](double, const Vec&, const Vec& v) { return Vec(-50.0 * v); });
    f.friction = [](double, const Vec&, const Vec&) { return 50.0; };
    CHECK(check_force_growth(m, vec({0}), f, g, 1.0, s, Direction::Forward).worst_ratio == 0.0);
    CHECK_FALSE(check_force_growth(m, vec({0}), f, g, 1.0, s, Direction::Backward).pass);
  }
}

TEST_CASE("property: enlarging g never turns pass into fail") {
  auto m = catalog_metric("conformal-poly", ChartManifold::euclidean(1));
  SamplerSpec s = sampler_for(m, 3, 1000, 21);
  ForceField f = force([](double t, const Vec& q, const Vec& v) { return Vec(-q * (1 + 0.2 * t) + 0.5 * v); });
  double prev = INFINITY;
  bool passed = false;
  for (double c : {1.0, 1.5, 2.0, 4.0, 8.0}) {
    auto g = GrowthFunction::constant(c);
    auto rep = check_force_growth(m, vec({0}), f, g, 1.0, s);
    CHECK(rep.worst_ratio <= prev);
    if (passed) CHECK(rep.pass);
    passed = passed || rep.pass;
    prev = rep.worst_ratio;
  }
  CHECK(passed);
}

TEST_CASE("distance inequality") {
  auto g = GrowthFunction::constant(1);
  SUBCASE("radial line on flat R^1") {
    auto m = flat(1);
    Trajectory tr = integrate_first_order(m, VectorField{[](double, const Vec&) { return vec({1}); }, {}}, 0,
                                          vec({0}), 2, Direction::Forward);
    auto rep = verify_distance_inequality(m, vec({0}), tr, g, InequalityMode::Erx);
    CHECK(rep.satisfied);
    CHECK(rep.lhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.rhs == doctest::Approx(4.0).epsilon(1e-6));
  }
  SUBCASE("stationary curve under exp(2t) saturates") {
    auto m = catalog_metric("conformal-exp", ChartManifold::euclidean(1));
    Trajectory tr = integrate_first_order(m, VectorField{[](double, const Vec&) { return vec({0}); }, {}}, 0,
                                          vec({1}), 1, Direction::Forward);
    auto rep = verify_distance_inequality(m, vec({0}), tr, g, InequalityMode::Erx);
    CHECK(rep.satisfied);
    CHECK(rep.lhs == doctest::Approx(e - 1).epsilon(1e-10));
    CHECK(std::abs(rep.lhs - rep.rhs) <= 1e-6);
  }
  SUBCASE("oscillator in squared mode has slack") {
    auto m = flat(1);
    Trajectory tr = integrate_second_order(m, force([](double, const Vec& q, const Vec&) { return Vec(-q); }), 0,
                                           vec({1}), vec({0}), 2 * pi, Direction::Forward);
    auto rep = verify_distance_inequality(m, vec({0}), tr, g, InequalityMode::Ers);
    CHECK(rep.satisfied);
    CHECK(rep.worst_excess < 0.0);
    CHECK(rep.rhs - rep.lhs > 1.0);
  }
  SUBCASE("a curve faster than its velocity column is caught") {
    auto m = flat(1);
    Trajectory tr;
    for (int i = 0; i <= 10; ++i) {
      tr.samples.push_back(TangentState{0.1 * i, vec({10.0 * i}), vec({0.0})});
      tr.energy.push_back(1.0);
    }
    auto rep = verify_distance_inequality(m, vec({0}), tr, g, InequalityMode::Erx);
    CHECK_FALSE(rep.satisfied);
    CHECK(rep.verified);
  }
}

TEST_CASE("energy envelope") {
  auto g = GrowthFunction::constant(1);
  auto m = flat(1);
  SUBCASE("oscillator stays under 2 exp(6|t|)") {
    Trajectory tr = integrate_second_order(m, force([](double, const Vec& q, const Vec&) { return Vec(-q); }), 0,
                                           vec({1}), vec({0}), 2 * pi, Direction::Forward);
    auto rep = verify_energy_envelope(tr, g, 6.0);
    CHECK(rep.satisfied);
    CHECK(rep.E0 == doctest::Approx(2.0));
  }
  SUBCASE("example with beta = 1 grows like exp(2t), under the envelope") {
    ForceField f = force([](double, const Vec& q, const Vec& v) { return Vec(v.cwiseProduct(v) / (1 + q[0])); });
    f.domain = [](double, const Vec& q) { return 1 + q[0] > 0; };
    Trajectory tr = integrate_second_order(m, f, 0, vec({0}), vec({1}), 3, Direction::Forward);
    CHECK(verify_energy_envelope(tr, g, 6.0).satisfied);
  }
  SUBCASE("rest state has constant E") {
    Trajectory tr = integrate_second_order(m, force([](double, const Vec&, const Vec&) { return vec({0}); }), 0,
                                           vec({0.5}), vec({0}), 1, Direction::Backward);
    auto rep = verify_energy_envelope(tr, g, 6.0);
    CHECK(rep.satisfied);
    for (double E : tr.energy) CHECK(E == rep.E0);
  }
  SUBCASE("an inflated energy column violates") {
    Trajectory tr;
    for (int i = 0; i <= 10; ++i) {
      tr.samples.push_back(TangentState{0.1 * i, vec({0}), vec({0})});
      tr.energy.push_back(i == 10 ? 1e6 : 2.0);
    }
    auto rep = verify_energy_envelope(tr, g, 6.0);
    CHECK_FALSE(rep.satisfied);
    CHECK(rep.worst_time == doctest::Approx(1.0));
  }
}

TEST_CASE("sampler") {
  auto m = flat(2);
  SamplerSpec s = sampler_for(m, 2, 100, 5);
  auto a = draw_samples(s, true), b = draw_samples(s, true);
  REQUIRE(a.size() == b.size());
  CHECK(a.size() > 100);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].q == b[i].q);
    CHECK(a[i].v == b[i].v);
    CHECK(std::abs(a[i].t) <= 2.0);
    CHECK(a[i].q.cwiseAbs().maxCoeff() <= 10.0);
  }
  s.seed = 6;
  auto c = draw_samples(s, true);
  CHECK(c.back().q != a.back().q);
}
