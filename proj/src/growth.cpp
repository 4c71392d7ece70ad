#include "cflow/growth.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace cflow {

namespace {

// ln of the largest finite double.
const double kLogMax = std::log(std::numeric_limits<double>::max());

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, tol, &error);
}

GrowthFunction GrowthFunction::constant(double c) {
  if (!(c >= 1.0) || !std::isfinite(c))
    throw ConfigError("growth.c", "constant growth must be finite and >= 1");
  return GrowthFunction(GrowthKind::Constant, c);
}

GrowthFunction GrowthFunction::log() { return GrowthFunction(GrowthKind::Log, 1.0); }
GrowthFunction GrowthFunction::loglog() { return GrowthFunction(GrowthKind::LogLog, 1.0); }

GrowthFunction GrowthFunction::from_name(const std::string& kind, double c) {
  if (kind == "constant") return constant(c);
  if (kind == "log") return log();
  if (kind == "loglog") return loglog();
  throw ConfigError("growth.kind", "unknown growth kind '" + kind + "' (constant|log|loglog)");
}

std::string GrowthFunction::describe() const {
  switch (kind_) {
    case GrowthKind::Constant: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "constant(%.17g)", c_);
      return buf;
    }
    case GrowthKind::Log: return "log";
    case GrowthKind::LogLog: return "loglog";
  }
  return "?";
}

double GrowthFunction::operator()(double x) const {
  switch (kind_) {
    case GrowthKind::Constant: return c_;
    case GrowthKind::Log: return std::log(kEta + x);
    case GrowthKind::LogLog: {
      double l = std::log(kEta + x);
      return l * std::log(kEta + l);
    }
  }
  return c_;
}

// g(e^u) evaluated without overflow for large u.
double GrowthFunction::g_of_log(double u) const {
  if (kind_ == GrowthKind::Constant) return c_;
  // ln(eta + e^u) = u + log1p(eta e^{-u}).
  double l = u + std::log1p(kEta * std::exp(-u));
  if (kind_ == GrowthKind::Log) return l;
  return l * std::log(kEta + l);
}

double GrowthFunction::G_of_log(double u) const {
  if (kind_ == GrowthKind::Constant) return u / c_;
  return integrate([this](double s) { return 1.0 / g_of_log(s); }, 0.0, u);
}

double GrowthFunction::G(double y) const {
  if (!(y >= 1.0)) throw Error("G is defined on [1, inf), got " + std::to_string(y));
  return G_of_log(std::log(y));
}

double GrowthFunction::G_inverse(double z) const {
  if (!(z >= 0.0)) throw Error("G^{-1} needs z >= 0, got " + std::to_string(z));
  if (z == 0.0) return 1.0;
  if (kind_ == GrowthKind::Constant) {
    double u = c_ * z;
    if (u > kLogMax)
      throw GrowthRangeError("G^{-1}(" + std::to_string(z) + ") overflows double", 0.0,
                             kLogMax / c_);
    return std::exp(u);
  }
  const double top = G_of_log(kLogMax);
  if (z > top)
    throw GrowthRangeError("G^{-1}(" + std::to_string(z) + ") beyond reachable range [0, " +
                               std::to_string(top) + "]",
                           0.0, top);
  // G is smooth and increasing in u, so a tight bracket solve meets 1e-10 on z.
  auto f = [this, z](double u) { return G_of_log(u) - z; };
  std::uintmax_t iterations = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(a)); };
  auto [lo, hi] = boost::math::tools::toms748_solve(f, 0.0, kLogMax, -z, top - z, tol, iterations);
  return std::exp(0.5 * (lo + hi));
}

double bihari_envelope(const GrowthFunction& g, double E0, double beta, double t0, double t) {
  if (!(E0 >= 1.0)) throw Error("envelope needs E0 >= 1");
  if (!(beta > 0.0)) throw Error("envelope needs beta > 0");
  const double dt = std::abs(t - t0);
  if (dt == 0.0) return E0;
  if (g.kind() == GrowthKind::Constant) {
    double exponent = g.constant_value() * beta * dt;
    double e = E0 * std::exp(exponent);
    if (!std::isfinite(e))
      throw GrowthRangeError("envelope overflows double", 0.0, kLogMax / g.constant_value());
    return e;
  }
  return g.G_inverse(g.G(E0) + beta * dt);
}

double bihari_phi(const std::function<double(double)>& omega_fn, double u0, double u) {
  return integrate([&omega_fn](double s) { return 1.0 / omega_fn(s); }, u0, u);
}

double omega(const GrowthFunction& g, double K, double x, double y) {
  const double r2 = 1.0 + x * x;
  const double E = r2 + y * y;
  const double gr = g(r2);
  const double gE = g(E);
  double num = x * y + x * x * gr + E * (y / (K + y)) * gE + gr * y * y;
  return num / (E * gE);
}

OmegaScan omega_diagnostic(const GrowthFunction& g, double K, double x_max, double y_max,
                           int points_per_axis) {
  OmegaScan scan;
  const double lx = std::log(1e-3), ly = std::log(1e-3);
  for (int i = 0; i < points_per_axis; ++i) {
    double x = std::exp(lx + (std::log(x_max) - lx) * i / (points_per_axis - 1));
    for (int j = 0; j < points_per_axis; ++j) {
      double y = std::exp(ly + (std::log(y_max) - ly) * j / (points_per_axis - 1));
      double w = 2.0 * omega(g, K, x, y);
      if (w > scan.sup_two_omega) scan = {w, x, y};
    }
  }
  return scan;
}

}  // namespace cflow
