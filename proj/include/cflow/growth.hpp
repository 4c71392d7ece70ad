#pragma once

#include <functional>
#include <string>

#include "cflow/types.hpp"

namespace cflow {

/// eta = e - 1, so ln(eta + 1) = 1.
inline constexpr double kEta = 1.71828182845904523536;

enum class GrowthKind { Constant, Log, LogLog };

/// A nondecreasing g: [1, inf) -> [1, inf) with divergent
/// G(y) = int_1^y dx / (x g(x)).
class GrowthFunction {
 public:
  static GrowthFunction constant(double c);
  /// ln(eta + x).
  static GrowthFunction log();
  /// ln(eta + x) ln(eta + ln(eta + x)).
  static GrowthFunction loglog();
  /// "constant" (with c), "log" or "loglog".
  static GrowthFunction from_name(const std::string& kind, double c = 1.0);

  GrowthKind kind() const { return kind_; }
  double constant_value() const { return c_; }
  std::string describe() const;

  double operator()(double x) const;
  /// Adaptive Gauss-Kronrod in u = ln x, tolerance 1e-12; exact for constants.
  double G(double y) const;
  /// Bracketed TOMS 748 solve of G(y) = z; throws GrowthRangeError when z
  /// exceeds G at the largest finite double.
  double G_inverse(double z) const;

 private:
  GrowthFunction(GrowthKind kind, double c) : kind_(kind), c_(c) {}
  double g_of_log(double u) const;
  double G_of_log(double u) const;

  GrowthKind kind_;
  double c_;
};

class GrowthRangeError : public Error {
 public:
  GrowthRangeError(const std::string& what, double lo, double hi)
      : Error(what), lo_(lo), hi_(hi) {}
  /// Attained bracket [lo, hi] of G values.
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_;
};

/// G^{-1}(G(E0) + beta |t - t0|).
double bihari_envelope(const GrowthFunction& g, double E0, double beta, double t0, double t);

/// Phi(u) = int_{u0}^{u} ds / omega(s) by adaptive quadrature.
double bihari_phi(const std::function<double(double)>& omega, double u0, double u);

/// Adaptive Gauss-Kronrod quadrature of f over [a, b] to relative tolerance tol.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

/// The proof's Omega(x, y) for growth g and constant K.
double omega(const GrowthFunction& g, double K, double x, double y);

struct OmegaScan {
  double sup_two_omega = 0.0;
  double x = 0.0;
  double y = 0.0;
};

/// sup of 2 Omega over a logarithmic grid of (x, y) in [1e-3, x_max] x [1e-3, y_max].
OmegaScan omega_diagnostic(const GrowthFunction& g, double K, double x_max = 1e6,
                           double y_max = 1e6, int points_per_axis = 200);

}  // namespace cflow
