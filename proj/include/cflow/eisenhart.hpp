#pragma once

#include <string>
#include <vector>

#include "cflow/flow.hpp"
#include "cflow/mechanics.hpp"

namespace cflow {

/// The Lorentzian metric on T x Q x R in coordinates (t, q^1..q^d, y):
/// g_tt = -2V, g_ti = b_i, g_ty = -1, g_ij = a_ij, g_iy = g_yy = 0.
class LiftedMetric {
 public:
  explicit LiftedMetric(const LagrangianSystem& base);

  const LagrangianSystem& base() const { return *base_; }
  /// d + 2.
  int dimension() const { return base_->dimension() + 2; }

  Mat operator()(const Vec& x) const;
  /// Coordinate derivatives of g; the y-derivative is identically zero.
  std::vector<Mat> derivatives(const Vec& x) const;
  Christoffel christoffel(const Vec& x) const;
  /// Exactly one negative eigenvalue.
  bool lorentzian(const Vec& x) const;

 private:
  const LagrangianSystem* base_;
};

/// Assembles the lift and checks its signature at (t, q, y) = (0, basepoint, 0).
LiftedMetric lift_metric(const LagrangianSystem& sys, const Vec& basepoint);

struct LiftState {
  double lambda = 0.0;
  /// (t, q, y).
  Vec x;
  /// dx/dlambda.
  Vec u;
  /// d^2x/dlambda^2 = -Gamma(u, u), kept for Hermite interpolation.
  Vec accel;
  double g_uu = 0.0;
  /// g(n, u) = -dt/dlambda for n = d/dy.
  double g_nu = 0.0;
};

/// The projection is not a graph over t (dt/dlambda vanishes or changes sign).
class NonGraphError : public Error {
 public:
  using Error::Error;
};

/// Initial lift velocity u = (u_t, u_t v0, u_y) with u_y fixed by g(u, u) = g_uu
/// (g_uu = 0 gives null data). Throws NonGraphError when u_t = 0.
LiftState lift_initial_state(const LiftedMetric& lm, double t0, const Vec& q0, const Vec& v0,
                             double u_t, double y0, double g_uu);

struct LiftRun {
  std::vector<LiftState> states;
  FlowStatus status = FlowStatus::ReachedHorizon;
  /// max |g(u,u) - g(u,u)(0)| and the same for g(n, u).
  double g_uu_drift = 0.0;
  double g_nu_drift = 0.0;
};

/// Geodesic of g over affine parameter [0, lambda_end].
LiftRun lift_geodesic(const LiftedMetric& lm, const LiftState& initial, double lambda_end,
                      double tolerance = 1e-10);

struct ProjectionReport {
  double max_deviation = 0.0;
  double worst_time = 0.0;
  bool matched = false;
  std::size_t compared = 0;
};

/// Reparametrizes the lift by t with cubic Hermite interpolation and compares
/// (q, dq/dt) with the Euler-Lagrange trajectory at its sample times inside
/// the lift's t range. Throws NonGraphError if dt/dlambda <= 0 anywhere.
/// Position differences are taken in `chart` when given (periodic axes wrap).
ProjectionReport project_and_compare(const LiftRun& run, const Trajectory& el,
                                     double tolerance, const ChartManifold* chart = nullptr);

struct ConstancyReport {
  double max_entry = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::size_t samples = 0;
};

/// max |nabla_mu n^nu| = max |Gamma^nu_{mu y}| over sampled (t, q, y); the
/// threshold is 1e-8 with analytic derivatives, 1e-5 otherwise.
ConstancyReport check_null_constancy(const LiftedMetric& lm, const SamplerSpec& sampler,
                                     Interval y_range = {-10.0, 10.0});

}  // namespace cflow
