#pragma once

#include <cstdint>
#include <optional>

#include "cflow/metric.hpp"

namespace cflow {

struct ExpMapOptions {
  double tolerance = 1e-10;
};

/// Endpoint at unit parameter of the geodesic of the frozen metric a_t with
/// initial point p and velocity w. Throws ChartExitError (carrying the exit
/// parameter) when the geodesic leaves the chart.
Vec exp_map(const MetricField& m, double t, const Vec& p, const Vec& w,
            const ExpMapOptions& options = {});

struct DistanceOptions {
  /// Random perturbations of the straight-chart-line start.
  int perturbations = 8;
  double newton_tolerance = 1e-10;
  int max_iterations = 50;
  std::uint64_t seed = 20240917;
  double ivp_tolerance = 1e-10;
};

struct DistanceResult {
  double value = 0.0;
  /// Shooting solution w with exp_p^t(w) = q (in the covering chart for tori).
  Vec initial_velocity;
  bool converged = false;
  /// Max-norm endpoint residual of the reported (or best attempted) solution.
  double residual = 0.0;
  std::optional<double> closed_form;
  int converged_starts = 0;
};

/// Riemannian distance rho_t(p, q) by multiple-start Newton shooting on the
/// exponential map. Non-convergence is reported through `converged`, not thrown.
DistanceResult distance(const MetricField& m, double t, const Vec& p, const Vec& q,
                        const DistanceOptions& options = {});

class DistanceError : public Error {
 public:
  using Error::Error;
};

/// rho_t(p, q) through the metric's closed form when it has one, otherwise by
/// shooting. Throws DistanceError when shooting does not converge.
double rho(const MetricField& m, double t, const Vec& p, const Vec& q,
           const DistanceOptions& options = {});

/// R = 1 + rho_t(p, q).
double proper_R(const MetricField& m, const Vec& basepoint, double t, const Vec& q);
/// E = 1 + rho_t(p, q)^2 + |v|_t^2.
double proper_E(const MetricField& m, const Vec& basepoint, const TangentState& s);

}  // namespace cflow
