#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cflow/certify.hpp"
#include "cflow/flow.hpp"

namespace cflow {

using CovectorFn = std::function<Vec(double t, const Vec& q)>;
using ScalarFn = std::function<double(double t, const Vec& q)>;

/// L(t, q, v) = 1/2 a_t(v, v) + b_t(v) - V(t, q). Derivatives of b and V
/// without an analytic form come from central differences.
class LagrangianSystem {
 public:
  LagrangianSystem(MetricField metric, CovectorFn b, ScalarFn V);

  /// J(i, j) = d b_j / d q^i.
  LagrangianSystem& set_b_jacobian(MatrixFn jacobian);
  LagrangianSystem& set_b_time_derivative(CovectorFn dt_b);
  LagrangianSystem& set_potential_gradient(CovectorFn gradient);
  LagrangianSystem& set_potential_time_derivative(ScalarFn dt_V);

  const MetricField& metric() const { return metric_; }
  int dimension() const { return metric_.dimension(); }
  /// True when every derivative of a, b and V is analytic.
  bool analytic() const;

  Vec b(double t, const Vec& q) const { return b_(t, q); }
  double V(double t, const Vec& q) const { return V_(t, q); }
  Mat b_jacobian(double t, const Vec& q) const;
  Vec dt_b(double t, const Vec& q) const;
  Vec grad_V(double t, const Vec& q) const;
  double dt_V(double t, const Vec& q) const;
  double lagrangian(const TangentState& s) const;

 private:
  MetricField metric_;
  CovectorFn b_;
  ScalarFn V_;
  MatrixFn b_jacobian_;
  CovectorFn dt_b_;
  CovectorFn grad_V_;
  ScalarFn dt_V_;
};

/// b and V given as expressions in t, q1..qd. An empty `b` means b = 0.
/// With `analytic` the derivatives are symbolic.
LagrangianSystem lagrangian_from_expressions(MetricField metric, const std::vector<std::string>& b,
                                             const std::string& V, bool analytic);

/// F_ij = d_i b_j - d_j b_i (spatial exterior derivative).
Mat two_form(const LagrangianSystem& sys, double t, const Vec& q);

/// f^k = a^{kl} [F_lj v^j - (d_t a)_lj v^j - (d_t b_l + d_l V)].
Vec el_force(const LagrangianSystem& sys, const TangentState& s);

/// el_force packaged for the flow engine, with F_t as the two-form part.
ForceField el_force_field(const LagrangianSystem& sys);

/// Metric growth in mode R2 plus |d_t b|_t <= g(1 + rho^2)(1 + rho) and
/// |dV|_t <= g(1 + rho^2)(1 + rho), covector norms through a_t^{-1}.
CertificationBundle certify_lagrangian(const LagrangianSystem& sys, const Vec& basepoint,
                                       const GrowthFunction& g, const SamplerSpec& sampler);

/// Trapezoid integral of L along the trajectory (diagnostic only).
double action(const LagrangianSystem& sys, const Trajectory& traj);

}  // namespace cflow
