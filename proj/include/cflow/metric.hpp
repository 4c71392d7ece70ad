#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cflow/manifold.hpp"
#include "cflow/types.hpp"

namespace cflow {

using MatrixFn = std::function<Mat(double t, const Vec& q)>;
/// Returns the d matrices d/dq^k of a matrix field.
using MatrixListFn = std::function<std::vector<Mat>(double t, const Vec& q)>;
using DistanceFn = std::function<double(double t, const Vec& p, const Vec& q)>;

enum class DerivativeMode { Analytic, FiniteDifference };

/// Central-difference steps: 1e-5 scaled by max(1, |x|).
double time_step(double t);
double space_step(double x);

/// Connection coefficients Gamma^k_ij stored densely, symmetric in (i, j).
class Christoffel {
 public:
  explicit Christoffel(int dimension);

  int dimension() const { return d_; }
  double operator()(int k, int i, int j) const { return data_[(k * d_ + i) * d_ + j]; }
  double& operator()(int k, int i, int j) { return data_[(k * d_ + i) * d_ + j]; }

  /// Gamma^k_ij u^i w^j.
  Vec contract(const Vec& u, const Vec& w) const;
  Vec contract(const Vec& u) const { return contract(u, u); }
  double max_abs() const;

 private:
  int d_;
  std::vector<double> data_;
};

/// Levi-Civita coefficients from a non-degenerate symmetric matrix and its
/// coordinate derivatives. Works for any signature; throws on a singular matrix.
Christoffel christoffel_from_derivatives(const Mat& metric, std::span<const Mat> derivatives);

/// Positive definite up to the scale-free tolerance min eig > 1e-12 max eig.
bool is_positive_definite(const Mat& a);

/// A time-dependent Riemannian metric a_t on a chart. Derivatives missing an
/// analytic form are produced by central differences.
class MetricField {
 public:
  MetricField(ChartManifold manifold, MatrixFn eval, std::string name = "custom");

  MetricField& set_time_derivative(MatrixFn dt);
  MetricField& set_space_derivatives(MatrixListFn dq);
  MetricField& set_closed_form_distance(DistanceFn distance);
  /// Declares the metric independent of t: dt() returns zero without evaluating.
  MetricField& set_static();

  const ChartManifold& manifold() const { return manifold_; }
  int dimension() const { return manifold_.dimension(); }
  const std::string& name() const { return name_; }
  DerivativeMode time_mode() const;
  DerivativeMode space_mode() const;
  bool is_static() const { return static_; }
  bool has_closed_form_distance() const { return static_cast<bool>(distance_); }
  double closed_form_distance(double t, const Vec& p, const Vec& q) const;

  Mat operator()(double t, const Vec& q) const;
  /// Same as operator() but rejects a matrix that is not positive definite.
  Mat checked(double t, const Vec& q) const;
  Mat dt(double t, const Vec& q) const;
  std::vector<Mat> dq(double t, const Vec& q) const;
  Christoffel christoffel(double t, const Vec& q) const;
  /// Gamma^k_ij(t, q) v^i v^j without materializing the full symbol array.
  Vec geodesic_acceleration(double t, const Vec& q, const Vec& v) const;

 private:
  ChartManifold manifold_;
  std::string name_;
  MatrixFn eval_;
  MatrixFn dt_;
  MatrixListFn dq_;
  DistanceFn distance_;
  bool static_ = false;
};

Mat central_difference_time(const MatrixFn& f, double t, const Vec& q, double h);
std::vector<Mat> central_difference_space(const MatrixFn& f, double t, const Vec& q);

/// sqrt(v^T a_t(q) v).
double metric_norm(const MetricField& m, const TangentState& s);
/// v^T (d/dt a_t)(q) v.
double dt_metric_quadratic_form(const MetricField& m, const TangentState& s);
/// sqrt(w^T a_t(q)^{-1} w) for a covector w.
double covector_norm(const MetricField& m, double t, const Vec& q, const Vec& w);

}  // namespace cflow
