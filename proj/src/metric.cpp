#include "cflow/metric.hpp"

#include <algorithm>
#include <cmath>

namespace cflow {

double time_step(double t) { return 1e-5 * std::max(1.0, std::abs(t)); }
double space_step(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }

Christoffel::Christoffel(int dimension)
    : d_(dimension), data_(static_cast<std::size_t>(dimension) * dimension * dimension, 0.0) {}

Vec Christoffel::contract(const Vec& u, const Vec& w) const {
  Vec out = Vec::Zero(d_);
  for (int k = 0; k < d_; ++k) {
    double s = 0.0;
    const double* row = &data_[static_cast<std::size_t>(k) * d_ * d_];
    for (int i = 0; i < d_; ++i) {
      if (u[i] == 0.0) continue;
      double inner = 0.0;
      for (int j = 0; j < d_; ++j) inner += row[i * d_ + j] * w[j];
      s += u[i] * inner;
    }
    out[k] = s;
  }
  return out;
}

double Christoffel::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

Christoffel christoffel_from_derivatives(const Mat& metric, std::span<const Mat> da) {
  const int d = static_cast<int>(metric.rows());
  Eigen::PartialPivLU<Mat> lu(metric);
  double det = lu.determinant();
  // Relative to the Hadamard bound, so one large entry is not mistaken for
  // degeneracy.
  const double hadamard = metric.rowwise().norm().prod();
  if (!std::isfinite(det) || std::abs(det) <= 1e-300 || std::abs(det) < 1e-14 * hadamard)
    throw EvaluationError("singular metric matrix");

  // Lowered symbols Gamma_{l,ij} = (d_i a_lj + d_j a_li - d_l a_ij) / 2.
  Mat lowered(d, d * d);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double g = 0.5 * (da[i](l, j) + da[j](l, i) - da[l](i, j));
        lowered(l, i * d + j) = g;
        lowered(l, j * d + i) = g;
      }
  Mat raised = lu.solve(lowered);

  Christoffel gamma(d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) gamma(k, i, j) = raised(k, i * d + j);
  // Symmetrize to remove solve roundoff.
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        double s = 0.5 * (gamma(k, i, j) + gamma(k, j, i));
        gamma(k, i, j) = s;
        gamma(k, j, i) = s;
      }
  return gamma;
}

bool is_positive_definite(const Mat& a) {
  if (!a.allFinite()) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return false;
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  return hi > 0.0 && lo > 1e-12 * hi;
}

MetricField::MetricField(ChartManifold manifold, MatrixFn eval, std::string name)
    : manifold_(std::move(manifold)), name_(std::move(name)), eval_(std::move(eval)) {}

MetricField& MetricField::set_time_derivative(MatrixFn dt) {
  dt_ = std::move(dt);
  return *this;
}

MetricField& MetricField::set_space_derivatives(MatrixListFn dq) {
  dq_ = std::move(dq);
  return *this;
}

MetricField& MetricField::set_closed_form_distance(DistanceFn distance) {
  distance_ = std::move(distance);
  return *this;
}

MetricField& MetricField::set_static() {
  static_ = true;
  return *this;
}

DerivativeMode MetricField::time_mode() const {
  return (dt_ || static_) ? DerivativeMode::Analytic : DerivativeMode::FiniteDifference;
}

DerivativeMode MetricField::space_mode() const {
  return dq_ ? DerivativeMode::Analytic : DerivativeMode::FiniteDifference;
}

double MetricField::closed_form_distance(double t, const Vec& p, const Vec& q) const {
  if (!distance_) throw Error("metric '" + name_ + "' has no closed-form distance");
  return distance_(t, p, q);
}

Mat MetricField::operator()(double t, const Vec& q) const { return eval_(t, q); }

Mat MetricField::checked(double t, const Vec& q) const {
  Mat a = eval_(t, q);
  if (!is_positive_definite(a))
    throw EvaluationError("metric '" + name_ + "' is not positive definite at t=" +
                          std::to_string(t) + ", q=" + format_point(q));
  return a;
}

Mat MetricField::dt(double t, const Vec& q) const {
  if (static_) return Mat::Zero(dimension(), dimension());
  if (dt_) return dt_(t, q);
  return central_difference_time(eval_, t, q, time_step(t));
}

std::vector<Mat> MetricField::dq(double t, const Vec& q) const {
  if (dq_) return dq_(t, q);
  return central_difference_space(eval_, t, q);
}

Christoffel MetricField::christoffel(double t, const Vec& q) const {
  Mat a = eval_(t, q);
  std::vector<Mat> da = dq(t, q);
  try {
    return christoffel_from_derivatives(a, da);
  } catch (const EvaluationError&) {
    throw EvaluationError("metric '" + name_ + "' is singular at t=" + std::to_string(t) +
                          ", q=" + format_point(q));
  }
}

Vec MetricField::geodesic_acceleration(double t, const Vec& q, const Vec& v) const {
  const int d = dimension();
  Mat a = eval_(t, q);
  std::vector<Mat> da = dq(t, q);
  // Lowered: (sum_i v^i d_i a) v - 1/2 (v^T d_l a v).
  Mat directional = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    if (v[i] != 0.0) directional += v[i] * da[i];
  Vec lowered = directional * v;
  for (int l = 0; l < d; ++l) lowered[l] -= 0.5 * v.dot(da[l] * v);
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success)
    throw EvaluationError("metric '" + name_ + "' is singular or indefinite at t=" +
                          std::to_string(t) + ", q=" + format_point(q));
  return llt.solve(lowered);
}

Mat central_difference_time(const MatrixFn& f, double t, const Vec& q, double h) {
  return (f(t + h, q) - f(t - h, q)) / (2.0 * h);
}

std::vector<Mat> central_difference_space(const MatrixFn& f, double t, const Vec& q) {
  std::vector<Mat> out;
  out.reserve(q.size());
  Vec x = q;
  for (Eigen::Index k = 0; k < q.size(); ++k) {
    double h = space_step(q[k]);
    x[k] = q[k] + h;
    Mat plus = f(t, x);
    x[k] = q[k] - h;
    Mat minus = f(t, x);
    x[k] = q[k];
    out.push_back((plus - minus) / (2.0 * h));
  }
  return out;
}

double metric_norm(const MetricField& m, const TangentState& s) {
  if (!s.v.allFinite()) throw EvaluationError("non-finite velocity at q=" + format_point(s.q));
  Mat a = m.checked(s.t, s.q);
  double sq = s.v.dot(a * s.v);
  return std::sqrt(std::max(sq, 0.0));
}

double dt_metric_quadratic_form(const MetricField& m, const TangentState& s) {
  return s.v.dot(m.dt(s.t, s.q) * s.v);
}

double covector_norm(const MetricField& m, double t, const Vec& q, const Vec& w) {
  Mat a = m.checked(t, q);
  Vec raised = a.llt().solve(w);
  return std::sqrt(std::max(w.dot(raised), 0.0));
}

}  // namespace cflow
