#include "cflow/eisenhart.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "cflow/ode.hpp"

namespace cflow {

LiftedMetric::LiftedMetric(const LagrangianSystem& base) : base_(&base) {}

Mat LiftedMetric::operator()(const Vec& x) const {
  const int d = base_->dimension();
  const double t = x[0];
  const Vec q = x.segment(1, d);
  Mat g = Mat::Zero(d + 2, d + 2);
  g(0, 0) = -2.0 * base_->V(t, q);
  Vec b = base_->b(t, q);
  g.block(0, 1, 1, d) = b.transpose();
  g.block(1, 0, d, 1) = b;
  g(0, d + 1) = g(d + 1, 0) = -1.0;
  g.block(1, 1, d, d) = base_->metric()(t, q);
  return g;
}

std::vector<Mat> LiftedMetric::derivatives(const Vec& x) const {
  const int d = base_->dimension();
  const double t = x[0];
  const Vec q = x.segment(1, d);
  std::vector<Mat> out(d + 2, Mat::Zero(d + 2, d + 2));

  Mat& gt = out[0];
  gt(0, 0) = -2.0 * base_->dt_V(t, q);
  Vec dtb = base_->dt_b(t, q);
  gt.block(0, 1, 1, d) = dtb.transpose();
  gt.block(1, 0, d, 1) = dtb;
  gt.block(1, 1, d, d) = base_->metric().dt(t, q);

  Mat J = base_->b_jacobian(t, q);
  Vec grad = base_->grad_V(t, q);
  std::vector<Mat> da = base_->metric().dq(t, q);
  for (int k = 0; k < d; ++k) {
    Mat& gk = out[1 + k];
    gk(0, 0) = -2.0 * grad[k];
    gk.block(0, 1, 1, d) = J.row(k);
    gk.block(1, 0, d, 1) = J.row(k).transpose();
    gk.block(1, 1, d, d) = da[k];
  }
  return out;
}

Christoffel LiftedMetric::christoffel(const Vec& x) const {
  std::vector<Mat> dg = derivatives(x);
  return christoffel_from_derivatives((*this)(x), dg);
}

bool LiftedMetric::lorentzian(const Vec& x) const {
  Eigen::SelfAdjointEigenSolver<Mat> es((*this)(x), Eigen::EigenvaluesOnly);
  const Vec& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  int negative = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= 1e-12 * scale) return false;
    negative += ev[i] < 0.0;
  }
  return negative == 1;
}

LiftedMetric lift_metric(const LagrangianSystem& sys, const Vec& basepoint) {
  LiftedMetric lm(sys);
  Vec x = Vec::Zero(lm.dimension());
  x.segment(1, sys.dimension()) = basepoint;
  if (!lm.lorentzian(x))
    throw EvaluationError("lifted metric is not Lorentzian at (t, q, y) = " + format_point(x));
  return lm;
}

namespace {

void fill_invariants(const LiftedMetric& lm, LiftState& s) {
  Mat g = lm(s.x);
  s.g_uu = s.u.dot(g * s.u);
  s.g_nu = g.row(lm.dimension() - 1).dot(s.u);
  s.accel = -lm.christoffel(s.x).contract(s.u);
}

class LiftObserver : public OdeObserver {
 public:
  LiftObserver(const LiftedMetric& lm, LiftRun& run) : lm_(lm), run_(run) {}
  bool valid(double, const Vec& y) override {
    const int D = lm_.dimension();
    Vec q = y.segment(1, D - 2);
    return lm_.base().metric().manifold().contains(q);
  }
  bool accepted(double lambda, Vec& y, double) override {
    const int D = lm_.dimension();
    LiftState s;
    s.lambda = lambda;
    s.x = y.head(D);
    s.u = y.tail(D);
    fill_invariants(lm_, s);
    run_.g_uu_drift = std::max(run_.g_uu_drift, std::abs(s.g_uu - run_.states.front().g_uu));
    run_.g_nu_drift = std::max(run_.g_nu_drift, std::abs(s.g_nu - run_.states.front().g_nu));
    run_.states.push_back(std::move(s));
    return true;
  }

 private:
  const LiftedMetric& lm_;
  LiftRun& run_;
};

}  // namespace

LiftState lift_initial_state(const LiftedMetric& lm, double t0, const Vec& q0, const Vec& v0,
                             double u_t, double y0, double g_uu) {
  const LagrangianSystem& sys = lm.base();
  const int d = sys.dimension();
  if (q0.size() != d || v0.size() != d) throw ConfigError("initial", "dimension mismatch");
  if (!(std::abs(u_t) > 0.0) || !std::isfinite(u_t))
    throw NonGraphError("dt/dlambda must be nonzero for the projection to be a graph over t");
  Vec v = u_t * v0;  // dq/dlambda
  Mat a = sys.metric().checked(t0, q0);
  double u_y = (v.dot(a * v) + 2.0 * sys.b(t0, q0).dot(v) * u_t -
                2.0 * sys.V(t0, q0) * u_t * u_t - g_uu) /
               (2.0 * u_t);
  LiftState s;
  s.x.resize(d + 2);
  s.x << t0, q0, y0;
  s.u.resize(d + 2);
  s.u << u_t, v, u_y;
  fill_invariants(lm, s);
  return s;
}

LiftRun lift_geodesic(const LiftedMetric& lm, const LiftState& initial, double lambda_end,
                      double tolerance) {
  if (!(lambda_end > initial.lambda)) throw ConfigError("lift.horizon", "must be positive");
  if (!(std::abs(initial.u[0]) > 0.0))
    throw NonGraphError("dt/dlambda vanishes in the initial lift data");
  const int D = lm.dimension();
  LiftRun run;
  run.states.push_back(initial);
  LiftObserver observer(lm, run);
  OdeRhs rhs = [&lm, D](double, const Vec& y, Vec& dy) {
    if (!y.allFinite()) {
      dy.setConstant(std::numeric_limits<double>::quiet_NaN());
      return;
    }
    Vec x = y.head(D);
    Vec u = y.tail(D);
    dy.head(D) = u;
    dy.tail(D) = -lm.christoffel(x).contract(u);
  };
  Vec y0(2 * D);
  y0 << initial.x, initial.u;
  StepControl control;
  control.rtol = tolerance;
  control.atol = tolerance;
  control.max_step = (lambda_end - initial.lambda) / 1000.0;
  OdeResult r = integrate_dopri5(rhs, initial.lambda, y0, lambda_end, control, observer);
  switch (r.outcome) {
    case OdeOutcome::ReachedEnd: run.status = FlowStatus::ReachedHorizon; break;
    case OdeOutcome::InvalidRegion: run.status = FlowStatus::LeftChart; break;
    default: run.status = FlowStatus::StepCollapse; break;
  }
  return run;
}

namespace {

// Cubic Hermite on [0, h] with s in [0, 1].
Vec hermite(const Vec& y0, const Vec& d0, const Vec& y1, const Vec& d1, double h, double s) {
  double s2 = s * s, s3 = s2 * s;
  double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
}

}  // namespace

ProjectionReport project_and_compare(const LiftRun& run, const Trajectory& el, double tolerance,
                                     const ChartManifold* chart) {
  ProjectionReport rep;
  const auto& st = run.states;
  if (st.empty()) throw Error("empty lift run");
  const int D = static_cast<int>(st.front().x.size());
  const int d = D - 2;
  for (const LiftState& s : st)
    if (!(s.u[0] > 0.0))
      throw NonGraphError("dt/dlambda = " + std::to_string(s.u[0]) + " at lambda = " +
                          std::to_string(s.lambda) + "; projection is not a graph over t");

  std::size_t k = 0;
  for (const TangentState& target : el.samples) {
    const double t = target.t;
    if (t < st.front().x[0] || t > st.back().x[0]) continue;
    while (k + 1 < st.size() && st[k + 1].x[0] < t) ++k;
    if (k + 1 >= st.size()) {
      if (t != st.back().x[0]) continue;
      k = st.size() - 2;
    }
    const LiftState& a = st[k];
    const LiftState& b = st[k + 1];
    const double h = b.lambda - a.lambda;
    // Invert t(lambda) on the step by Newton from the linear guess.
    double s = (t - a.x[0]) / (b.x[0] - a.x[0]);
    for (int it = 0; it < 20; ++it) {
      Vec x = hermite(a.x, a.u, b.x, b.u, h, s);
      Vec u = hermite(a.u, a.accel, b.u, b.accel, h, s);
      double step = (x[0] - t) / (u[0] * h);
      s -= step;
      if (std::abs(step) < 1e-15) break;
    }
    Vec x = hermite(a.x, a.u, b.x, b.u, h, s);
    Vec u = hermite(a.u, a.accel, b.u, b.accel, h, s);
    Vec q = x.segment(1, d);
    Vec v = u.segment(1, d) / u[0];
    Vec dq = chart ? chart->difference(target.q, q) : Vec(q - target.q);
    double dev = std::max(dq.lpNorm<Eigen::Infinity>(),
                          (v - target.v).lpNorm<Eigen::Infinity>());
    if (dev > rep.max_deviation) {
      rep.max_deviation = dev;
      rep.worst_time = t;
    }
    ++rep.compared;
  }
  rep.matched = rep.compared > 0 && rep.max_deviation <= tolerance;
  return rep;
}

ConstancyReport check_null_constancy(const LiftedMetric& lm, const SamplerSpec& sampler,
                                     Interval y_range) {
  ConstancyReport rep;
  rep.threshold = lm.base().analytic() ? 1e-8 : 1e-5;
  const int D = lm.dimension();
  std::vector<TangentState> samples = draw_samples(sampler, false);
  std::mt19937_64 rng(sampler.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const TangentState& s : samples) {
    if (!lm.base().metric().manifold().contains(s.q)) continue;
    Vec x(D);
    x << s.t, s.q, y_range.lo + (y_range.hi - y_range.lo) * unit(rng);
    Christoffel gamma = lm.christoffel(x);
    for (int nu = 0; nu < D; ++nu)
      for (int mu = 0; mu < D; ++mu)
        rep.max_entry = std::max(rep.max_entry, std::abs(gamma(nu, mu, D - 1)));
    ++rep.samples;
  }
  rep.pass = rep.max_entry <= rep.threshold;
  return rep;
}

}  // namespace cflow
