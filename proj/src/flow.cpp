#include "cflow/flow.hpp"

#include <cmath>
#include <deque>

#include "cflow/geodesy.hpp"
#include "cflow/ode.hpp"

namespace cflow {

std::string to_string(FlowStatus status) {
  switch (status) {
    case FlowStatus::ReachedHorizon: return "ReachedHorizon";
    case FlowStatus::BlowUp: return "BlowUp";
    case FlowStatus::LeftChart: return "LeftChart";
    case FlowStatus::StepCollapse: return "StepCollapse";
  }
  return "unknown";
}

std::string to_string(Direction direction) {
  return direction == Direction::Forward ? "forward" : "backward";
}

Vec raise_two_form(const MetricField& m, double t, const Vec& q, const Mat& F, const Vec& v) {
  Eigen::LLT<Mat> llt(m.checked(t, q));
  return llt.solve(F * v);
}

bool blowup_criterion(double t, double step, std::span<const double> recent_energy) {
  if (!(step < 1e-13 * std::max(1.0, std::abs(t)))) return false;
  if (recent_energy.empty()) return false;
  const double last = recent_energy.back();
  if (last > 1e12) return true;
  const std::size_t n = recent_energy.size();
  const double reference = recent_energy[n > 11 ? n - 11 : 0];
  return n > 1 && last >= 2.0 * reference;
}

namespace {

constexpr std::size_t kEnergyWindow = 11;

// Integration runs in s with t = sign * s, so backward runs become forward
// ones (time reflection). Samples are stored in the original orientation.
class FlowObserver : public OdeObserver {
 public:
  FlowObserver(const MetricField& m, const DomainFn& domain, Vec basepoint, double sign,
               bool second_order, const FieldFn* first_order_field, Trajectory& out)
      : m_(m),
        domain_(domain),
        basepoint_(std::move(basepoint)),
        sign_(sign),
        second_order_(second_order),
        nu_(first_order_field),
        out_(out),
        d_(m.dimension()) {}

  bool valid(double s, const Vec& y) override {
    Vec q = y.head(d_);
    if (!m_.manifold().contains(q)) return false;
    return !domain_ || domain_(sign_ * s, q);
  }

  bool accepted(double s, Vec& y, double step) override {
    if (m_.manifold().kind() == ChartKind::FlatTorus)
      y.head(d_) = m_.manifold().canonicalize(y.head(d_));
    out_.stats.min_step = std::min(out_.stats.min_step, step);
    record(s, y);
    return true;
  }

  void record(double s, const Vec& y) {
    TangentState st;
    st.t = sign_ * s;
    st.q = y.head(d_);
    st.v = second_order_ ? Vec(sign_ * y.tail(d_)) : (*nu_)(st.t, st.q);
    double e = proper_E(m_, basepoint_, st);
    out_.samples.push_back(std::move(st));
    out_.energy.push_back(e);
    out_.stats.max_energy = std::max(out_.stats.max_energy, e);
    recent_.push_back(e);
    if (recent_.size() > kEnergyWindow) recent_.pop_front();
  }

  std::vector<double> recent() const { return {recent_.begin(), recent_.end()}; }

 private:
  const MetricField& m_;
  const DomainFn& domain_;
  Vec basepoint_;
  double sign_;
  bool second_order_;
  const FieldFn* nu_;
  Trajectory& out_;
  int d_;
  std::deque<double> recent_;
};

Vec resolve_basepoint(const MetricField& m, const FlowOptions& options) {
  Vec p = options.basepoint.size() > 0 ? options.basepoint : m.manifold().default_point();
  if (p.size() != m.dimension()) throw ConfigError("basepoint", "dimension mismatch");
  if (!m.manifold().contains(p))
    throw ConfigError("basepoint", "outside the chart: " + format_point(p));
  return p;
}

StepControl step_control(const FlowOptions& options, double horizon) {
  StepControl c;
  c.rtol = options.tolerance;
  c.atol = options.tolerance;
  c.max_step = options.max_step > 0.0 ? options.max_step : horizon / 1000.0;
  c.max_steps = options.max_steps;
  return c;
}

void finish(const OdeResult& r, FlowObserver& observer, double sign, Trajectory& out) {
  out.stats.accepted = r.accepted;
  out.stats.rejected = r.rejected;
  out.stats.final_step = r.last_step;
  out.terminal_time = sign * r.t;
  switch (r.outcome) {
    case OdeOutcome::ReachedEnd:
      out.status = FlowStatus::ReachedHorizon;
      break;
    case OdeOutcome::InvalidRegion:
      out.status = FlowStatus::LeftChart;
      break;
    case OdeOutcome::StepCollapse: {
      std::vector<double> recent = observer.recent();
      out.status = blowup_criterion(r.t, r.last_step, recent) ? FlowStatus::BlowUp
                                                              : FlowStatus::StepCollapse;
      break;
    }
    case OdeOutcome::Stopped:
    case OdeOutcome::StepLimit:
      out.status = FlowStatus::StepCollapse;
      break;
  }
}

void check_start(const MetricField& m, const DomainFn& domain, double t0, const Vec& q0,
                 double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ConfigError("horizon", "must be positive and finite");
  if (q0.size() != m.dimension()) throw ConfigError("initial.q0", "dimension mismatch");
  if (!q0.allFinite() || !m.manifold().contains(q0) || (domain && !domain(t0, q0)))
    throw ChartExitError("initial point " + format_point(q0) + " is outside the valid region",
                         t0);
}

}  // namespace

Trajectory integrate_first_order(const MetricField& m, const VectorField& nu, double t0,
                                 const Vec& q0, double horizon, Direction direction,
                                 const FlowOptions& options) {
  check_start(m, nu.domain, t0, q0, horizon);
  const double sign = direction == Direction::Forward ? 1.0 : -1.0;
  Trajectory out;
  out.direction = direction;
  Vec start = m.manifold().canonicalize(q0);
  FlowObserver observer(m, nu.domain, resolve_basepoint(m, options), sign, false, &nu.eval, out);
  observer.record(sign * t0, start);

  const FieldFn& field = nu.eval;
  OdeRhs rhs = [&field, sign](double s, const Vec& y, Vec& dy) {
    if (!y.allFinite()) {
      dy.setConstant(std::numeric_limits<double>::quiet_NaN());
      return;
    }
    dy = sign * field(sign * s, y);
  };
  OdeResult r = integrate_dopri5(rhs, sign * t0, start, sign * t0 + horizon,
                                 step_control(options, horizon), observer);
  finish(r, observer, sign, out);
  return out;
}

Trajectory integrate_second_order(const MetricField& m, const ForceField& f, double t0,
                                  const Vec& q0, const Vec& v0, double horizon,
                                  Direction direction, const FlowOptions& options) {
  check_start(m, f.domain, t0, q0, horizon);
  if (v0.size() != m.dimension()) throw ConfigError("initial.v0", "dimension mismatch");
  if (!v0.allFinite()) throw ConfigError("initial.v0", "non-finite velocity");
  const double sign = direction == Direction::Forward ? 1.0 : -1.0;
  const int d = m.dimension();
  Trajectory out;
  out.direction = direction;
  Vec y0(2 * d);
  y0 << m.manifold().canonicalize(q0), sign * v0;
  FlowObserver observer(m, f.domain, resolve_basepoint(m, options), sign, true, nullptr, out);
  observer.record(sign * t0, y0);

  OdeRhs rhs = [&m, &f, sign, d](double s, const Vec& y, Vec& dy) {
    // Overflowed trial stages become rejections instead of metric errors.
    if (!y.allFinite()) {
      dy.setConstant(std::numeric_limits<double>::quiet_NaN());
      return;
    }
    const double t = sign * s;
    Vec q = y.head(d);
    Vec v = y.tail(d);
    dy.head(d) = v;
    Vec force = f.total(t, q, Vec(sign * v));
    dy.tail(d) = force - m.geodesic_acceleration(t, q, v);
  };
  OdeResult r = integrate_dopri5(rhs, sign * t0, y0, sign * t0 + horizon,
                                 step_control(options, horizon), observer);
  finish(r, observer, sign, out);
  return out;
}

}  // namespace cflow
