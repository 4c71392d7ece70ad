#include "cflow/ode.hpp"

#include <algorithm>
#include <cmath>

namespace cflow {

namespace {

// Dormand & Prince (1980), RK5(4)7M.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

double scaled_rms(const Vec& x, const Vec& y, const StepControl& c) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double w = c.atol + c.rtol * std::abs(y[i]);
    s += (x[i] / w) * (x[i] / w);
  }
  return std::sqrt(s / std::max<Eigen::Index>(1, x.size()));
}

// Hairer, Norsett & Wanner, starting step selection.
double starting_step(const OdeRhs& rhs, double t0, const Vec& y0, const Vec& f0,
                     const StepControl& c) {
  double d0 = scaled_rms(y0, y0, c);
  double d1 = scaled_rms(f0, y0, c);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  Vec y1 = y0 + h0 * f0;
  Vec f1(y0.size());
  rhs(t0 + h0, y1, f1);
  double d2 = f1.allFinite() ? scaled_rms(f1 - f0, y0, c) / h0 : 1e300;
  double dm = std::max(d1, d2);
  double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
  return std::min(100.0 * h0, h1);
}

}  // namespace

double OdeObserver::min_step(double t) { return 1e-13 * std::max(1.0, std::abs(t)); }

OdeResult integrate_dopri5(const OdeRhs& rhs, double t0, Vec y0, double t_end,
                           const StepControl& control, OdeObserver& observer) {
  if (!(t_end > t0)) throw Error("integrate_dopri5: t_end must exceed t0");
  const Eigen::Index n = y0.size();
  OdeResult result;
  double t = t0;
  Vec y = std::move(y0);
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), ynew(n), err(n);

  rhs(t, y, k1);
  if (!k1.allFinite()) throw EvaluationError("non-finite derivative at the initial state");

  double h = control.initial_step > 0.0 ? control.initial_step
                                        : starting_step(rhs, t, y, k1, control);
  h = std::min(h, control.max_step);

  auto finish = [&](OdeOutcome outcome) {
    result.outcome = outcome;
    result.t = t;
    result.y = y;
    result.last_step = h;
    return result;
  };

  for (;;) {
    double remaining = t_end - t;
    if (remaining <= 1e-15 * std::max(1.0, std::abs(t_end))) return finish(OdeOutcome::ReachedEnd);
    if (result.accepted >= control.max_steps) return finish(OdeOutcome::StepLimit);

    h = std::min(h, control.max_step);
    bool last = false;
    if (h >= remaining * (1.0 - 1e-12)) {
      h = remaining;
      last = true;
    }
    if (h < observer.min_step(t) && !last) {
      return finish(result.left_region ? OdeOutcome::InvalidRegion : OdeOutcome::StepCollapse);
    }

    tmp = y + h * a21 * k1;
    rhs(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    double t_new = last ? t_end : t + h;
    rhs(t_new, ynew, k7);

    if (!ynew.allFinite() || !k7.allFinite()) {
      ++result.rejected;
      h *= 0.25;
      continue;
    }
    if (!observer.valid(t_new, ynew)) {
      ++result.rejected;
      result.left_region = true;
      h *= 0.5;
      continue;
    }

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double e = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double scale = control.atol + control.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      e = std::max(e, std::abs(err[i]) / scale);
    }
    if (!std::isfinite(e)) {
      ++result.rejected;
      h *= 0.25;
      continue;
    }

    if (e <= 1.0) {
      ++result.accepted;
      result.smallest_step = std::min(result.smallest_step, h);
      result.left_region = false;
      t = t_new;
      y = ynew;
      k1 = k7;
      double step = h;
      if (!observer.accepted(t, y, step)) return finish(OdeOutcome::Stopped);
      double factor = e == 0.0 ? kMaxFactor
                               : std::clamp(kSafety * std::pow(e, -0.2), kMinFactor, kMaxFactor);
      h = step * factor;
    } else {
      ++result.rejected;
      h *= std::max(kMinFactor, kSafety * std::pow(e, -0.2));
    }
  }
}

}  // namespace cflow
