#include "cflow/geodesy.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "cflow/ode.hpp"

namespace cflow {

namespace {

class ChartGuard : public OdeObserver {
 public:
  explicit ChartGuard(const ChartManifold& manifold, int d) : manifold_(manifold), d_(d) {}
  bool valid(double, const Vec& y) override {
    if (manifold_.kind() != ChartKind::Sphere) return true;
    return manifold_.contains(y.head(d_));
  }
  bool accepted(double, Vec&, double) override { return true; }

 private:
  const ChartManifold& manifold_;
  int d_;
};

// Geodesic endpoint without torus wrapping.
Vec geodesic_endpoint(const MetricField& m, double t, const Vec& p, const Vec& w, double tol) {
  const int d = m.dimension();
  if (w.isZero(0.0)) return p;
  OdeRhs rhs = [&m, t, d](double, const Vec& y, Vec& dy) {
    Vec q = y.head(d);
    Vec v = y.tail(d);
    dy.head(d) = v;
    dy.tail(d) = -m.geodesic_acceleration(t, q, v);
  };
  Vec y0(2 * d);
  y0 << p, w;
  StepControl control;
  control.rtol = tol;
  control.atol = tol;
  ChartGuard guard(m.manifold(), d);
  OdeResult r = integrate_dopri5(rhs, 0.0, y0, 1.0, control, guard);
  if (r.outcome == OdeOutcome::InvalidRegion)
    throw ChartExitError("geodesic from " + format_point(p) + " left the chart at parameter " +
                             std::to_string(r.t),
                         r.t);
  if (r.outcome != OdeOutcome::ReachedEnd)
    throw EvaluationError("geodesic integration from " + format_point(p) +
                          " stalled at parameter " + std::to_string(r.t));
  return r.y.head(d);
}

Vec endpoint_residual(const ChartManifold& manifold, const Vec& x, const Vec& target) {
  Vec r = x - target;
  if (manifold.kind() == ChartKind::Sphere) r[1] = std::remainder(r[1], 2.0 * M_PI);
  return r;
}

struct ShotResult {
  bool converged = false;
  bool duplicate = false;
  Vec w;
  double residual = std::numeric_limits<double>::infinity();
  /// Jacobian estimate at the last iterate.
  Mat jacobian;
};

// Newton with forward-difference Jacobian, Broyden updates between
// refreshes, backtracking and a trust radius on the step.
ShotResult newton_shoot(const MetricField& m, double t, const Vec& p, const Vec& target,
                        Vec w, const DistanceOptions& opt, const std::vector<Vec>& known,
                        const Mat* seed_jacobian = nullptr) {
  const int d = m.dimension();
  const ChartManifold& manifold = m.manifold();
  ShotResult best;
  auto residual_at = [&](const Vec& ww, Vec& r) {
    try {
      r = endpoint_residual(manifold, geodesic_endpoint(m, t, p, ww, opt.ivp_tolerance), target);
      return r.allFinite();
    } catch (const Error&) {
      return false;
    }
  };
  auto fd_jacobian = [&](const Vec& ww, const Vec& r, Mat& jac) {
    double h = 1e-7 * std::max(1.0, ww.lpNorm<Eigen::Infinity>());
    Vec rp;
    for (int j = 0; j < d; ++j) {
      Vec wp = ww;
      wp[j] += h;
      if (!residual_at(wp, rp)) return false;
      jac.col(j) = (rp - r) / h;
    }
    return true;
  };

  const double trust = std::max(w.norm(), 1.0);
  const double runaway = 10.0 * trust;
  Vec r;
  if (!residual_at(w, r)) return best;
  double rnorm = r.lpNorm<Eigen::Infinity>();
  Mat jac(d, d);
  bool fresh = false;
  std::vector<double> history;
  for (int iter = 0; iter <= opt.max_iterations; ++iter) {
    history.push_back(rnorm);
    // Abandon starts that stall: less than a halving over eight iterations.
    if (iter >= 8 && rnorm > 0.5 * history[iter - 8]) break;
    if (rnorm < best.residual) {
      best.residual = rnorm;
      best.w = w;
    }
    if (rnorm <= opt.newton_tolerance) {
      best.converged = true;
      best.jacobian = jac;
      return best;
    }
    if (iter == opt.max_iterations) break;
    for (const Vec& k : known) {
      if ((w - k).lpNorm<Eigen::Infinity>() < 1e-4 * std::max(1.0, k.norm()) && rnorm < 1e-4) {
        best.duplicate = true;
        return best;
      }
    }
    if (iter == 0) {
      if (seed_jacobian != nullptr) {
        jac = *seed_jacobian;
      } else {
        if (!fd_jacobian(w, r, jac)) return best;
        fresh = true;
      }
    }

    bool improved = false;
    Vec wn, rn;
    for (int attempt = 0; attempt < 2 && !improved; ++attempt) {
      Vec delta = jac.colPivHouseholderQr().solve(-r);
      if (!delta.allFinite()) delta.setZero();
      double len = delta.norm();
      if (len > trust) delta *= trust / len;
      double lambda = 1.0;
      for (int k = 0; k < 10 && len > 0.0; ++k, lambda *= 0.5) {
        wn = w + lambda * delta;
        if (residual_at(wn, rn) && rn.lpNorm<Eigen::Infinity>() < rnorm) {
          improved = true;
          break;
        }
      }
      if (!improved) {
        if (fresh || !fd_jacobian(w, r, jac)) return best;
        fresh = true;
      }
    }
    if (!improved) return best;

    Vec dw = wn - w;
    Vec dr = rn - r;
    jac += ((dr - jac * dw) * dw.transpose()) / dw.squaredNorm();
    fresh = false;
    w = wn;
    r = rn;
    rnorm = r.lpNorm<Eigen::Infinity>();
    if (w.norm() > runaway) return best;
  }
  return best;
}

// Shoots along targets p + s (end - p) for increasing s, each solve warm
// started from the previous one scaled up, finishing at the actual target.
ShotResult continuation_shoot(const MetricField& m, double t, const Vec& p, const Vec& end,
                              const Vec& target, const DistanceOptions& opt,
                              const std::vector<Vec>& known) {
  constexpr int kStages = 4;
  Vec w = (end - p) / kStages;
  const std::vector<Vec> none;
  for (int k = 1; k < kStages; ++k) {
    const double s = static_cast<double>(k) / kStages;
    ShotResult partial = newton_shoot(m, t, p, p + s * (end - p), w, opt, none);
    if (!partial.converged) return newton_shoot(m, t, p, target, end - p, opt, known);
    w = partial.w * (k + 1.0) / k;
  }
  return newton_shoot(m, t, p, target, w, opt, known);
}

// Shooting target in the chart: the nearest representative on the sphere,
// and on the torus the lattice translate of least a_t(p)-length.
Vec shooting_target(const ChartManifold& manifold, const Mat& a, const Vec& p, const Vec& q) {
  if (manifold.kind() == ChartKind::Euclidean) return q;
  Vec nearest = p + manifold.difference(p, q);
  if (manifold.kind() == ChartKind::Sphere) return nearest;
  const int d = manifold.dimension();
  int total = 1;
  for (int i = 0; i < d; ++i) total *= 3;
  Vec best = nearest;
  double best_len = std::numeric_limits<double>::infinity();
  for (int code = 0; code < total; ++code) {
    Vec x = nearest;
    int c = code;
    for (int i = 0; i < d; ++i) {
      x[i] += (c % 3 - 1) * manifold.periods()[i];
      c /= 3;
    }
    Vec diff = x - p;
    double len = diff.dot(a * diff);
    if (len < best_len) {
      best_len = len;
      best = x;
    }
  }
  return best;
}

}  // namespace

Vec exp_map(const MetricField& m, double t, const Vec& p, const Vec& w,
            const ExpMapOptions& options) {
  if (!m.manifold().contains(p)) throw ChartExitError("basepoint outside the chart", 0.0);
  return m.manifold().canonicalize(geodesic_endpoint(m, t, p, w, options.tolerance));
}

DistanceResult distance(const MetricField& m, double t, const Vec& p, const Vec& q,
                        const DistanceOptions& options) {
  const ChartManifold& manifold = m.manifold();
  if (!manifold.contains(p) || !manifold.contains(q))
    throw ChartExitError("distance endpoints must lie in the chart: p=" + format_point(p) +
                             ", q=" + format_point(q),
                         0.0);
  const int d = m.dimension();
  Mat a = m.checked(t, p);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  DistanceResult out;
  out.value = std::numeric_limits<double>::infinity();
  out.residual = std::numeric_limits<double>::infinity();
  double best_failed = std::numeric_limits<double>::infinity();
  Vec best_failed_w;

  const Vec target = shooting_target(manifold, a, p, q);
  const Vec w0 = target - p;
  const double sigma = 0.2 * std::max(w0.norm(), 0.1);
  std::vector<Vec> starts{w0};
  // On the sphere a minimizing arc near a pole may wind the other way in phi.
  if (manifold.kind() == ChartKind::Sphere && std::abs(w0[1]) > M_PI / 2.0) {
    Vec other = w0;
    other[1] -= std::copysign(2.0 * M_PI, w0[1]);
    starts.push_back(other);
  }
  for (int s = 0; s < options.perturbations; ++s) {
    Vec start = w0;
    for (int i = 0; i < d; ++i) start[i] += sigma * normal(rng);
    starts.push_back(start);
  }
  std::vector<Vec> known;
  Mat seed_jacobian;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    ShotResult shot;
    if (s < starts.size() - options.perturbations)
      shot = continuation_shoot(m, t, p, p + starts[s], target, options, known);
    else
      shot = newton_shoot(m, t, p, target, starts[s], options, known,
                          seed_jacobian.size() > 0 ? &seed_jacobian : nullptr);
    if (shot.duplicate) {
      ++out.converged_starts;
      continue;
    }
    if (shot.converged) {
      double len = std::sqrt(std::max(shot.w.dot(a * shot.w), 0.0));
      ++out.converged_starts;
      known.push_back(shot.w);
      if (seed_jacobian.size() == 0) seed_jacobian = shot.jacobian;
      if (!out.converged || len < out.value) {
        out.value = len;
        out.initial_velocity = shot.w;
        out.residual = shot.residual;
      }
      out.converged = true;
    } else if (shot.w.size() == d && shot.residual < best_failed) {
      best_failed = shot.residual;
      best_failed_w = shot.w;
    }
  }
  if (!out.converged) {
    out.residual = best_failed;
    out.initial_velocity = best_failed_w;
    out.value = best_failed_w.size() == d
                    ? std::sqrt(std::max(best_failed_w.dot(a * best_failed_w), 0.0))
                    : std::numeric_limits<double>::quiet_NaN();
  }
  if (m.has_closed_form_distance()) out.closed_form = m.closed_form_distance(t, p, q);
  return out;
}

double rho(const MetricField& m, double t, const Vec& p, const Vec& q,
           const DistanceOptions& options) {
  if (m.has_closed_form_distance()) return m.closed_form_distance(t, p, q);
  DistanceResult r = distance(m, t, p, q, options);
  if (!r.converged)
    throw DistanceError("distance did not converge at t=" + std::to_string(t) +
                        ", q=" + format_point(q) + " (residual " + std::to_string(r.residual) +
                        ")");
  return r.value;
}

double proper_R(const MetricField& m, const Vec& basepoint, double t, const Vec& q) {
  return 1.0 + rho(m, t, basepoint, q);
}

double proper_E(const MetricField& m, const Vec& basepoint, const TangentState& s) {
  double r = rho(m, s.t, basepoint, s.q);
  double n = metric_norm(m, s);
  return 1.0 + r * r + n * n;
}

}  // namespace cflow
