#include "cflow/mechanics.hpp"

#include <cmath>

#include "cflow/expression.hpp"
#include "cflow/geodesy.hpp"

namespace cflow {

LagrangianSystem::LagrangianSystem(MetricField metric, CovectorFn b, ScalarFn V)
    : metric_(std::move(metric)), b_(std::move(b)), V_(std::move(V)) {}

LagrangianSystem& LagrangianSystem::set_b_jacobian(MatrixFn jacobian) {
  b_jacobian_ = std::move(jacobian);
  return *this;
}
LagrangianSystem& LagrangianSystem::set_b_time_derivative(CovectorFn dt_b) {
  dt_b_ = std::move(dt_b);
  return *this;
}
LagrangianSystem& LagrangianSystem::set_potential_gradient(CovectorFn gradient) {
  grad_V_ = std::move(gradient);
  return *this;
}
LagrangianSystem& LagrangianSystem::set_potential_time_derivative(ScalarFn dt_V) {
  dt_V_ = std::move(dt_V);
  return *this;
}

bool LagrangianSystem::analytic() const {
  return metric_.time_mode() == DerivativeMode::Analytic &&
         metric_.space_mode() == DerivativeMode::Analytic && b_jacobian_ && dt_b_ && grad_V_ &&
         dt_V_;
}

Mat LagrangianSystem::b_jacobian(double t, const Vec& q) const {
  if (b_jacobian_) return b_jacobian_(t, q);
  const Eigen::Index d = q.size();
  Mat J(d, d);
  Vec x = q;
  for (Eigen::Index i = 0; i < d; ++i) {
    double h = space_step(q[i]);
    x[i] = q[i] + h;
    Vec plus = b_(t, x);
    x[i] = q[i] - h;
    Vec minus = b_(t, x);
    x[i] = q[i];
    J.row(i) = ((plus - minus) / (2.0 * h)).transpose();
  }
  return J;
}

Vec LagrangianSystem::dt_b(double t, const Vec& q) const {
  if (dt_b_) return dt_b_(t, q);
  double h = time_step(t);
  return (b_(t + h, q) - b_(t - h, q)) / (2.0 * h);
}

Vec LagrangianSystem::grad_V(double t, const Vec& q) const {
  if (grad_V_) return grad_V_(t, q);
  Vec g(q.size());
  Vec x = q;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    double h = space_step(q[i]);
    x[i] = q[i] + h;
    double plus = V_(t, x);
    x[i] = q[i] - h;
    double minus = V_(t, x);
    x[i] = q[i];
    g[i] = (plus - minus) / (2.0 * h);
  }
  return g;
}

double LagrangianSystem::dt_V(double t, const Vec& q) const {
  if (dt_V_) return dt_V_(t, q);
  double h = time_step(t);
  return (V_(t + h, q) - V_(t - h, q)) / (2.0 * h);
}

double LagrangianSystem::lagrangian(const TangentState& s) const {
  Mat a = metric_(s.t, s.q);
  return 0.5 * s.v.dot(a * s.v) + b_(s.t, s.q).dot(s.v) - V_(s.t, s.q);
}

namespace {

std::vector<double> pack(double t, const Vec& q) {
  std::vector<double> x(q.size() + 1);
  x[0] = t;
  for (Eigen::Index i = 0; i < q.size(); ++i) x[i + 1] = q[i];
  return x;
}

}  // namespace

LagrangianSystem lagrangian_from_expressions(MetricField metric, const std::vector<std::string>& b,
                                             const std::string& V, bool analytic) {
  const int d = metric.dimension();
  const std::vector<std::string> vars = position_variables(d);
  std::vector<Expression> bx;
  if (b.empty()) {
    bx.assign(d, Expression::constant(0.0, vars));
  } else {
    if (static_cast<int>(b.size()) != d)
      throw ConfigError("lagrangian.b", "expected " + std::to_string(d) + " components");
    for (int i = 0; i < d; ++i) {
      try {
        bx.push_back(Expression::parse(b[i], vars));
      } catch (const ConfigError& e) {
        throw ConfigError("lagrangian.b[" + std::to_string(i) + "]", e.what());
      }
    }
  }
  Expression vx;
  try {
    vx = V.empty() ? Expression::constant(0.0, vars) : Expression::parse(V, vars);
  } catch (const ConfigError& e) {
    throw ConfigError("lagrangian.V", e.what());
  }

  auto b_fn = [bx, d](double t, const Vec& q) {
    std::vector<double> x = pack(t, q);
    Vec out(d);
    for (int i = 0; i < d; ++i) out[i] = bx[i].evaluate(x);
    return out;
  };
  auto v_fn = [vx](double t, const Vec& q) { return vx.evaluate(pack(t, q)); };
  LagrangianSystem sys(std::move(metric), b_fn, v_fn);
  if (!analytic) return sys;

  // Symbolic derivatives: variable 0 is t, variable 1 + i is q^i.
  std::vector<std::vector<Expression>> db(d, std::vector<Expression>(d));
  std::vector<Expression> dtb, grad;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) db[i][j] = bx[j].derivative(1 + i);
    dtb.push_back(bx[i].derivative(0));
    grad.push_back(vx.derivative(1 + i));
  }
  Expression dtv = vx.derivative(0);
  sys.set_b_jacobian([db, d](double t, const Vec& q) {
    std::vector<double> x = pack(t, q);
    Mat J(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) J(i, j) = db[i][j].evaluate(x);
    return J;
  });
  sys.set_b_time_derivative([dtb, d](double t, const Vec& q) {
    std::vector<double> x = pack(t, q);
    Vec out(d);
    for (int i = 0; i < d; ++i) out[i] = dtb[i].evaluate(x);
    return out;
  });
  sys.set_potential_gradient([grad, d](double t, const Vec& q) {
    std::vector<double> x = pack(t, q);
    Vec out(d);
    for (int i = 0; i < d; ++i) out[i] = grad[i].evaluate(x);
    return out;
  });
  sys.set_potential_time_derivative([dtv](double t, const Vec& q) { return dtv.evaluate(pack(t, q)); });
  return sys;
}

Mat two_form(const LagrangianSystem& sys, double t, const Vec& q) {
  Mat J = sys.b_jacobian(t, q);
  return J - J.transpose();
}

Vec el_force(const LagrangianSystem& sys, const TangentState& s) {
  const MetricField& m = sys.metric();
  Mat a = m(s.t, s.q);
  Vec rhs = two_form(sys, s.t, s.q) * s.v - m.dt(s.t, s.q) * s.v - sys.dt_b(s.t, s.q) -
            sys.grad_V(s.t, s.q);
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success)
    throw EvaluationError("metric is not positive definite at t=" + std::to_string(s.t) +
                          ", q=" + format_point(s.q));
  return llt.solve(rhs);
}

ForceField el_force_field(const LagrangianSystem& sys) {
  ForceField f;
  f.total = [&sys](double t, const Vec& q, const Vec& v) { return el_force(sys, {t, q, v}); };
  f.two_form = [&sys](double t, const Vec& q) { return two_form(sys, t, q); };
  return f;
}

CertificationBundle certify_lagrangian(const LagrangianSystem& sys, const Vec& basepoint,
                                       const GrowthFunction& g, const SamplerSpec& sampler) {
  const MetricField& m = sys.metric();
  CertificationBundle bundle;
  bundle.name = "lagrangian";
  bundle.reports.push_back(check_metric_growth(m, basepoint, g, GrowthMode::R2, sampler));

  auto covector_check = [&](const std::string& name, auto covector) {
    return run_certification(
        name, g, sampler, false,
        [&](const TangentState& s) -> std::optional<std::pair<double, double>> {
          if (!s.q.allFinite() || !m.manifold().contains(s.q)) return std::nullopt;
          double lhs = covector_norm(m, s.t, s.q, covector(s.t, s.q));
          double r = rho(m, s.t, basepoint, s.q);
          double raw = lhs / (1.0 + r);
          return std::pair{raw / g(1.0 + r * r), raw};
        });
  };
  bundle.reports.push_back(covector_check(
      "one-form-time-derivative", [&](double t, const Vec& q) { return sys.dt_b(t, q); }));
  bundle.reports.push_back(covector_check(
      "potential-gradient", [&](double t, const Vec& q) { return sys.grad_V(t, q); }));
  return bundle;
}

double action(const LagrangianSystem& sys, const Trajectory& traj) {
  double total = 0.0;
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    const TangentState& a = traj.samples[k - 1];
    const TangentState& b = traj.samples[k];
    total += 0.5 * (b.t - a.t) * (sys.lagrangian(a) + sys.lagrangian(b));
  }
  return total;
}

}  // namespace cflow
