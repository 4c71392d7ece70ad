#include "cflow/metric_catalog.hpp"

#include <cmath>
#include <memory>

#include "cflow/expression.hpp"

namespace cflow {

namespace {

std::vector<Mat> zero_list(int d) { return std::vector<Mat>(d, Mat::Zero(d, d)); }

// q-independent metric distance on the given chart.
DistanceFn constant_metric_distance(const ChartManifold& manifold, MatrixFn eval) {
  if (manifold.kind() == ChartKind::FlatTorus) {
    return [manifold, eval](double t, const Vec& p, const Vec& q) {
      return torus_constant_distance(manifold, eval(t, p), p, q);
    };
  }
  return [eval](double t, const Vec& p, const Vec& q) {
    Vec d = q - p;
    return std::sqrt(std::max(d.dot(eval(t, p) * d), 0.0));
  };
}

}  // namespace

double torus_constant_distance(const ChartManifold& torus, const Mat& a, const Vec& p,
                               const Vec& q) {
  const int d = torus.dimension();
  Vec base = torus.difference(p, q);
  double best = std::numeric_limits<double>::infinity();
  int total = 1;
  for (int i = 0; i < d; ++i) total *= 3;
  Vec shift(d);
  for (int code = 0; code < total; ++code) {
    int c = code;
    for (int i = 0; i < d; ++i) {
      shift[i] = base[i] + (c % 3 - 1) * torus.periods()[i];
      c /= 3;
    }
    best = std::min(best, shift.dot(a * shift));
  }
  return std::sqrt(std::max(best, 0.0));
}

double great_circle_distance(const Vec& p, const Vec& q) {
  Eigen::Vector3d x(std::sin(p[0]) * std::cos(p[1]), std::sin(p[0]) * std::sin(p[1]),
                    std::cos(p[0]));
  Eigen::Vector3d y(std::sin(q[0]) * std::cos(q[1]), std::sin(q[0]) * std::sin(q[1]),
                    std::cos(q[0]));
  return std::atan2(x.cross(y).norm(), x.dot(y));
}

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names{"euclidean", "conformal-exp", "conformal-poly",
                                              "sphere", "flat-torus", "custom"};
  return names;
}

MetricField catalog_metric(const std::string& name, const ChartManifold& manifold) {
  const int d = manifold.dimension();
  if (name == "sphere" && manifold.kind() != ChartKind::Sphere)
    throw ConfigError("metric", "metric 'sphere' requires the sphere chart");
  if (manifold.kind() == ChartKind::Sphere && name != "sphere")
    throw ConfigError("metric", "the sphere chart only supports the 'sphere' metric");
  if (name == "flat-torus" && manifold.kind() != ChartKind::FlatTorus)
    throw ConfigError("metric", "metric 'flat-torus' requires a flat-torus manifold");

  if (name == "euclidean" || name == "flat-torus") {
    MatrixFn eval = [d](double, const Vec&) -> Mat { return Mat::Identity(d, d); };
    MetricField m(manifold, eval, name);
    m.set_static();
    m.set_space_derivatives([d](double, const Vec&) { return zero_list(d); });
    m.set_closed_form_distance(constant_metric_distance(manifold, eval));
    return m;
  }
  if (name == "conformal-exp") {
    MatrixFn eval = [d](double t, const Vec&) -> Mat {
      return std::exp(2.0 * t) * Mat::Identity(d, d);
    };
    MetricField m(manifold, eval, name);
    m.set_time_derivative([d](double t, const Vec&) -> Mat {
      return 2.0 * std::exp(2.0 * t) * Mat::Identity(d, d);
    });
    m.set_space_derivatives([d](double, const Vec&) { return zero_list(d); });
    m.set_closed_form_distance(constant_metric_distance(manifold, eval));
    return m;
  }
  if (name == "conformal-poly") {
    MatrixFn eval = [d](double t, const Vec&) -> Mat { return (1.0 + t * t) * Mat::Identity(d, d); };
    MetricField m(manifold, eval, name);
    m.set_time_derivative([d](double t, const Vec&) -> Mat { return 2.0 * t * Mat::Identity(d, d); });
    m.set_space_derivatives([d](double, const Vec&) { return zero_list(d); });
    m.set_closed_form_distance(constant_metric_distance(manifold, eval));
    return m;
  }
  if (name == "sphere") {
    MetricField m(
        manifold,
        [](double, const Vec& q) -> Mat {
          double s = std::sin(q[0]);
          Mat a = Mat::Zero(2, 2);
          a(0, 0) = 1.0;
          a(1, 1) = s * s;
          return a;
        },
        name);
    m.set_static();
    m.set_space_derivatives([](double, const Vec& q) {
      std::vector<Mat> da = zero_list(2);
      da[0](1, 1) = 2.0 * std::sin(q[0]) * std::cos(q[0]);
      return da;
    });
    m.set_closed_form_distance(
        [](double, const Vec& p, const Vec& q) { return great_circle_distance(p, q); });
    return m;
  }
  if (name == "custom") throw ConfigError("metric", "custom metrics need expression entries");
  throw ConfigError("metric", "unknown metric '" + name + "'");
}

MetricField custom_metric(const ChartManifold& manifold,
                          const std::vector<std::vector<std::string>>& entries, bool analytic) {
  const int d = manifold.dimension();
  if (static_cast<int>(entries.size()) != d)
    throw ConfigError("metric/entries", "expected a " + std::to_string(d) + "x" +
                                            std::to_string(d) + " matrix");
  auto vars = position_variables(d);
  auto exprs = std::make_shared<std::vector<Expression>>();
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(entries[i].size()) != d)
      throw ConfigError("metric/entries/" + std::to_string(i),
                        "expected " + std::to_string(d) + " entries");
    for (int j = 0; j < d; ++j) {
      try {
        exprs->push_back(Expression::parse(entries[i][j], vars));
      } catch (const ConfigError& e) {
        throw ConfigError("metric/entries/" + std::to_string(i) + "/" + std::to_string(j),
                          e.what());
      }
    }
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if ((*exprs)[i * d + j].to_string() != (*exprs)[j * d + i].to_string())
        throw ConfigError("metric/entries", "matrix is not symmetric at (" + std::to_string(i) +
                                                "," + std::to_string(j) + ")");

  auto evaluate = [d](const std::vector<Expression>& es, double t, const Vec& q) {
    std::vector<double> x(d + 1);
    x[0] = t;
    for (int i = 0; i < d; ++i) x[i + 1] = q[i];
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = es[i * d + j].evaluate(x);
    return a;
  };

  MatrixFn eval = [exprs, evaluate](double t, const Vec& q) { return evaluate(*exprs, t, q); };
  MetricField m(manifold, eval, "custom");

  bool depends_t = false, depends_q = false;
  for (const auto& e : *exprs) {
    depends_t = depends_t || e.depends_on(0);
    for (int k = 1; k <= d; ++k) depends_q = depends_q || e.depends_on(k);
  }
  if (!depends_t) m.set_static();

  if (analytic) {
    auto dt_exprs = std::make_shared<std::vector<Expression>>();
    auto dq_exprs = std::make_shared<std::vector<std::vector<Expression>>>(d);
    for (const auto& e : *exprs) {
      dt_exprs->push_back(e.derivative(0));
      for (int k = 0; k < d; ++k) (*dq_exprs)[k].push_back(e.derivative(k + 1));
    }
    if (depends_t)
      m.set_time_derivative(
          [dt_exprs, evaluate](double t, const Vec& q) { return evaluate(*dt_exprs, t, q); });
    m.set_space_derivatives([dq_exprs, evaluate, d](double t, const Vec& q) {
      std::vector<Mat> out;
      out.reserve(d);
      for (int k = 0; k < d; ++k) out.push_back(evaluate((*dq_exprs)[k], t, q));
      return out;
    });
  }
  if (!depends_q && manifold.kind() != ChartKind::Sphere)
    m.set_closed_form_distance(constant_metric_distance(manifold, eval));
  return m;
}

}  // namespace cflow
