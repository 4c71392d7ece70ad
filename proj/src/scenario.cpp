#include "cflow/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cflow/expression.hpp"
#include "cflow/metric_catalog.hpp"

namespace cflow {

using nlohmann::json;

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::FirstOrder: return "first-order";
    case SystemKind::Force: return "force";
    case SystemKind::Lagrangian: return "lagrangian";
  }
  return "?";
}

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where, "unknown field '" + it.key() + "'");
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const char* key, const std::string& where, double fallback) {
  return j.contains(key) ? number(j.at(key), join(where, key)) : fallback;
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where, "expected a string");
  return j.get<std::string>();
}

Vec vector_of(const json& j, const std::string& where, int dimension) {
  if (!j.is_array()) throw ConfigError(where, "expected an array of numbers");
  if (dimension >= 0 && static_cast<int>(j.size()) != dimension)
    throw ConfigError(where, "expected " + std::to_string(dimension) + " entries");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[i] = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

std::vector<std::string> strings_of(const json& j, const std::string& where, int dimension) {
  if (!j.is_array()) throw ConfigError(where, "expected an array of expressions");
  if (dimension >= 0 && static_cast<int>(j.size()) != dimension)
    throw ConfigError(where, "expected " + std::to_string(dimension) + " entries");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(text(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<std::string>> matrix_of(const json& j, const std::string& where, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw ConfigError(where, "expected a " + std::to_string(d) + "x" + std::to_string(d) +
                                 " array of expressions");
  std::vector<std::vector<std::string>> out;
  for (int i = 0; i < d; ++i) out.push_back(strings_of(j[i], where + "[" + std::to_string(i) + "]", d));
  return out;
}

Expression parse_expr(const std::string& src, const std::vector<std::string>& vars,
                      const std::string& where) {
  try {
    return Expression::parse(src, vars);
  } catch (const ConfigError& e) {
    throw ConfigError(where, e.what());
  }
}

std::vector<Interval> box_of(const json& j, const std::string& where, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw ConfigError(where, "expected " + std::to_string(d) + " [lo, hi] pairs");
  std::vector<Interval> box;
  for (int i = 0; i < d; ++i) {
    std::string w = where + "[" + std::to_string(i) + "]";
    Vec pair = vector_of(j[i], w, 2);
    if (!(pair[0] <= pair[1])) throw ConfigError(w, "lo must not exceed hi");
    box.push_back({pair[0], pair[1]});
  }
  return box;
}

ChartManifold parse_manifold(const json& j) {
  only_keys(j, "manifold", {"type", "dimension", "periods"});
  std::string type = text(j.at("type"), "manifold.type");
  if (type == "euclidean") {
    if (!j.contains("dimension")) throw ConfigError("manifold.dimension", "required");
    const json& dj = j.at("dimension");
    if (!dj.is_number_integer() || dj.get<int>() < 1)
      throw ConfigError("manifold.dimension", "expected a positive integer");
    return ChartManifold::euclidean(dj.get<int>());
  }
  if (type == "flat-torus") {
    if (!j.contains("periods")) throw ConfigError("manifold.periods", "required");
    Vec p = vector_of(j.at("periods"), "manifold.periods", -1);
    if (p.size() == 0) throw ConfigError("manifold.periods", "at least one period");
    std::vector<double> periods(p.data(), p.data() + p.size());
    for (double x : periods)
      if (!(x > 0.0)) throw ConfigError("manifold.periods", "periods must be positive");
    return ChartManifold::flat_torus(periods);
  }
  if (type == "sphere") return ChartManifold::sphere();
  throw ConfigError("manifold.type", "unknown manifold '" + type + "' (euclidean|flat-torus|sphere)");
}

MetricField parse_metric(const json& j, const ChartManifold& manifold) {
  only_keys(j, "metric", {"name", "entries", "analytic"});
  std::string name = text(j.at("name"), "metric.name");
  if (name == "custom") {
    if (!j.contains("entries")) throw ConfigError("metric.entries", "required for custom metrics");
    bool analytic = j.value("analytic", true);
    auto entries = matrix_of(j.at("entries"), "metric.entries", manifold.dimension());
    try {
      return custom_metric(manifold, entries, analytic);
    } catch (const ConfigError& e) {
      throw ConfigError("metric.entries", e.what());
    }
  }
  try {
    return catalog_metric(name, manifold);
  } catch (const ConfigError& e) {
    throw ConfigError("metric.name", e.what());
  }
}

std::vector<double> pack(double t, const Vec& q) {
  std::vector<double> x(q.size() + 1);
  x[0] = t;
  for (Eigen::Index i = 0; i < q.size(); ++i) x[i + 1] = q[i];
  return x;
}

std::vector<double> pack(double t, const Vec& q, const Vec& v) {
  std::vector<double> x(q.size() + v.size() + 1);
  x[0] = t;
  for (Eigen::Index i = 0; i < q.size(); ++i) x[i + 1] = q[i];
  for (Eigen::Index i = 0; i < v.size(); ++i) x[q.size() + i + 1] = v[i];
  return x;
}

// The region where the expression is strictly positive.
DomainFn parse_domain(const json& j, const std::string& where, int d) {
  Expression e = parse_expr(text(j, where), position_variables(d), where);
  return [e](double t, const Vec& q) { return e.evaluate(pack(t, q)) > 0.0; };
}

VectorField parse_field(const json& j, int d) {
  only_keys(j, "field", {"nu", "domain"});
  if (!j.contains("nu")) throw ConfigError("field.nu", "required");
  auto src = strings_of(j.at("nu"), "field.nu", d);
  std::vector<Expression> nu;
  for (int i = 0; i < d; ++i)
    nu.push_back(parse_expr(src[i], position_variables(d), "field.nu[" + std::to_string(i) + "]"));
  VectorField f;
  f.eval = [nu, d](double t, const Vec& q) {
    std::vector<double> x = pack(t, q);
    Vec out(d);
    for (int i = 0; i < d; ++i) out[i] = nu[i].evaluate(x);
    return out;
  };
  if (j.contains("domain")) f.domain = parse_domain(j.at("domain"), "field.domain", d);
  return f;
}

ForceField parse_force(const json& j, int d) {
  only_keys(j, "force", {"f", "two_form", "friction", "domain"});
  if (!j.contains("f")) throw ConfigError("force.f", "required");
  auto src = strings_of(j.at("f"), "force.f", d);
  std::vector<Expression> fx;
  for (int i = 0; i < d; ++i)
    fx.push_back(parse_expr(src[i], phase_variables(d), "force.f[" + std::to_string(i) + "]"));
  ForceField f;
  f.total = [fx, d](double t, const Vec& q, const Vec& v) {
    std::vector<double> x = pack(t, q, v);
    Vec out(d);
    for (int i = 0; i < d; ++i) out[i] = fx[i].evaluate(x);
    return out;
  };
  if (j.contains("two_form")) {
    auto m = matrix_of(j.at("two_form"), "force.two_form", d);
    std::vector<std::vector<Expression>> F(d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k)
        F[i].push_back(parse_expr(m[i][k], position_variables(d),
                                  "force.two_form[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
    f.two_form = [F, d](double t, const Vec& q) {
      std::vector<double> x = pack(t, q);
      Mat out(d, d);
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) out(i, k) = F[i][k].evaluate(x);
      if ((out + out.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, out.cwiseAbs().maxCoeff()))
        throw EvaluationError("two_form is not antisymmetric at q=" + format_point(q));
      return out;
    };
  }
  if (j.contains("friction")) {
    Expression h = parse_expr(text(j.at("friction"), "force.friction"), phase_variables(d),
                              "force.friction");
    f.friction = [h](double t, const Vec& q, const Vec& v) {
      double value = h.evaluate(pack(t, q, v));
      if (value < 0.0)
        throw EvaluationError("friction coefficient is negative at q=" + format_point(q));
      return value;
    };
  }
  if (j.contains("domain")) f.domain = parse_domain(j.at("domain"), "force.domain", d);
  return f;
}

SamplerSpec parse_sampler(const json& j, const ChartManifold& manifold, double window,
                          std::uint64_t seed) {
  SamplerSpec s = default_sampler(manifold, window);
  s.seed = seed;
  if (j.is_null()) return s;
  only_keys(j, "sampler", {"samples", "q_box", "v_box", "ray_fractions"});
  const int d = manifold.dimension();
  if (j.contains("samples")) {
    const json& n = j.at("samples");
    if (!n.is_number_integer() || n.get<long long>() < 0)
      throw ConfigError("sampler.samples", "expected a nonnegative integer");
    s.samples = n.get<std::size_t>();
  }
  if (j.contains("q_box")) s.q_box = box_of(j.at("q_box"), "sampler.q_box", d);
  if (j.contains("v_box")) s.v_box = box_of(j.at("v_box"), "sampler.v_box", d);
  if (j.contains("ray_fractions")) {
    Vec f = vector_of(j.at("ray_fractions"), "sampler.ray_fractions", -1);
    s.ray_fractions.assign(f.data(), f.data() + f.size());
  }
  return s;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

Scenario parse_scenario(const std::string& source, const std::string& source_path) {
  json j;
  try {
    j = json::parse(source);
  } catch (const json::parse_error& e) {
    auto [line, col] = line_column(source, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError(source_path + ":" + std::to_string(line) + ":" + std::to_string(col),
                      "JSON syntax error");
  }
  only_keys(j, "", {"name", "kind", "manifold", "metric", "field", "force", "lagrangian",
                    "basepoint", "initial", "horizon", "direction", "growth", "window", "K",
                    "beta", "seed", "sampler", "certify", "verify", "lift", "integrator"});
  Scenario sc;
  sc.source_path = source_path;
  try {
    if (!j.contains("name")) throw ConfigError("name", "required");
    sc.name = text(j.at("name"), "name");
    if (sc.name.empty() || sc.name.find('/') != std::string::npos)
      throw ConfigError("name", "must be a non-empty file-name-safe string");

    if (!j.contains("kind")) throw ConfigError("kind", "required");
    std::string kind = text(j.at("kind"), "kind");
    if (kind == "first-order") sc.kind = SystemKind::FirstOrder;
    else if (kind == "force") sc.kind = SystemKind::Force;
    else if (kind == "lagrangian") sc.kind = SystemKind::Lagrangian;
    else throw ConfigError("kind", "unknown kind '" + kind + "' (first-order|force|lagrangian)");

    if (!j.contains("manifold")) throw ConfigError("manifold", "required");
    sc.manifold = parse_manifold(j.at("manifold"));
    const int d = sc.manifold.dimension();
    if (!j.contains("metric")) throw ConfigError("metric", "required");
    sc.metric = std::make_unique<MetricField>(parse_metric(j.at("metric"), sc.manifold));

    switch (sc.kind) {
      case SystemKind::FirstOrder:
        if (!j.contains("field")) throw ConfigError("field", "required for first-order scenarios");
        sc.field = parse_field(j.at("field"), d);
        break;
      case SystemKind::Force:
        if (!j.contains("force")) throw ConfigError("force", "required for force scenarios");
        sc.force = parse_force(j.at("force"), d);
        break;
      case SystemKind::Lagrangian: {
        if (!j.contains("lagrangian")) throw ConfigError("lagrangian", "required");
        const json& l = j.at("lagrangian");
        only_keys(l, "lagrangian", {"b", "V", "analytic"});
        std::vector<std::string> b;
        if (l.contains("b")) b = strings_of(l.at("b"), "lagrangian.b", d);
        std::string V = l.contains("V") ? text(l.at("V"), "lagrangian.V") : "";
        bool analytic = l.value("analytic", true);
        sc.lagrangian = std::make_unique<LagrangianSystem>(
            lagrangian_from_expressions(*sc.metric, b, V, analytic));
        sc.force = el_force_field(*sc.lagrangian);
        break;
      }
    }

    sc.basepoint = j.contains("basepoint") ? vector_of(j.at("basepoint"), "basepoint", d)
                                           : sc.manifold.default_point();
    if (!sc.manifold.contains(sc.basepoint))
      throw ConfigError("basepoint", "outside the chart: " + format_point(sc.basepoint));

    if (!j.contains("initial")) throw ConfigError("initial", "required");
    const json& init = j.at("initial");
    only_keys(init, "initial", {"t0", "q0", "v0"});
    sc.t0 = number_or(init, "t0", "initial", 0.0);
    if (!init.contains("q0")) throw ConfigError("initial.q0", "required");
    sc.q0 = vector_of(init.at("q0"), "initial.q0", d);
    if (sc.kind != SystemKind::FirstOrder) {
      if (!init.contains("v0")) throw ConfigError("initial.v0", "required for second-order systems");
      sc.v0 = vector_of(init.at("v0"), "initial.v0", d);
    }

    if (!j.contains("horizon")) throw ConfigError("horizon", "required");
    sc.horizon = number(j.at("horizon"), "horizon");
    if (!(sc.horizon > 0.0)) throw ConfigError("horizon", "must be positive");
    if (j.contains("direction")) {
      std::string dir = text(j.at("direction"), "direction");
      if (dir == "forward") sc.direction = Direction::Forward;
      else if (dir == "backward") sc.direction = Direction::Backward;
      else throw ConfigError("direction", "expected forward or backward");
    }

    if (j.contains("growth")) {
      const json& g = j.at("growth");
      only_keys(g, "growth", {"kind", "c"});
      std::string gk = g.contains("kind") ? text(g.at("kind"), "growth.kind") : "constant";
      sc.growth = GrowthFunction::from_name(gk, number_or(g, "c", "growth", 1.0));
    }
    const double window = number_or(j, "window", "", sc.horizon);
    if (!(window > 0.0)) throw ConfigError("window", "must be positive");
    sc.K = number_or(j, "K", "", 1.0);
    if (!(sc.K > 0.0)) throw ConfigError("K", "must be positive");
    sc.beta = number_or(j, "beta", "", 6.0);
    if (!(sc.beta > 0.0)) throw ConfigError("beta", "must be positive");

    if (!j.contains("seed")) throw ConfigError("seed", "required (runs must be reproducible)");
    const json& seed = j.at("seed");
    if (!seed.is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    sc.sampler = parse_sampler(j.value("sampler", json()), sc.manifold, window,
                               seed.get<std::uint64_t>());

    if (j.contains("certify")) {
      const json& c = j.at("certify");
      only_keys(c, "certify", {"hypotheses"});
      if (c.contains("hypotheses"))
        sc.hypotheses = strings_of(c.at("hypotheses"), "certify.hypotheses", -1);
      static const std::set<std::string> known{"wintner", "second-order", "lagrangian",
                                               "metric-growth-R", "metric-growth-R2"};
      for (const auto& h : sc.hypotheses)
        if (!known.count(h)) throw ConfigError("certify.hypotheses", "unknown hypothesis '" + h + "'");
    }

    if (j.contains("verify")) {
      const json& v = j.at("verify");
      only_keys(v, "verify", {"inequality", "envelope", "trajectory_csv"});
      if (v.contains("inequality"))
        sc.verify.inequality = inequality_mode_from_name(text(v.at("inequality"), "verify.inequality"));
      if (v.contains("envelope")) {
        if (!v.at("envelope").is_boolean()) throw ConfigError("verify.envelope", "expected a boolean");
        sc.verify.envelope = v.at("envelope").get<bool>();
      }
      if (v.contains("trajectory_csv")) {
        std::filesystem::path p = text(v.at("trajectory_csv"), "verify.trajectory_csv");
        if (p.is_relative())
          p = std::filesystem::path(source_path).parent_path() / p;
        sc.verify.trajectory_csv = p.string();
      }
    }

    if (j.contains("lift")) {
      const json& l = j.at("lift");
      only_keys(l, "lift", {"u_t", "type", "g_uu", "y0", "tolerance"});
      LiftSpec spec;
      spec.u_t = number_or(l, "u_t", "lift", 1.0);
      std::string type = l.contains("type") ? text(l.at("type"), "lift.type") : "null";
      if (type == "null") {
        spec.g_uu = 0.0;
        if (l.contains("g_uu")) throw ConfigError("lift.g_uu", "not allowed for null lifts");
      } else if (type == "spacelike") {
        spec.g_uu = number_or(l, "g_uu", "lift", 1.0);
        if (!(spec.g_uu > 0.0)) throw ConfigError("lift.g_uu", "must be positive for spacelike lifts");
      } else {
        throw ConfigError("lift.type", "expected null or spacelike");
      }
      spec.y0 = number_or(l, "y0", "lift", 0.0);
      spec.tolerance = number_or(l, "tolerance", "lift", 1e-6);
      sc.lift = spec;
    }

    if (j.contains("integrator")) {
      const json& i = j.at("integrator");
      only_keys(i, "integrator", {"tolerance", "max_step"});
      sc.integrator.tolerance = number_or(i, "tolerance", "integrator", 1e-10);
      sc.integrator.max_step = number_or(i, "max_step", "integrator", 0.0);
      if (!(sc.integrator.tolerance > 0.0)) throw ConfigError("integrator.tolerance", "must be positive");
    }
    sc.integrator.basepoint = sc.basepoint;
  } catch (const json::exception& e) {
    throw ConfigError(source_path, e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path, "cannot open scenario file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_scenario(ss.str(), path);
}

}  // namespace cflow
