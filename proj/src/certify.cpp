#include "cflow/certify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "cflow/geodesy.hpp"

namespace cflow {

bool CertificationBundle::pass() const {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

namespace {

std::string box_text(const std::vector<Interval>& box) {
  std::ostringstream os;
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (i) os << " x ";
    os << '[' << box[i].lo << ", " << box[i].hi << ']';
  }
  return os.str();
}

double safe_ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  return num / den;
}

}  // namespace

std::string describe_scope(const SamplerSpec& sampler, bool with_velocity, std::size_t stress,
                           bool pass) {
  std::ostringstream os;
  os << (pass ? "no violation found" : "violated") << " over " << sampler.samples << " random samples and " << stress
     << " stress points with t in [" << -sampler.window << ", " << sampler.window
     << "], q in " << box_text(sampler.q_box);
  if (with_velocity) os << ", v in " << box_text(sampler.v_box);
  os << " (seed " << sampler.seed << ")";
  if (pass) os << "; sampling cannot establish the bound everywhere";
  return os.str();
}

CertificationReport run_certification(
    const std::string& hypothesis, const GrowthFunction& g, const SamplerSpec& sampler,
    bool with_velocity,
    const std::function<std::optional<std::pair<double, double>>(const TangentState&)>& ratio) {
  CertificationReport rep;
  rep.hypothesis = hypothesis;
  rep.growth = g.describe();
  std::vector<TangentState> samples = draw_samples(sampler, with_velocity);
  double fitted = 0.0;
  for (const TangentState& s : samples) {
    std::optional<std::pair<double, double>> r;
    try {
      r = ratio(s);
    } catch (const DistanceError&) {
      r.reset();
    } catch (const ChartExitError&) {
      r.reset();
    }
    if (!r) {
      ++rep.skipped;
      continue;
    }
    ++rep.samples_checked;
    if (!rep.witness || r->first > rep.worst_ratio) {
      rep.worst_ratio = r->first;
      rep.witness = s;
    }
    fitted = std::max(fitted, r->second);
  }
  rep.fitted_constant = std::max(1.0, fitted);
  rep.pass = rep.worst_ratio <= 1.0 + kRatioSlack;
  rep.scope = describe_scope(sampler, with_velocity, samples.size() - sampler.samples, rep.pass);
  return rep;
}

namespace {

bool in_chart(const MetricField& m, const Vec& q) { return q.allFinite() && m.manifold().contains(q); }

}  // namespace

CertificationReport check_metric_growth(const MetricField& m, const Vec& basepoint,
                                        const GrowthFunction& g, GrowthMode mode,
                                        const SamplerSpec& sampler) {
  const std::string name = mode == GrowthMode::R ? "metric-growth-R" : "metric-growth-R2";
  return run_certification(name, g, sampler, true,
                           [&](const TangentState& s) -> std::optional<std::pair<double, double>> {
                             if (!in_chart(m, s.q)) return std::nullopt;
                             double lhs = std::abs(dt_metric_quadratic_form(m, s));
                             if (lhs == 0.0) return std::pair{0.0, 0.0};
                             double n = metric_norm(m, s);
                             double rho_t = rho(m, s.t, basepoint, s.q);
                             double arg = mode == GrowthMode::R ? 1.0 + rho_t : 1.0 + rho_t * rho_t;
                             double raw = safe_ratio(lhs, 2.0 * n * n);
                             return std::pair{raw / g(arg), raw};
                           });
}

CertificationReport check_wintner(const MetricField& m, const Vec& basepoint, const VectorField& nu,
                                  const GrowthFunction& g, const SamplerSpec& sampler) {
  return run_certification("wintner", g, sampler, false,
                           [&](const TangentState& s) -> std::optional<std::pair<double, double>> {
                             if (!in_chart(m, s.q) || (nu.domain && !nu.domain(s.t, s.q)))
                               return std::nullopt;
                             TangentState st{s.t, s.q, nu.eval(s.t, s.q)};
                             double lhs = metric_norm(m, st);
                             double R = proper_R(m, basepoint, s.t, s.q);
                             double raw = lhs / R;
                             return std::pair{raw / g(R), raw};
                           });
}

CertificationReport check_force_growth(const MetricField& m, const Vec& basepoint,
                                       const ForceField& f, const GrowthFunction& g, double K,
                                       const SamplerSpec& sampler, Direction direction) {
  if (!(K > 0.0)) throw ConfigError("K", "must be positive");
  return run_certification(
      "force-growth", g, sampler, true,
      [&](const TangentState& s) -> std::optional<std::pair<double, double>> {
        if (!in_chart(m, s.q) || (f.domain && !f.domain(s.t, s.q))) return std::nullopt;
        Vec rem = f.total(s.t, s.q, s.v);
        if (f.has_two_form()) rem -= raise_two_form(m, s.t, s.q, f.two_form(s.t, s.q), s.v);
        if (f.has_friction() && direction == Direction::Forward)
          rem += f.friction(s.t, s.q, s.v) * s.v;
        double lhs = metric_norm(m, {s.t, s.q, rem});
        double speed = metric_norm(m, s);
        double E = proper_E(m, basepoint, s);
        double raw = lhs * (K + speed) / E;
        return std::pair{raw / g(E), raw};
      });
}

}  // namespace cflow
