#include "cflow/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cflow/geodesy.hpp"

namespace cflow {

std::string to_string(InequalityMode mode) { return mode == InequalityMode::Erx ? "erx" : "ers"; }

InequalityMode inequality_mode_from_name(const std::string& name) {
  if (name == "erx") return InequalityMode::Erx;
  if (name == "ers") return InequalityMode::Ers;
  throw ConfigError("verify.inequality", "unknown mode '" + name + "' (erx|ers)");
}

namespace {

// Sample indices in increasing time.
std::vector<std::size_t> time_order(const Trajectory& traj) {
  std::vector<std::size_t> idx(traj.samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  if (traj.direction == Direction::Backward) std::reverse(idx.begin(), idx.end());
  return idx;
}

}  // namespace

InequalityReport verify_distance_inequality(const MetricField& m, const Vec& basepoint,
                                            const Trajectory& traj, const GrowthFunction& g,
                                            InequalityMode mode) {
  InequalityReport rep;
  rep.mode = mode;
  rep.samples = traj.samples.size();
  if (traj.samples.size() < 2) {
    rep.note = "fewer than two samples";
    rep.satisfied = true;
    return rep;
  }
  std::vector<std::size_t> order = time_order(traj);
  std::vector<double> rho_v(order.size()), integrand(order.size()), level(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const TangentState& s = traj.samples[order[k]];
    double r;
    try {
      r = rho(m, s.t, basepoint, s.q);
    } catch (const DistanceError& e) {
      rep.verified = false;
      rep.satisfied = false;
      rep.note = e.what();
      return rep;
    }
    double speed = metric_norm(m, s);
    rho_v[k] = r;
    if (mode == InequalityMode::Erx) {
      level[k] = r;
      integrand[k] = speed + g(1.0 + r) * r;
    } else {
      level[k] = r * r;
      integrand[k] = 2.0 * (r * speed + g(1.0 + r * r) * r * r);
    }
  }

  rep.worst_excess = -std::numeric_limits<double>::infinity();
  double integral = 0.0;
  for (std::size_t k = 1; k < order.size(); ++k) {
    double t0 = traj.samples[order[k - 1]].t, t1 = traj.samples[order[k]].t;
    integral += 0.5 * (t1 - t0) * (integrand[k - 1] + integrand[k]);
    double lhs = std::abs(level[k] - level[0]);
    double excess = lhs - integral - kVerifyMargin * (1.0 + std::abs(integral));
    if (excess > rep.worst_excess) {
      rep.worst_excess = excess;
      rep.worst_time = t1;
    }
  }
  rep.difference = level.back() - level.front();
  rep.lhs = std::abs(rep.difference);
  rep.rhs = integral;
  rep.satisfied = rep.worst_excess <= 0.0;
  return rep;
}

EnvelopeReport verify_energy_envelope(const Trajectory& traj, const GrowthFunction& g,
                                      double beta) {
  EnvelopeReport rep;
  rep.beta = beta;
  rep.samples = traj.samples.size();
  if (traj.samples.empty()) {
    rep.satisfied = true;
    return rep;
  }
  const double t0 = traj.samples.front().t;
  rep.E0 = traj.energy.front();
  bool ok = true;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const double t = traj.samples[k].t;
    double env;
    try {
      env = bihari_envelope(g, rep.E0, beta, t0, t);
    } catch (const GrowthRangeError&) {
      env = std::numeric_limits<double>::infinity();
    }
    const double E = traj.energy[k];
    double ratio = E / env;
    if (!(E <= env * (1.0 + kVerifyMargin))) ok = false;
    if (k == 0 || ratio > rep.worst_ratio || std::isnan(ratio)) {
      rep.worst_ratio = ratio;
      rep.worst_time = t;
    }
  }
  rep.satisfied = ok;
  return rep;
}

}  // namespace cflow
