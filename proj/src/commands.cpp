#include "cflow/commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "cflow/scenario.hpp"
#include "cflow/trajectory_io.hpp"

namespace cflow {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

ordered vec_json(const Vec& v) {
  ordered a = ordered::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered state_json(const TangentState& s) {
  ordered j;
  j["t"] = s.t;
  j["q"] = vec_json(s.q);
  j["v"] = vec_json(s.v);
  return j;
}

ordered report_json(const CertificationReport& r) {
  ordered j;
  j["hypothesis"] = r.hypothesis;
  j["verdict"] = r.pass ? "pass" : "fail";
  j["samples"] = r.samples_checked;
  j["skipped"] = r.skipped;
  j["worst_ratio"] = r.worst_ratio;
  j["witness"] = r.witness ? state_json(*r.witness) : ordered();
  j["fitted_constant"] = r.fitted_constant;
  j["growth"] = r.growth;
  j["scope"] = r.scope;
  return j;
}

ordered bundle_json(const CertificationBundle& b) {
  ordered j;
  j["name"] = b.name;
  j["verdict"] = b.pass() ? "pass" : "fail";
  j["reports"] = ordered::array();
  for (const auto& r : b.reports) j["reports"].push_back(report_json(r));
  return j;
}

std::filesystem::path output_path(const CommandOptions& o, const Scenario& sc,
                                  const std::string& suffix) {
  std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  return dir / (sc.name + suffix);
}

void write_json(const std::filesystem::path& path, const ordered& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

Scenario load(const CommandOptions& o) {
  if (o.scenario.empty()) throw ConfigError("--scenario", "required");
  Scenario sc = load_scenario(o.scenario);
  if (o.seed) sc.sampler.seed = *o.seed;
  if (o.samples) sc.sampler.samples = *o.samples;
  return sc;
}

Trajectory run_flow(const Scenario& sc) {
  if (sc.kind == SystemKind::FirstOrder)
    return integrate_first_order(*sc.metric, sc.field, sc.t0, sc.q0, sc.horizon, sc.direction,
                                 sc.integrator);
  return integrate_second_order(*sc.metric, sc.force, sc.t0, sc.q0, sc.v0, sc.horizon,
                                sc.direction, sc.integrator);
}

ordered run_json(const Scenario& sc, const Trajectory& traj) {
  ordered j;
  j["scenario"] = sc.name;
  j["kind"] = to_string(sc.kind);
  j["direction"] = to_string(sc.direction);
  j["horizon"] = sc.horizon;
  j["status"] = to_string(traj.status);
  j["t_star"] = traj.status == FlowStatus::ReachedHorizon ? ordered() : ordered(traj.terminal_time);
  j["terminal_time"] = traj.terminal_time;
  j["final_step"] = traj.stats.final_step;
  ordered stats;
  stats["accepted"] = traj.stats.accepted;
  stats["rejected"] = traj.stats.rejected;
  stats["min_step"] = traj.stats.min_step;
  stats["max_E"] = traj.stats.max_energy;
  j["stats"] = stats;
  j["samples"] = traj.samples.size();
  ordered last = state_json(traj.samples.back());
  last["E"] = traj.energy.back();
  j["final_state"] = last;
  return j;
}

CertificationBundle wintner_bundle(const Scenario& sc) {
  if (sc.kind != SystemKind::FirstOrder)
    throw ConfigError("certify.hypotheses", "wintner applies to first-order scenarios");
  CertificationBundle b;
  b.name = "wintner";
  b.reports.push_back(check_metric_growth(*sc.metric, sc.basepoint, sc.growth, GrowthMode::R, sc.sampler));
  b.reports.push_back(check_wintner(*sc.metric, sc.basepoint, sc.field, sc.growth, sc.sampler));
  return b;
}

CertificationBundle second_order_bundle(const Scenario& sc) {
  if (sc.kind == SystemKind::FirstOrder)
    throw ConfigError("certify.hypotheses", "second-order needs a force or lagrangian scenario");
  CertificationBundle b;
  b.name = "second-order";
  b.reports.push_back(check_metric_growth(*sc.metric, sc.basepoint, sc.growth, GrowthMode::R2, sc.sampler));
  b.reports.push_back(check_force_growth(*sc.metric, sc.basepoint, sc.force, sc.growth, sc.K,
                                         sc.sampler, sc.direction));
  return b;
}

}  // namespace

int cmd_integrate(const CommandOptions& o, std::ostream& log) {
  Scenario sc = load(o);
  Trajectory traj = run_flow(sc);
  write_trajectory_csv(output_path(o, sc, ".trajectory.csv").string(), traj);
  write_json(output_path(o, sc, ".run.json"), run_json(sc, traj));
  log << sc.name << ": " << to_string(traj.status) << " at t=" << format_double(traj.terminal_time)
      << " (" << traj.stats.accepted << " steps, max E " << format_double(traj.stats.max_energy)
      << ")\n";
  return traj.status == FlowStatus::ReachedHorizon ? kExitOk : kExitIncomplete;
}

int cmd_certify(const CommandOptions& o, std::ostream& log) {
  Scenario sc = load(o);
  std::vector<std::string> hyps = sc.hypotheses;
  if (hyps.empty()) {
    switch (sc.kind) {
      case SystemKind::FirstOrder: hyps = {"wintner"}; break;
      case SystemKind::Force: hyps = {"second-order"}; break;
      case SystemKind::Lagrangian: hyps = {"lagrangian"}; break;
    }
  }
  std::vector<CertificationBundle> bundles;
  for (const std::string& h : hyps) {
    if (h == "wintner") {
      bundles.push_back(wintner_bundle(sc));
    } else if (h == "second-order") {
      bundles.push_back(second_order_bundle(sc));
    } else if (h == "lagrangian") {
      if (!sc.lagrangian)
        throw ConfigError("certify.hypotheses", "lagrangian needs a lagrangian scenario");
      bundles.push_back(certify_lagrangian(*sc.lagrangian, sc.basepoint, sc.growth, sc.sampler));
    } else {
      CertificationBundle b;
      b.name = h;
      GrowthMode mode = h == "metric-growth-R" ? GrowthMode::R : GrowthMode::R2;
      b.reports.push_back(check_metric_growth(*sc.metric, sc.basepoint, sc.growth, mode, sc.sampler));
      bundles.push_back(std::move(b));
    }
  }
  bool pass = true;
  ordered j;
  j["scenario"] = sc.name;
  j["seed"] = sc.sampler.seed;
  j["bundles"] = ordered::array();
  for (const auto& b : bundles) {
    pass = pass && b.pass();
    j["bundles"].push_back(bundle_json(b));
    for (const auto& r : b.reports)
      log << sc.name << ": " << b.name << "/" << r.hypothesis << " " << (r.pass ? "pass" : "fail")
          << " worst_ratio=" << format_double(r.worst_ratio) << "\n";
  }
  j["verdict"] = pass ? "pass" : "fail";
  write_json(output_path(o, sc, ".certify.json"), j);
  return pass ? kExitOk : kExitViolation;
}

int cmd_lift(const CommandOptions& o, std::ostream& log) {
  Scenario sc = load(o);
  if (!sc.lagrangian) throw ConfigError("kind", "lift needs a lagrangian scenario");
  LiftSpec spec = sc.lift.value_or(LiftSpec{});
  const LagrangianSystem& sys = *sc.lagrangian;
  LiftedMetric lm = lift_metric(sys, sc.basepoint);

  ordered j;
  j["scenario"] = sc.name;
  j["type"] = spec.g_uu == 0.0 ? "null" : "spacelike";
  j["u_t"] = spec.u_t;
  auto non_graph = [&](const NonGraphError& e) {
    j["verdict"] = "non-graph";
    j["diagnostic"] = e.what();
    write_json(output_path(o, sc, ".lift.json"), j);
    log << sc.name << ": " << e.what() << "\n";
    return kExitIncomplete;
  };

  LiftState init;
  try {
    init = lift_initial_state(lm, sc.t0, sc.q0, sc.v0, spec.u_t, spec.y0, spec.g_uu);
  } catch (const NonGraphError& e) {
    return non_graph(e);
  }
  const double lambda_end = sc.horizon / std::abs(spec.u_t);
  LiftRun run = lift_geodesic(lm, init, lambda_end, sc.integrator.tolerance);

  {
    std::ofstream os(output_path(o, sc, ".lift.csv"));
    const int d = sys.dimension();
    os << "lambda,t";
    for (int i = 1; i <= d; ++i) os << ",q_" << i;
    os << ",y,u_t";
    for (int i = 1; i <= d; ++i) os << ",u_q_" << i;
    os << ",u_y,g_uu,g_nu\n";
    for (const LiftState& s : run.states) {
      os << format_double(s.lambda);
      for (Eigen::Index i = 0; i < s.x.size(); ++i) os << ',' << format_double(s.x[i]);
      for (Eigen::Index i = 0; i < s.u.size(); ++i) os << ',' << format_double(s.u[i]);
      os << ',' << format_double(s.g_uu) << ',' << format_double(s.g_nu) << '\n';
    }
  }

  j["status"] = to_string(run.status);
  j["lambda_end"] = lambda_end;
  j["steps"] = run.states.size() - 1;
  j["g_uu_initial"] = run.states.front().g_uu;
  j["g_uu_drift"] = run.g_uu_drift;
  j["g_nu_drift"] = run.g_nu_drift;

  ProjectionReport proj;
  try {
    FlowOptions opts = sc.integrator;
    Trajectory el = integrate_second_order(sys.metric(), sc.force, sc.t0, sc.q0, sc.v0,
                                           sc.horizon, Direction::Forward, opts);
    proj = project_and_compare(run, el, spec.tolerance, &sc.manifold);
  } catch (const NonGraphError& e) {
    return non_graph(e);
  }
  ordered pj;
  pj["max_deviation"] = proj.max_deviation;
  pj["worst_time"] = proj.worst_time;
  pj["compared"] = proj.compared;
  pj["tolerance"] = spec.tolerance;
  pj["matched"] = proj.matched;
  j["projection"] = pj;

  ConstancyReport cr = check_null_constancy(lm, sc.sampler);
  ordered cj;
  cj["max_entry"] = cr.max_entry;
  cj["threshold"] = cr.threshold;
  cj["samples"] = cr.samples;
  cj["pass"] = cr.pass;
  j["null_constancy"] = cj;

  const bool ok = proj.matched && cr.pass && run.status == FlowStatus::ReachedHorizon;
  j["verdict"] = ok ? "pass" : "fail";
  write_json(output_path(o, sc, ".lift.json"), j);
  log << sc.name << ": lift deviation " << format_double(proj.max_deviation) << ", max |nabla n| "
      << format_double(cr.max_entry) << "\n";
  if (run.status != FlowStatus::ReachedHorizon) return kExitIncomplete;
  return ok ? kExitOk : kExitViolation;
}

int cmd_verify(const CommandOptions& o, std::ostream& log) {
  Scenario sc = load(o);
  if (!sc.verify.inequality && !sc.verify.envelope)
    throw ConfigError("verify", "scenario requests neither an inequality nor the envelope");
  std::string source = !o.trajectory.empty() ? o.trajectory : sc.verify.trajectory_csv;
  Trajectory traj = source.empty() ? run_flow(sc) : read_trajectory_csv(source);

  ordered j;
  j["scenario"] = sc.name;
  j["trajectory"] = source.empty() ? "fresh run" : std::filesystem::path(source).filename().string();
  j["samples"] = traj.samples.size();
  if (source.empty()) j["status"] = to_string(traj.status);
  bool verified = true, satisfied = true;

  if (sc.verify.inequality) {
    InequalityReport r =
        verify_distance_inequality(*sc.metric, sc.basepoint, traj, sc.growth, *sc.verify.inequality);
    ordered ij;
    ij["mode"] = to_string(r.mode);
    ij["difference"] = r.difference;
    ij["lhs"] = r.lhs;
    ij["rhs"] = r.rhs;
    ij["worst_excess"] = r.worst_excess;
    ij["worst_time"] = r.worst_time;
    ij["verified"] = r.verified;
    ij["satisfied"] = r.satisfied;
    if (!r.note.empty()) ij["note"] = r.note;
    j["inequality"] = ij;
    verified = verified && r.verified;
    satisfied = satisfied && r.satisfied;
    log << sc.name << ": " << to_string(r.mode) << " lhs=" << format_double(r.lhs)
        << " rhs=" << format_double(r.rhs) << (r.satisfied ? " satisfied" : " violated") << "\n";
  }
  if (sc.verify.envelope) {
    EnvelopeReport r = verify_energy_envelope(traj, sc.growth, sc.beta);
    ordered ej;
    ej["E0"] = r.E0;
    ej["beta"] = r.beta;
    ej["growth"] = sc.growth.describe();
    ej["worst_ratio"] = r.worst_ratio;
    ej["worst_time"] = r.worst_time;
    ej["satisfied"] = r.satisfied;
    j["envelope"] = ej;
    satisfied = satisfied && r.satisfied;
    log << sc.name << ": envelope worst E/bound=" << format_double(r.worst_ratio)
        << (r.satisfied ? " satisfied" : " violated") << "\n";
  }
  j["verdict"] = !verified ? "unverified" : satisfied ? "satisfied" : "violated";
  write_json(output_path(o, sc, ".verify.json"), j);
  if (!verified) return kExitError;
  return satisfied ? kExitOk : kExitViolation;
}

int run_command(const std::string& command, const CommandOptions& options, std::ostream& log,
                std::ostream& err) {
  try {
    if (command == "integrate") return cmd_integrate(options, log);
    if (command == "certify") return cmd_certify(options, log);
    if (command == "lift") return cmd_lift(options, log);
    if (command == "verify") return cmd_verify(options, log);
    err << "error: unknown command '" << command << "'\n";
    return kExitError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace cflow
