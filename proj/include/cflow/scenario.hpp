#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cflow/eisenhart.hpp"
#include "cflow/growth.hpp"
#include "cflow/inequalities.hpp"
#include "cflow/mechanics.hpp"
#include "cflow/sampling.hpp"

namespace cflow {

enum class SystemKind { FirstOrder, Force, Lagrangian };

struct LiftSpec {
  double u_t = 1.0;
  /// 0 for null data, > 0 for spacelike.
  double g_uu = 0.0;
  double y0 = 0.0;
  double tolerance = 1e-6;
};

struct VerifySpec {
  std::optional<InequalityMode> inequality;
  bool envelope = false;
  /// Existing trajectory to verify instead of a fresh run (relative paths
  /// resolve against the scenario file).
  std::string trajectory_csv;
};

/// A parsed scenario file. Holds the system and every run parameter.
/// Not copyable: force fields refer to the owned Lagrangian system.
struct Scenario {
  std::string name;
  std::string source_path;
  SystemKind kind = SystemKind::Force;
  ChartManifold manifold = ChartManifold::euclidean(1);
  std::unique_ptr<MetricField> metric;
  VectorField field;
  ForceField force;
  std::unique_ptr<LagrangianSystem> lagrangian;

  Vec basepoint;
  double t0 = 0.0;
  Vec q0, v0;
  double horizon = 1.0;
  Direction direction = Direction::Forward;
  GrowthFunction growth = GrowthFunction::constant(1.0);
  double K = 1.0;
  double beta = 6.0;
  SamplerSpec sampler;
  std::vector<std::string> hypotheses;
  VerifySpec verify;
  std::optional<LiftSpec> lift;
  FlowOptions integrator;

  Scenario() = default;
  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;
  Scenario(Scenario&&) = default;
  Scenario& operator=(Scenario&&) = default;
};

std::string to_string(SystemKind kind);

/// Parses and validates a scenario. Errors are ConfigError naming the field
/// (JSON syntax errors carry line and column).
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& source_path = "<string>");

}  // namespace cflow
