#pragma once

#include <cstddef>
#include <string>

#include "cflow/flow.hpp"
#include "cflow/growth.hpp"

namespace cflow {

enum class InequalityMode { Erx, Ers };

std::string to_string(InequalityMode mode);
InequalityMode inequality_mode_from_name(const std::string& name);

/// Both sides of the distance inequality along a trajectory, evaluated on
/// every prefix [t_first, t_k] with the composite trapezoid rule.
struct InequalityReport {
  InequalityMode mode = InequalityMode::Erx;
  /// Over the whole run: signed change of rho (erx) or rho^2 (ers), its
  /// absolute value, and the integral bound.
  double difference = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// Largest lhs - rhs - 1e-6 (1 + |rhs|) over all prefixes and both signs.
  double worst_excess = 0.0;
  double worst_time = 0.0;
  bool satisfied = false;
  /// False when a distance failed to converge; satisfied is then meaningless.
  bool verified = true;
  std::string note;
  std::size_t samples = 0;
};

InequalityReport verify_distance_inequality(const MetricField& m, const Vec& basepoint,
                                            const Trajectory& traj, const GrowthFunction& g,
                                            InequalityMode mode);

/// E(t) <= envelope(g, E(t_first), beta, t_first, t) (1 + 1e-6) at every
/// sample, using the trajectory's recorded E column.
struct EnvelopeReport {
  double E0 = 0.0;
  double beta = 6.0;
  /// Max over samples of E / envelope.
  double worst_ratio = 0.0;
  double worst_time = 0.0;
  bool satisfied = false;
  std::size_t samples = 0;
};

EnvelopeReport verify_energy_envelope(const Trajectory& traj, const GrowthFunction& g,
                                      double beta = 6.0);

/// Relative margin applied by both verifiers.
inline constexpr double kVerifyMargin = 1e-6;

}  // namespace cflow
