#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cflow/metric.hpp"

namespace cflow {

enum class FlowStatus { ReachedHorizon, BlowUp, LeftChart, StepCollapse };
enum class Direction { Forward, Backward };

std::string to_string(FlowStatus status);
std::string to_string(Direction direction);

struct FlowStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double max_energy = 0.0;
  /// Size of the step being attempted when the run ended.
  double final_step = 0.0;
};

/// A maximal-solution estimate. Samples are ordered by integration direction;
/// energy[i] is proper_E at samples[i].
struct Trajectory {
  std::vector<TangentState> samples;
  std::vector<double> energy;
  FlowStatus status = FlowStatus::ReachedHorizon;
  /// Last accepted time. For BlowUp and LeftChart this is t*.
  double terminal_time = 0.0;
  FlowStats stats;
  Direction direction = Direction::Forward;

  int dimension() const { return samples.empty() ? 0 : static_cast<int>(samples.front().q.size()); }
};

using FieldFn = std::function<Vec(double t, const Vec& q)>;
using PhaseFieldFn = std::function<Vec(double t, const Vec& q, const Vec& v)>;
using DomainFn = std::function<bool(double t, const Vec& q)>;

struct VectorField {
  FieldFn eval;
  /// Optional extra validity region on top of the chart's.
  DomainFn domain;
};

struct ForceField {
  PhaseFieldFn total;
  /// Optional antisymmetric F_t(q).
  std::function<Mat(double t, const Vec& q)> two_form;
  /// Optional nonnegative friction coefficient h(t, q, v).
  std::function<double(double t, const Vec& q, const Vec& v)> friction;
  DomainFn domain;

  bool has_two_form() const { return static_cast<bool>(two_form); }
  bool has_friction() const { return static_cast<bool>(friction); }
};

/// F_t^sharp(v) = a_t^{-1} F_t v.
Vec raise_two_form(const MetricField& m, double t, const Vec& q, const Mat& F, const Vec& v);

struct FlowOptions {
  double tolerance = 1e-10;
  /// Largest step; 0 selects horizon / 1000.
  double max_step = 0.0;
  /// Basepoint of the energy E; empty selects the chart's default point.
  Vec basepoint;
  std::size_t max_steps = 5'000'000;
};

Trajectory integrate_first_order(const MetricField& m, const VectorField& nu, double t0,
                                 const Vec& q0, double horizon, Direction direction,
                                 const FlowOptions& options = {});

/// v' = f(t, q, v) - Gamma_t(q)(v, v), q' = v.
Trajectory integrate_second_order(const MetricField& m, const ForceField& f, double t0,
                                  const Vec& q0, const Vec& v0, double horizon,
                                  Direction direction, const FlowOptions& options = {});

/// Fires when the step has collapsed below 1e-13 max(1, |t|) and the energy
/// either exceeds 1e12 or at least doubled across the last ten accepted
/// steps. `recent_energy` holds the latest energies, oldest first.
bool blowup_criterion(double t, double step, std::span<const double> recent_energy);

}  // namespace cflow
