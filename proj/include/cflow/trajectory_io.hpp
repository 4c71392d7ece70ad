#pragma once

#include <iosfwd>
#include <string>

#include "cflow/flow.hpp"

namespace cflow {

/// Header `t,q_1..q_d,v_1..v_d,E`; every value printed with 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Reads a file written by write_trajectory_csv. Status is left at
/// ReachedHorizon and the direction is inferred from the time column.
Trajectory read_trajectory_csv(const std::string& path);

/// "%.17g".
std::string format_double(double x);

}  // namespace cflow
