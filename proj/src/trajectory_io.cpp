#include "cflow/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace cflow {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const int d = traj.dimension();
  os << 't';
  for (int i = 1; i <= d; ++i) os << ",q_" << i;
  for (int i = 1; i <= d; ++i) os << ",v_" << i;
  os << ",E\n";
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const TangentState& s = traj.samples[k];
    os << format_double(s.t);
    for (int i = 0; i < d; ++i) os << ',' << format_double(s.q[i]);
    for (int i = 0; i < d; ++i) os << ',' << format_double(s.v[i]);
    os << ',' << format_double(traj.energy[k]) << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  write_trajectory_csv(os, traj);
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path, "cannot open trajectory file");
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path, "empty trajectory file");
  int columns = 1;
  for (char c : line) columns += c == ',';
  if (columns < 4 || (columns - 2) % 2 != 0 || line.rfind("t,", 0) != 0)
    throw ConfigError(path + ":1", "expected header t,q_1..q_d,v_1..v_d,E");
  const int d = (columns - 2) / 2;

  Trajectory traj;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno), "bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(values.size()) != columns)
      throw ConfigError(path + ":" + std::to_string(lineno), "wrong column count");
    TangentState s;
    s.t = values[0];
    s.q = Eigen::Map<const Vec>(values.data() + 1, d);
    s.v = Eigen::Map<const Vec>(values.data() + 1 + d, d);
    traj.samples.push_back(std::move(s));
    traj.energy.push_back(values.back());
  }
  if (traj.samples.empty()) throw ConfigError(path, "trajectory has no samples");
  traj.direction = traj.samples.size() > 1 && traj.samples.back().t < traj.samples.front().t
                       ? Direction::Backward
                       : Direction::Forward;
  traj.terminal_time = traj.samples.back().t;
  traj.stats.accepted = traj.samples.size() - 1;
  for (double e : traj.energy) traj.stats.max_energy = std::max(traj.stats.max_energy, e);
  return traj;
}

}  // namespace cflow
