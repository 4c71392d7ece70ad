#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point of R x TQ: time, chart coordinates and velocity coordinates.
struct TangentState {
  double t = 0.0;
  Vec q;
  Vec v;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field, metric or force could not be evaluated at a requested point.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A curve left the region where the chart is valid.
class ChartExitError : public Error {
 public:
  ChartExitError(const std::string& what, double parameter)
      : Error(what), parameter_(parameter) {}
  double parameter() const { return parameter_; }

 private:
  double parameter_;
};

/// Malformed scenario or expression input. `where` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

std::string format_point(const Vec& q);

}  // namespace cflow
