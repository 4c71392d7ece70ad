#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace cflow {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  /// Malformed input, evaluation failure or an unverifiable check.
  kExitError = 1,
  /// BlowUp, LeftChart, StepCollapse, or a lift that is not a graph over t.
  kExitIncomplete = 2,
  /// A hypothesis or inequality was violated.
  kExitViolation = 3,
};

struct CommandOptions {
  std::string scenario;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  /// verify only: existing trajectory CSV overriding the scenario's source.
  std::string trajectory;
};

/// Writes <out>/<name>.trajectory.csv and <out>/<name>.run.json.
int cmd_integrate(const CommandOptions& options, std::ostream& log);
/// Writes <out>/<name>.certify.json.
int cmd_certify(const CommandOptions& options, std::ostream& log);
/// Writes <out>/<name>.lift.csv and <out>/<name>.lift.json.
int cmd_lift(const CommandOptions& options, std::ostream& log);
/// Writes <out>/<name>.verify.json.
int cmd_verify(const CommandOptions& options, std::ostream& log);

/// Dispatches by subcommand name and turns exceptions into exit code 1 with
/// a diagnostic on `err`.
int run_command(const std::string& command, const CommandOptions& options, std::ostream& log,
                std::ostream& err);

}  // namespace cflow
