#include <iostream>

#include <CLI11.hpp>

#include "cflow/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cflow: completeness of time-dependent flows on Riemannian charts"};
  app.require_subcommand(1);

  cflow::CommandOptions options;
  std::uint64_t seed = 0;
  std::size_t samples = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", options.scenario, "scenario JSON file")->required();
    sub->add_option("--out", options.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override the sampler seed");
    sub->add_option("--samples", samples, "override the sample count")
        ->check(CLI::PositiveNumber);
  };
  CLI::App* integrate = app.add_subcommand("integrate", "integrate the maximal solution");
  CLI::App* certify = app.add_subcommand("certify", "check the growth hypotheses by sampling");
  CLI::App* lift = app.add_subcommand("lift", "lift to the Eisenhart spacetime and compare");
  CLI::App* verify = app.add_subcommand("verify", "check distance or energy inequalities");
  for (CLI::App* sub : {integrate, certify, lift, verify}) add_common(sub);
  verify->add_option("--trajectory", options.trajectory, "trajectory CSV to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cflow::kExitError;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--seed")) options.seed = seed;
    if (sub->count("--samples")) options.samples = samples;
    return cflow::run_command(sub->get_name(), options, std::cout, std::cerr);
  }
  return cflow::kExitError;
}
