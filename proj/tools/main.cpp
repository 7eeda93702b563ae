#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vssea/commands.hpp"

int main(int argc, char** argv) {
  vssea::CommandLine cmd;
  std::string inject;

  CLI::App app{"Variable-stiffness SEA controller synthesis and simulation"};
  app.add_option("verb", cmd.verb, "simulate | synthesize | sweep | validate")
      ->required()
      ->check(CLI::IsMember({"simulate", "synthesize", "sweep", "validate"}));
  app.add_option("--config", cmd.config_path, "Config file (sectioned key = value)");
  app.add_option("--out", cmd.out_path, "Output file for CSV or report data");
  app.add_option("--set", cmd.overrides, "Override a dotted key, e.g. --set sim.step_s=0.0005")->take_all();
  app.add_option("--seed", cmd.seed, "Noise seed (sets sim.seed)");
  app.add_option("--sweep", cmd.sweep, "Sweep spec key=v1,v2,...");
  app.add_option("--inject", inject, "Validation fault hook")
      ->check(CLI::IsMember({"pi2-equilibrium-inertia", "compensation-inverted"}))
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(vssea::ExitStatus::kConfigError);
  }

  if (inject == "pi2-equilibrium-inertia") cmd.fault.pi2_form = vssea::Pi2Form::kEquilibriumInertia;
  if (inject == "compensation-inverted") cmd.fault.compensation = vssea::Compensation::kInverted;

  return static_cast<int>(vssea::run_command(cmd, std::cout, std::cerr));
}
