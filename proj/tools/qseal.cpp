// qseal: sweep, simulate and validate-channel front end.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qseal/commands.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Sealed-message protocol simulator and eavesdropping analysis"};
  app.require_subcommand(1);

  qseal::SweepConfig sweep;
  auto *sweep_cmd = app.add_subcommand("sweep", "Tabulate information gain and mismatch for the seal family");
  sweep_cmd->add_option("--n", sweep.n_shots, "Shots per message (N)")->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--pa", sweep.p_announce, "Bit-announcement probability")->check(CLI::Range(0.0, 1.0));
  sweep_cmd->add_option("--grid-step", sweep.grid_step, "Spacing of the x grid");
  sweep_cmd->add_option("--tail-tol", sweep.tail_tol, "Omitted binomial mass bound");
  sweep_cmd->add_option("--out", sweep.output_path, "CSV output path")->required();

  qseal::SimulateConfig sim;
  double x = 0.0;
  auto *sim_cmd = app.add_subcommand("simulate", "Run seeded protocol simulations");
  auto *builtin_opt = sim_cmd->add_option("--channel", sim.channel.builtin,
                                          "Builtin channel: identity, seal, depolarizing, dephasing");
  auto *file_opt = sim_cmd->add_option("--channel-file", sim.channel.file, "Channel JSON file");
  builtin_opt->excludes(file_opt);
  auto *x_opt = sim_cmd->add_option("--x", x, "Builtin channel parameter (seal x, depolarizing p)");
  sim_cmd->add_option("--n", sim.params.n_shots, "Shots per run (N)");
  sim_cmd->add_option("--pa", sim.params.p_announce, "Bit-announcement probability");
  sim_cmd->add_option("--bit", sim.params.message_bit, "Message bit")->check(CLI::IsMember({0, 1}));
  sim_cmd->add_option("--seed", sim.params.seed, "Root RNG seed");
  sim_cmd->add_option("--trials", sim.trials, "Independent protocol runs");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (results do not depend on this)");
  sim_cmd->add_option("--transcript", sim.transcript_path,
                      "Write the first run's transcript here (public view to <FILE>.public)");

  qseal::ValidateConfig val;
  auto *val_cmd = app.add_subcommand("validate-channel", "Check a channel file and report its leakage");
  val_cmd->add_option("file", val.path, "Channel JSON file")->required();
  val_cmd->add_option("--n", val.n_shots, "Shots per message (N)")->check(CLI::NonNegativeNumber);
  val_cmd->add_option("--pa", val.p_announce, "Bit-announcement probability")->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return qseal::kExitBadArguments;
  }

  if (*sweep_cmd)
    return qseal::cmd_sweep(sweep, std::cerr);
  if (*sim_cmd) {
    if (*x_opt)
      sim.channel.parameter = x;
    return qseal::cmd_simulate(sim, std::cout, std::cerr);
  }
  return qseal::cmd_validate_channel(val, std::cout, std::cerr);
}
