// seqknock: knockoff variable selection for mixed-type data.
//
//   seqknock filter   --input data.csv --response y --out-dir out
//   seqknock multi    --input data.csv --response y --B 1000 --out-dir out
//   seqknock simulate --config configs/desk_amplitude.json --out-dir out
//   seqknock replay   --manifest out/manifest.json --out-dir out2
//
// Exit status: 0 success, 2 input error, 3 numerical failure.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seqknock/io/commands.hpp"

namespace {

void add_common(CLI::App* cmd, seqknock::io::CliFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file or manifest; flags override its values");
  cmd->add_option("--out-dir", f.out_dir, "Directory for result files");
  cmd->add_option("--seed", f.seed, "Master seed (random and recorded when omitted)");
  cmd->add_option("--q", f.q, "Target FDR level (default 0.2)");
  cmd->add_option("--alpha", f.alpha, "Elastic-net mixing parameter (default 0.5)");
  cmd->add_option("--threads", f.threads, "Worker threads, 0 = all cores (default 1)");
}

void add_data(CLI::App* cmd, seqknock::io::CliFlags& f) {
  cmd->add_option("--input", f.input, "CSV file with a header row");
  cmd->add_option("--response", f.response, "Name of the response column");
  cmd->add_option("--generator", f.generator, "Knockoff generator: gaussian or sequential (default sequential)")
      ->check(CLI::IsMember({"gaussian", "sequential"}));
  cmd->add_option("--folds", f.folds, "Cross-validation folds (default 10)");
  cmd->add_flag("--shuffle-order", f.shuffle_order, "Process columns in a seeded random order");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knockoff variable selection with FDR control for mixed-type data"};
  app.set_version_flag("--version", seqknock::io::kToolVersion);
  app.require_subcommand(1);

  seqknock::io::CliFlags flags;
  std::string manifest;

  auto* filter = app.add_subcommand("filter", "Single knockoff filter");
  add_common(filter, flags);
  add_data(filter, flags);

  auto* multi = app.add_subcommand("multi", "Consensus over B knockoff draws with heatmap output");
  add_common(multi, flags);
  add_data(multi, flags);
  multi->add_option("--B", flags.B, "Number of knockoff draws (default 1000)");
  multi->add_option("--heatmap-order", flags.heatmap_order, "Heatmap row order: frequency or input")
      ->check(CLI::IsMember({"frequency", "input"}));

  auto* simulate = app.add_subcommand("simulate", "Simulation campaign with FDR/power curves");
  add_common(simulate, flags);
  simulate->add_option("--B", flags.B, "Knockoff draws for multi-knockoff methods");
  simulate->add_option("--n-sim", flags.n_sim, "Replicates per configuration");
  simulate->add_flag("--record-runtime", flags.record_runtime, "Write measured runtimes into campaign.csv");

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("--manifest", manifest, "manifest.json of an earlier run")->required();
  replay->add_option("--out-dir", flags.out_dir, "Directory for the reproduced files");
  replay->add_option("--threads", flags.threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : seqknock::io::kExitInput;
  }

  std::vector<std::string> args(argv, argv + argc);
  if (*replay) return seqknock::io::replay_manifest(manifest, flags.out_dir, flags.threads, std::cerr);
  const std::string command = filter->parsed() ? "filter" : multi->parsed() ? "multi" : "simulate";
  return seqknock::io::run_command(command, flags, std::cerr, args);
}
