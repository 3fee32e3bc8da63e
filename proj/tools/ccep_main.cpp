#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ccep/commands.hpp"
#include "ccep/config.hpp"

namespace {

ccep::RunConfig load_config(const std::string& path, int verbosity) {
  ccep::RunConfig cfg = path.empty() ? ccep::default_run_config() : ccep::load_run_config(path);
  if (verbosity >= 0) cfg.verbosity = verbosity;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative coevolutionary filter pruning"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, grid = "mutation", archive;
  std::size_t workers = 0, seeds = 5;
  double target = 0.4;
  int verbosity = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run config (TOML); built-in desk task when omitted");
    sub->add_option("--workers", workers, "Parallel group EAs (default: $CCEP_WORKERS or hardware threads)");
    sub->add_option("-v,--verbosity", verbosity, "0 quiet, 1 progress, 2 per-generation")->check(CLI::Range(0, 2));
  };

  auto* train = app.add_subcommand("train", "Train the configured network from scratch");
  add_common(train);
  train->add_option("--out", out_dir, "Output directory (default: [output] dir)");

  auto* prune = app.add_subcommand("prune", "Run CCEP on a trained checkpoint");
  add_common(prune);
  prune->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
  prune->add_option("--out", out_dir, "Archive directory (default: [output] dir)");

  auto* sweep = app.add_subcommand("sweep", "Hyper-parameter sweep over several seeds");
  add_common(sweep);
  sweep->add_option("--grid", grid, "population | generations | mutation | selection | grid file");
  sweep->add_option("--seeds", seeds, "Independent runs per configuration")->check(CLI::PositiveNumber);
  sweep->add_option("--target", target, "FLOPs-reduction target for sweep_points.csv")->check(CLI::Range(0.0, 1.0));
  sweep->add_option("--out", out_dir, "Output directory (default: [output] dir)");

  auto* report = app.add_subcommand("report", "Render curves and tables from an archive");
  report->add_option("--archive", archive, "Archive directory written by prune")->required();
  report->add_option("--out", out_dir, "Output directory (default: the archive directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (report->parsed()) {
      ccep::cmd_report(archive, out_dir.empty() ? archive : out_dir, std::cout);
      return 0;
    }
    const ccep::RunConfig cfg = load_config(config_path, verbosity);
    const std::string out = out_dir.empty() ? cfg.output_dir : out_dir;
    const std::size_t n_workers = workers ? workers : ccep::default_workers();
    if (train->parsed()) ccep::cmd_train(cfg, out, std::cout);
    else if (prune->parsed()) ccep::cmd_prune(cfg, checkpoint, out, n_workers, std::cout);
    else ccep::cmd_sweep(cfg, grid, seeds, out, n_workers, target, std::cout);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "ccep: error: %s\n", msg.c_str());
    return 1;
  }
  return 0;
}
