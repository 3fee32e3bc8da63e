#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "ccep/archive.hpp"
#include "ccep/config.hpp"
#include "ccep/sweep.hpp"

namespace ccep {

// CCEP_WORKERS if set (must be a positive integer), else the hardware
// thread count.
std::size_t default_workers();

struct TrainOutcome {
  std::filesystem::path checkpoint;
  EntryMetrics metrics;  // of the saved (binary32) network
};

// Trains the configured architecture from scratch and writes
// <out>/model.ckpt, <out>/train_metrics.json and <out>/config.toml.
TrainOutcome cmd_train(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);

struct PruneOutcome {
  BaselineInfo baseline;
  RunResult run;
};

// Runs CCEP from a checkpoint and writes the archive into `out`.
PruneOutcome cmd_prune(const RunConfig& cfg, const std::filesystem::path& checkpoint, const std::filesystem::path& out,
                       std::size_t workers, std::ostream& log);

// Trains the original network once, then runs every grid point for `seeds`
// seeds. Writes sweep.csv, sweep_runs.csv and sweep_points.csv.
SweepResult cmd_sweep(const RunConfig& cfg, const std::string& grid, std::size_t seeds,
                      const std::filesystem::path& out, std::size_t workers, double target, std::ostream& log);

// Renders an archive directory; returns the text table.
std::string cmd_report(const std::filesystem::path& archive, const std::filesystem::path& out, std::ostream& log);

}  // namespace ccep
