#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ccep/coevolution.hpp"

namespace ccep {

struct SweepPoint {
  std::string label;
  GroupEAConfig group;
};

// One-factor grids around `base`: "population" (m in 3,5,7,9),
// "generations" (G in 5,10,15), "mutation" ((p1, r) in (0.05,0.1),
// (0.1,0.15), (0.15,0.2)) and "selection" (sel_a, sel_b).
std::vector<std::string> builtin_grid_names();
std::vector<SweepPoint> builtin_grid(std::string_view name, const GroupEAConfig& base);

// Grid file: a [grid] section whose keys are axes (population, generations,
// p1, p2, ratio_bound, selection, and mutation = [[p1, r], ...]). The grid is
// the cartesian product of the axes in file order.
std::vector<SweepPoint> parse_grid(std::string_view text, const GroupEAConfig& base);

// A built-in name or a path to a grid file.
std::vector<SweepPoint> resolve_grid(const std::string& grid, const GroupEAConfig& base);

struct SweepRun {
  std::size_t point = 0;
  std::uint64_t seed = 0;
  // Exactly T rows; after early termination the last entry is carried forward.
  std::vector<EntryMetrics> per_iteration;
  std::size_t completed = 0;  // iterations actually run
};

struct SweepResult {
  std::vector<SweepPoint> points;
  EntryMetrics baseline;
  std::size_t iterations = 0;
  std::vector<SweepRun> runs;  // point-major, then seed
};

// Runs every point for `seeds` seeds (global_seed + s, s = 0..seeds-1).
// Whole runs are spread over `workers` threads; each run is sequential, so
// the result is independent of the worker count.
SweepResult run_sweep(const NetworkModel& original, const LabeledDataset& train, const LabeledDataset& test,
                      const CCEPConfig& base, const std::vector<SweepPoint>& points, std::size_t seeds,
                      std::size_t workers, const std::function<void(const SweepRun&)>& on_run = {});

// First 1-based iteration whose FLOPs reduction reaches `target`; T + 1 when
// never reached.
std::size_t iterations_to_target(const SweepRun& run, double target);

double median(std::vector<double> values);

// sweep.csv: point,label,iteration,mean_test_acc,mean_acc_drop,mean_flops_reduction
// (|grid| x T rows).
std::string sweep_csv(const SweepResult& result);
// sweep_runs.csv: point,seed,iteration,test_acc,flops,flops_reduction,carried
std::string sweep_runs_csv(const SweepResult& result);
// sweep_points.csv: point,label,population,generations,p1,p2,ratio_bound,
// selection,median_iters_to_target,mean_final_acc,mean_final_flops_reduction
std::string sweep_points_csv(const SweepResult& result, double target);

}  // namespace ccep
