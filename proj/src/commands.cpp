#include "ccep/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "ccep/checkpoint.hpp"
#include "ccep/errors.hpp"
#include "ccep/file_io.hpp"
#include "ccep/report.hpp"
#include "ccep/rng.hpp"

namespace ccep {
namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * v);
  return buf;
}

std::string acc(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

DataSplits prepare_data(const RunConfig& cfg) {
  DataSplits data = load_datasets(cfg.dataset);
  check_compatible(cfg.architecture, data);
  return data;
}

void write_config_copy(const std::filesystem::path& out, const RunConfig& cfg) {
  write_file_atomic(out / "config.toml", serialize_run_config(cfg));
}

}  // namespace

std::size_t default_workers() {
  if (const char* env = std::getenv("CCEP_WORKERS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError(std::string("CCEP_WORKERS must be a positive integer, got '") + env + "'");
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

TrainOutcome cmd_train(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const DataSplits data = prepare_data(cfg);
  std::filesystem::create_directories(out);
  if (cfg.verbosity >= 1)
    log << "training " << architecture_tokens(cfg.architecture).size() << "-layer network on " << data.train.size()
        << " samples for " << cfg.train.schedule.epochs << " epochs\n";
  Rng rng(cfg.train_seed);
  // Metrics describe the network exactly as stored in the checkpoint.
  const NetworkModel net = round_to_float32(train_from_scratch(cfg.architecture, data.train, cfg.train.schedule, rng));

  TrainOutcome outcome;
  outcome.checkpoint = out / "model.ckpt";
  save_checkpoint(net, outcome.checkpoint);
  outcome.metrics = measure(net, data.test, flops(net));

  nlohmann::ordered_json j;
  j["checkpoint"] = "model.ckpt";
  j["test_correct"] = outcome.metrics.test_correct;
  j["test_total"] = outcome.metrics.test_total;
  j["test_accuracy"] = outcome.metrics.test_accuracy();
  j["flops"] = outcome.metrics.flops;
  j["params"] = outcome.metrics.params;
  j["config_fingerprint"] = config_fingerprint(cfg);
  write_file_atomic(out / "train_metrics.json", j.dump(2) + "\n");
  write_config_copy(out, cfg);

  log << "test_acc=" << acc(outcome.metrics.test_accuracy()) << " flops=" << outcome.metrics.flops
      << " params=" << outcome.metrics.params << " checkpoint=" << outcome.checkpoint.string() << "\n";
  return outcome;
}

PruneOutcome cmd_prune(const RunConfig& cfg, const std::filesystem::path& checkpoint, const std::filesystem::path& out,
                       std::size_t workers, std::ostream& log) {
  const DataSplits data = prepare_data(cfg);
  if (!std::filesystem::exists(checkpoint)) throw FormatError("checkpoint not found: " + checkpoint.string());
  const NetworkModel original = load_checkpoint(checkpoint);
  if (!(original.spec() == cfg.architecture))
    throw ConfigError("checkpoint architecture does not match the config architecture");
  std::filesystem::create_directories(out);

  const std::string fingerprint = config_fingerprint(cfg);
  PruneOutcome outcome;
  outcome.baseline = make_baseline(original, data.test, fingerprint);
  write_baseline(out, outcome.baseline);
  write_config_copy(out, cfg);
  if (cfg.verbosity >= 1)
    log << "baseline test_acc=" << acc(outcome.baseline.metrics.test_accuracy())
        << " flops=" << outcome.baseline.metrics.flops << "\n";

  RunOptions options;
  options.workers = workers;
  options.on_entry = [&](const ArchiveEntry& e) {
    write_entry(out, e, fingerprint);
    if (cfg.verbosity >= 1) {
      log << "iteration " << e.iteration << ": test_acc=" << acc(e.metrics.test_accuracy())
          << " flops=" << e.metrics.flops << " reduction=" << pct(e.metrics.flops_reduction) << " widths=";
      for (std::size_t k = 0; k < e.layers.size(); ++k) log << (k ? "-" : "") << e.layers[k].genome.retained();
      log << "\n";
    }
    if (cfg.verbosity >= 2)
      for (const auto& l : e.layers)
        for (const auto& g : l.history)
          log << "  layer " << l.layer_index << " gen " << g.generation << ": correct=" << g.best.correct_count << "/"
              << g.best.eval_total << " retained=" << g.best.retained << "\n";
  };
  outcome.run = run(original, data.train, data.test, cfg.ccep, options);
  write_summary(out, outcome.baseline, outcome.run.archive);
  write_trace(out, outcome.run.archive);
  if (outcome.run.terminated_early && cfg.verbosity >= 1)
    log << "stopped early: " << outcome.run.termination_reason << "\n";
  if (cfg.verbosity >= 1)
    log << "archive: " << outcome.run.archive.size() << " entries, " << outcome.run.evaluations
        << " evaluations, written to " << out.string() << "\n";
  return outcome;
}

SweepResult cmd_sweep(const RunConfig& cfg, const std::string& grid, std::size_t seeds,
                      const std::filesystem::path& out, std::size_t workers, double target, std::ostream& log) {
  const std::vector<SweepPoint> points = resolve_grid(grid, cfg.ccep.group);
  const DataSplits data = prepare_data(cfg);
  std::filesystem::create_directories(out);
  Rng rng(cfg.train_seed);
  const NetworkModel original =
      round_to_float32(train_from_scratch(cfg.architecture, data.train, cfg.train.schedule, rng));
  if (cfg.verbosity >= 1)
    log << "sweep: " << points.size() << " configurations x " << seeds << " seeds, T=" << cfg.ccep.iterations << "\n";
  std::mutex log_mutex;
  SweepResult result = run_sweep(original, data.train, data.test, cfg.ccep, points, seeds, workers,
                                 [&](const SweepRun& r) {
                                   if (cfg.verbosity < 1) return;
                                   std::lock_guard lock(log_mutex);
                                   log << "  done: " << points[r.point].label << " seed " << r.seed << "\n";
                                 });
  write_file_atomic(out / "sweep.csv", sweep_csv(result));
  write_file_atomic(out / "sweep_runs.csv", sweep_runs_csv(result));
  write_file_atomic(out / "sweep_points.csv", sweep_points_csv(result, target));
  write_config_copy(out, cfg);
  if (cfg.verbosity >= 1) log << "sweep results written to " << out.string() << "\n";
  return result;
}

std::string cmd_report(const std::filesystem::path& archive, const std::filesystem::path& out, std::ostream& log) {
  std::string table = write_report(archive, out);
  log << table;
  return table;
}

}  // namespace ccep
