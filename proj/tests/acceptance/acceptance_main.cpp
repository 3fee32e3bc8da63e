// Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Tolerances and budgets are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ccep/checkpoint.hpp"
#include "ccep/commands.hpp"
#include "ccep/config.hpp"
#include "ccep/file_io.hpp"
#include "ccep/sweep.hpp"
#include "support/oracles.hpp"

using namespace ccep;
namespace fs = std::filesystem;

namespace {

constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-4;
constexpr double kMinDeskAccuracy = 0.95;
constexpr double kTargetReduction = 0.40;
constexpr double kMaxDrop = 0.01;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

double run_criterion(const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_budget = secs < budget_s;
  const bool pass = o.pass && in_budget;
  if (!pass) ++failures;
  std::printf("%s %s: %s (%.2fs, budget %.0fs%s)\n", pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs, budget_s,
              in_budget ? "" : ", over budget");
  std::fflush(stdout);
  return secs;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ccep_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

Outcome mutation_bound() {
  Rng rng(20240601);
  const double ratios[] = {0.1, 0.15, 0.2, 0.5};
  std::size_t violations = 0, calls = 0;
  for (; calls < 100000; ++calls) {
    const std::size_t l = 1 + rng.uniform_index(256);
    const double r = ratios[rng.uniform_index(4)];
    const double rate = rng.uniform01();
    // Random in-bound parent: random bits, then restore ones until the cap holds.
    std::vector<bool> bits(l);
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < l; ++i) {
      bits[i] = rng.uniform01() < 0.9;
      zeros += !bits[i];
    }
    for (std::size_t i = 0; i < l && static_cast<double>(zeros) > l * r; ++i)
      if (!bits[i]) bits[i] = true, --zeros;
    const LayerGenome child = mutate(LayerGenome(bits), {rate, r}, rng);
    if (child.size() != l || static_cast<double>(child.zero_count()) > l * r) ++violations;
  }
  return {violations == 0, fmt("%zu calls, %zu violations", calls, violations)};
}

Outcome exhaustive_oracle() {
  const LabeledDataset train = gen_blobs(4, 100, 16, 0.9, 5);
  const auto spec = ArchitectureBuilder({1, 4, 4}).conv2d(4, 3, 1, true).relu().global_avg_pool().dense(4).build();
  Rng init(8);
  auto tcfg = presets::desk();
  tcfg.epochs = 20;
  tcfg.milestones = {15};
  const NetworkModel net = train_from_scratch(spec, train, tcfg, init);
  const LabeledDataset ds = sample_subset(train, 0.2, 3);

  GroupEAConfig cfg;
  cfg.population = 5;
  cfg.generations = 10;
  cfg.p1 = 0.3;
  cfg.p2 = 0.3;
  cfg.ratio_bound = 0.75;  // floor(4 * 0.75) = 3 zeros: all 15 non-empty masks
  cfg.selection = Selection::sel_a;

  struct Key {
    std::size_t correct, retained;
  };
  std::vector<Key> keys;
  for (const auto& mask : oracle::feasible_masks(4, cfg.ratio_bound))
    keys.push_back({oracle::count_correct(oracle::mask_layer(net, 0, mask), ds), mask.retained()});
  if (keys.size() != 15) return {false, fmt("enumerated %zu masks, expected 15", keys.size())};
  std::stable_sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    return oracle::key_less(a.correct, a.retained, b.correct, b.retained);
  });
  const std::size_t top = static_cast<std::size_t>(std::ceil(0.1 * keys.size()));
  const Key cutoff = keys[top - 1];

  int hits = 0, mismatches = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const GroupRunResult r = run_group_ea(net, 0, ds, cfg, rng);
    const Fitness& f = *r.selected.fitness;
    const std::size_t oracle_correct = oracle::count_correct(oracle::mask_layer(net, 0, r.selected.genome), ds);
    if (oracle_correct != f.correct_count || r.selected.genome.retained() != f.retained) ++mismatches;
    if (!oracle::key_less(cutoff.correct, cutoff.retained, f.correct_count, f.retained)) ++hits;
  }
  return {hits >= 8 && mismatches == 0,
          fmt("%d/10 seeds in top %zu of 15 (cutoff correct=%zu retained=%zu), %d key mismatches", hits, top,
              cutoff.correct, cutoff.retained, mismatches)};
}

Outcome gradient_suite() {
  Rng rng(31);
  const std::vector<ArchitectureSpec> specs = {
      ArchitectureBuilder({3, 1, 1}).dense(5, true).relu().dense(4, true).relu().dense(3).build(),
      ArchitectureBuilder({2, 5, 5}).conv2d(3, 3, 1, true).relu().conv2d(2, 3, 2).relu().global_avg_pool().dense(3).build(),
      ArchitectureBuilder({1, 6, 6}).conv2d(2, 5, 1).relu().global_avg_pool().dense(2).build(),
      ArchitectureBuilder({2, 4, 4}).conv2d(3, 1, 1).global_avg_pool().dense(3).build(),
      ArchitectureBuilder({1, 5, 4}).conv2d(2, 3, 3, true).relu().global_avg_pool().dense(2).build(),
  };
  std::size_t checked = 0, kinks = 0, failed = 0;
  double worst = 0.0;
  for (const auto& spec : specs) {
    const NetworkModel net = init_network(spec, rng);
    Matrix batch(4, spec.input.size());
    for (double& v : batch.values()) v = rng.uniform(-1, 1);
    const std::vector<int> labels{0, 1, 1, 0};
    const auto rep = oracle::check_gradients(net, batch, labels, kGradStep, kGradRelTol);
    checked += rep.checked;
    kinks += rep.kinks;
    failed += rep.failures;
    worst = std::max(worst, rep.worst_relative);
  }
  return {failed == 0 && checked > 0 && kinks * 10 <= checked,
          fmt("%zu parameters, %zu failures, worst rel %.2e, %zu skipped at ReLU kinks", checked, failed, worst,
              kinks)};
}

Outcome flops_instrumentation() {
  const std::vector<ArchitectureSpec> specs = {
      ArchitectureBuilder({2, 1, 1}).dense(64, true).relu().dense(64, true).relu().dense(4).build(),
      ArchitectureBuilder({3, 8, 8}).conv2d(6, 3, 1, true).relu().global_avg_pool().dense(5).build(),
      ArchitectureBuilder({1, 9, 7}).conv2d(4, 3, 2, true).relu().conv2d(5, 5, 1).relu().global_avg_pool().dense(3).build(),
      ArchitectureBuilder({2, 6, 6}).conv2d(3, 1, 1).relu().conv2d(4, 3, 3).relu().global_avg_pool().dense(2).build(),
      ArchitectureBuilder({1, 4, 4}).conv2d(16, 3, 1, true).relu().conv2d(8, 3, 1, true).relu().global_avg_pool().dense(4).build(),
      ArchitectureBuilder({5, 1, 1}).dense(7).dense(3).build(),
  };
  Rng rng(4);
  std::size_t equal = 0;
  std::string detail;
  for (const auto& spec : specs) {
    const NetworkModel net = init_network(spec, rng);
    oracle::OpCounter ops;
    oracle::forward_sample(net, std::vector<double>(spec.input.size(), 0.5), &ops);
    const std::uint64_t counted = ops.multiplies + ops.accumulates;
    if (counted == flops(net)) ++equal;
    else detail += fmt(" [model %llu vs counted %llu]", static_cast<unsigned long long>(flops(net)),
                       static_cast<unsigned long long>(counted));
  }
  return {equal == specs.size() && equal >= 5, fmt("%zu/%zu architectures exact", equal, specs.size()) + detail};
}

struct DeskRun {
  RunConfig cfg;
  TrainOutcome trained;
  PruneOutcome pruned;
  DataSplits data;
  fs::path dir;
};

DeskRun desk;

Outcome desk_end_to_end() {
  desk.cfg = default_run_config();
  desk.cfg.verbosity = 0;
  desk.dir = scratch("desk");
  std::ostringstream log;
  desk.trained = cmd_train(desk.cfg, desk.dir / "train", log);
  desk.pruned = cmd_prune(desk.cfg, desk.trained.checkpoint, desk.dir / "w1", 1, log);
  desk.data = load_datasets(desk.cfg.dataset);
  const double base_acc = desk.trained.metrics.test_accuracy();
  std::size_t hit = 0;
  double best_reduction = 0.0;
  for (const auto& e : desk.pruned.run.archive)
    if (e.metrics.flops_reduction >= kTargetReduction && base_acc - e.metrics.test_accuracy() <= kMaxDrop + 1e-12) {
      if (hit == 0) hit = e.iteration;
      best_reduction = std::max(best_reduction, e.metrics.flops_reduction);
    }
  const bool arch_ok = desk.cfg.architecture.prunable_layers().size() == 2 && desk.cfg.ccep.iterations == 8 &&
                       desk.cfg.ccep.group == cifar_profile().group;
  return {arch_ok && base_acc >= kMinDeskAccuracy && hit > 0,
          fmt("baseline acc %.4f; first qualifying entry %zu; largest qualifying reduction %.3f", base_acc, hit,
              best_reduction)};
}

Outcome determinism() {
  if (desk.dir.empty()) return {false, "end-to-end run missing"};
  std::ostringstream log;
  cmd_prune(desk.cfg, desk.trained.checkpoint, desk.dir / "w4", 4, log);
  const std::string a = read_text_file(desk.dir / "w1" / "summary.csv");
  const std::string b = read_text_file(desk.dir / "w4" / "summary.csv");
  return {!a.empty() && a == b, fmt("summary.csv %zu bytes, workers 1 vs 4 %s", a.size(),
                                    a == b ? "identical" : "differ")};
}

Outcome monotonicity() {
  if (desk.dir.empty()) return {false, "end-to-end run missing"};
  const NetworkModel original = load_checkpoint(desk.trained.checkpoint);
  const std::uint64_t f0 = flops(original);
  std::size_t violations = 0, strict_checks = 0;
  for (const Selection sel : {Selection::sel_a, Selection::sel_b})
    for (std::uint64_t s = 0; s < 10; ++s) {
      CCEPConfig cfg = desk.cfg.ccep;
      cfg.global_seed = 1000 + s;
      cfg.group.selection = sel;
      const RunResult r = run(original, desk.data.train, desk.data.test, cfg, {workers(), {}});
      std::uint64_t prev = f0;
      for (const auto& e : r.archive) {
        if (e.metrics.flops > prev) ++violations;
        const bool any_pruned = std::any_of(e.layers.begin(), e.layers.end(),
                                            [](const LayerOutcome& l) { return l.final_population_has_pruned; });
        if (sel == Selection::sel_b && any_pruned) {
          ++strict_checks;
          if (e.metrics.flops >= prev) ++violations;
        }
        prev = e.metrics.flops;
      }
    }
  return {violations == 0, fmt("20 runs (10 seeds x sel_a/sel_b), %zu strict-decrease checks, %zu violations",
                               strict_checks, violations)};
}

struct PointStats {
  double median_iters = 0.0;
  double mean_final_acc = 0.0;
};

std::vector<PointStats> sweep_stats(const NetworkModel& original, const DataSplits& data,
                                    const std::vector<SweepPoint>& points, std::size_t iterations) {
  CCEPConfig cfg = desk.cfg.ccep;
  cfg.iterations = iterations;
  const SweepResult res = run_sweep(original, data.train, data.test, cfg, points, 5, workers());
  std::vector<PointStats> out(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<double> iters;
    double acc = 0.0;
    for (const auto& run : res.runs) {
      if (run.point != p) continue;
      iters.push_back(static_cast<double>(iterations_to_target(run, kTargetReduction)));
      acc += run.per_iteration.back().test_accuracy();
    }
    out[p] = {median(iters), acc / static_cast<double>(iters.size())};
  }
  return out;
}

std::string describe(const char* name, const PointStats& s) {
  return fmt("%s median iters %.1f, mean final acc %.4f", name, s.median_iters, s.mean_final_acc);
}

// The blob task stays at its accuracy ceiling even at ~10% width, so the
// accuracy side of the trend is measured on 8 concentric rings with a 2 x 32
// MLP, where hidden width limits accuracy. Blob numbers are reported only.
Outcome mutation_trend() {
  if (desk.dir.empty()) return {false, "end-to-end run missing"};
  const auto grid = builtin_grid("mutation", desk.cfg.ccep.group);
  const std::vector<SweepPoint> pair{grid.front(), grid.back()};

  DataSplits rings{gen_rings(8, 250, 0.1, 1), gen_rings(8, 250, 0.1, 2)};
  Rng rng(7);
  const auto spec = ArchitectureBuilder({2, 1, 1}).dense(32, true).relu().dense(32, true).relu().dense(8).build();
  const NetworkModel ring_net = train_from_scratch(spec, rings.train, desk.cfg.train.schedule, rng);
  const auto s = sweep_stats(ring_net, rings, pair, 10);
  const auto blobs = sweep_stats(load_checkpoint(desk.trained.checkpoint), desk.data, pair, 10);
  const PointStats& low = s[0];
  const PointStats& high = s[1];
  return {high.median_iters <= low.median_iters && low.mean_final_acc >= high.mean_final_acc,
          "rings: " + describe("(0.05,0.1)", low) + "; " + describe("(0.15,0.2)", high) +
              " | blobs (not gated): " + describe("(0.05,0.1)", blobs[0]) + "; " + describe("(0.15,0.2)", blobs[1])};
}

Outcome selection_contrast() {
  if (desk.dir.empty()) return {false, "end-to-end run missing"};
  const auto s = sweep_stats(load_checkpoint(desk.trained.checkpoint), desk.data,
                             builtin_grid("selection", desk.cfg.ccep.group), desk.cfg.ccep.iterations);
  return {s[1].median_iters <= s[0].median_iters,
          fmt("sel_a median iters %.1f (acc %.4f); sel_b median iters %.1f (acc %.4f)", s[0].median_iters,
              s[0].mean_final_acc, s[1].median_iters, s[1].mean_final_acc)};
}

}  // namespace

int main() {
  run_criterion("mutation-bound", 10, mutation_bound);
  run_criterion("exhaustive-oracle", 120, exhaustive_oracle);
  run_criterion("gradient-fd", 30, gradient_suite);
  run_criterion("flops-instrumentation", 30, flops_instrumentation);
  const double e2e = run_criterion("desk-end-to-end", 600, desk_end_to_end);
  run_criterion("determinism", std::max(2.0 * e2e, 1.0), determinism);
  run_criterion("archive-monotonicity", 1200, monotonicity);
  run_criterion("mutation-trend", 3600, mutation_trend);
  run_criterion("selection-contrast", 3600, selection_contrast);
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
