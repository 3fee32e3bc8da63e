#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ccep/dataset.hpp"
#include "ccep/group_ea.hpp"
#include "ccep/network.hpp"
#include "ccep/training.hpp"

namespace ccep {

struct CCEPConfig {
  std::size_t iterations = 12;  // T
  GroupEAConfig group;
  double ds_fraction = 0.2;     // share of the training set used as D_s
  FinetuneConfig finetune = presets::desk();
  std::uint64_t global_seed = 0;

  void validate() const;
  friend bool operator==(const CCEPConfig&, const CCEPConfig&) = default;
};

// Hyperparameter profiles (T, m, G, p1, p2, r, selection, D_s share).
CCEPConfig cifar_profile();
CCEPConfig imagenet_profile();

struct LayerGroup {
  std::size_t layer_index = 0;
  std::size_t width = 0;
  friend bool operator==(const LayerGroup&, const LayerGroup&) = default;
};

// One group per prunable layer, widths taken from `base`. Throws
// NoPrunableLayersError when nothing is prunable.
std::vector<LayerGroup> group_by_layer(const NetworkModel& base);

struct LayerOutcome {
  std::size_t layer_index = 0;
  std::size_t width_before = 0;
  LayerGenome genome = LayerGenome::all_ones(1);
  Fitness fitness;
  bool final_population_has_pruned = false;
  std::vector<GenerationRecord> history;
};

struct EntryMetrics {
  std::size_t test_correct = 0;
  std::size_t test_total = 0;
  std::uint64_t flops = 0;
  std::uint64_t params = 0;
  double flops_reduction = 0.0;  // 1 - flops / flops(original)

  double test_accuracy() const noexcept {
    return test_total == 0 ? 0.0 : static_cast<double>(test_correct) / static_cast<double>(test_total);
  }
};

EntryMetrics measure(const NetworkModel& net, const LabeledDataset& test, std::uint64_t original_flops);

struct ArchiveEntry {
  std::size_t iteration = 0;  // 1-based
  NetworkModel network;
  std::vector<LayerOutcome> layers;
  EntryMetrics metrics;
};

struct RunOptions {
  std::size_t workers = 1;
  // Called after each archive entry is produced.
  std::function<void(const ArchiveEntry&)> on_entry;
};

struct IterationResult {
  NetworkModel new_base;
  ArchiveEntry entry;
  std::uint64_t evaluations = 0;
};

// Seeds of the random streams used within one outer iteration.
std::uint64_t ds_seed(std::uint64_t global_seed, std::size_t iteration);
std::uint64_t group_seed(std::uint64_t global_seed, std::size_t iteration, std::size_t layer_index);
std::uint64_t finetune_seed(std::uint64_t global_seed, std::size_t iteration);

// One prune-and-finetune step: sample D_s, run every group EA against the
// frozen base, splice the selected layers, finetune on `train`, measure on
// `test`. `iteration` is 1-based and only feeds seed derivation.
IterationResult run_iteration(const NetworkModel& base, const LabeledDataset& train, const LabeledDataset& test,
                              const CCEPConfig& cfg, std::size_t iteration, std::uint64_t original_flops,
                              const RunOptions& options = {});

struct RunResult {
  std::vector<ArchiveEntry> archive;
  std::uint64_t evaluations = 0;
  bool terminated_early = false;
  std::string termination_reason;
};

// Up to cfg.iterations chained iterations. Stops early when no prunable
// layer remains or every prunable layer is down to width 1.
RunResult run(const NetworkModel& original, const LabeledDataset& train, const LabeledDataset& test,
              const CCEPConfig& cfg, const RunOptions& options = {});

}  // namespace ccep
