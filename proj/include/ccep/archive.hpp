#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ccep/coevolution.hpp"

// On-disk archive layout (schemas in docs/formats.md):
//   baseline.json, entry_NNN.json, entry_NNN.ckpt, summary.csv, trace.csv,
//   config.toml
namespace ccep {

struct BaselineInfo {
  EntryMetrics metrics;  // of the unpruned network; flops_reduction is 0
  std::vector<std::size_t> widths;          // per prunable layer
  std::vector<std::size_t> layer_indices;
  std::string config_fingerprint;
};

BaselineInfo make_baseline(const NetworkModel& original, const LabeledDataset& test, std::string fingerprint);

std::string entry_file_stem(std::size_t iteration);  // "entry_007"

std::string baseline_json(const BaselineInfo& baseline);
std::string entry_json(const ArchiveEntry& entry, const std::string& fingerprint);

// Header "iteration,test_acc,flops,flops_reduction"; row 0 is the baseline,
// then one row per entry. Reals use %.6f.
std::string summary_csv(const BaselineInfo& baseline, std::span<const ArchiveEntry> entries);

// Header "iteration,layer,generation,correct_count,retained,flops": the best
// individual of every generation of every group.
std::string trace_csv(std::span<const ArchiveEntry> entries);

void write_baseline(const std::filesystem::path& dir, const BaselineInfo& baseline);
// entry_NNN.json plus its checkpoint.
void write_entry(const std::filesystem::path& dir, const ArchiveEntry& entry, const std::string& fingerprint);
void write_summary(const std::filesystem::path& dir, const BaselineInfo& baseline, std::span<const ArchiveEntry> entries);
void write_trace(const std::filesystem::path& dir, std::span<const ArchiveEntry> entries);

// What report and the tests read back.
struct StoredLayer {
  std::size_t layer = 0;
  std::size_t width_before = 0;
  std::size_t width = 0;
  std::string bits;
  std::size_t correct_count = 0;
  std::size_t eval_total = 0;
  bool final_population_has_pruned = false;
};

struct StoredMetrics {
  std::size_t test_correct = 0;
  std::size_t test_total = 0;
  double test_accuracy = 0.0;
  std::uint64_t flops = 0;
  std::uint64_t params = 0;
  double flops_reduction = 0.0;
};

struct StoredEntry {
  std::size_t iteration = 0;
  std::vector<StoredLayer> layers;
  std::size_t retained_total = 0;
  StoredMetrics metrics;
  std::string config_fingerprint;
  std::string checkpoint;
};

struct StoredBaseline {
  StoredMetrics metrics;
  std::vector<std::size_t> layer_indices;
  std::vector<std::size_t> widths;
  std::string config_fingerprint;
};

struct StoredArchive {
  StoredBaseline baseline;
  std::vector<StoredEntry> entries;  // ascending iteration
};

StoredEntry parse_entry_json(const std::string& text);
StoredBaseline parse_baseline_json(const std::string& text);

// Throws FormatError on missing or corrupt files.
StoredArchive read_archive(const std::filesystem::path& dir);

}  // namespace ccep
